"""Replay of the sliding/touching argument on sampled candidate sets"""
