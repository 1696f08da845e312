"""Fractional s-mean curvature of graphs, balls and general indicator sets"""
