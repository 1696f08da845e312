"""Shared utilities: logging, errors, parallel maps, random streams and file output"""
