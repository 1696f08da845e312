"""Symbolic subsets of R^{n+1}: membership, boolean algebra, volumes, perimeters and grids"""
