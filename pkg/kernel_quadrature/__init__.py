"""Kernel functions G_s, G~_s and the principal-value quadrature engine"""
