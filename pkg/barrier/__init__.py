"""Barrier family x_N < eps^(1-alpha) |x'|^alpha: beta constant, curvature profile, supersolution search"""
