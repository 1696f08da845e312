"""Angular rules on S^{n-1} built from antipodal pairs.

Each rule returns unit directions w_k together with a high-order and a low-order
weight vector; sum_k W_k [f(x0 + rho w_k) + f(x0 - rho w_k)] approximates the
integral of f(x0 + rho w) over the whole sphere. The gap between the two weight
sets is the angular error estimate.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special

from utils.errors import DomainError

MAX_DIMENSION = 3
# geometric refinement levels added at the graded ends
_END_LEVELS = 12


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2); |S^0| = 2"""
    return float(2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0))


def ball_volume(dim: int) -> float:
    """|B_1| in R^dim"""
    return float(np.pi ** (dim / 2.0) / special.gamma(dim / 2.0 + 1.0))


@dataclass(frozen=True)
class AngularRule:
    directions: np.ndarray
    high: np.ndarray
    low: np.ndarray

    @property
    def size(self) -> int:
        return int(self.directions.shape[0])


def _graded_breaks(upper: float, panels: int, both_ends: bool) -> np.ndarray:
    i = np.arange(panels + 1)
    if both_ends:
        base = upper * 0.5 * (1.0 - np.cos(np.pi * i / panels))
    else:
        base = upper * (1.0 - np.cos(0.5 * np.pi * i / panels))
    first = base[1]
    extra = [first * 2.0 ** (-k) for k in range(1, _END_LEVELS + 1)]
    pieces = [base, np.array(extra)]
    if both_ends:
        pieces.append(upper - np.array(extra))
    return np.unique(np.concatenate(pieces))


def _composite_gauss(breaks: np.ndarray, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    left, right = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (right - left)
    pts = (left + right) * 0.5 + half * x[None, :]
    wts = half * w[None, :]
    return pts.ravel(), wts.ravel()


def _frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal rows with the first row along ``axis``"""
    dim = axis.shape[0]
    basis = np.eye(dim)
    k = int(np.argmax(np.abs(axis)))
    seed = np.vstack([axis, np.delete(basis, k, axis=0)])
    q, _ = np.linalg.qr(seed.T)
    q = q.T
    if np.dot(q[0], axis) < 0:
        q = -q
    return q


@lru_cache(maxsize=64)
def _rule_cached(n: int, panels: int, nodes: int, axis_key: Optional[tuple]) -> AngularRule:
    if n == 1:
        return AngularRule(np.array([[1.0]]), np.array([1.0]), np.array([1.0]))
    axis = np.array(axis_key if axis_key is not None else (1.0,) + (0.0,) * (n - 1))
    axis = axis / np.linalg.norm(axis)
    frame = _frame(axis)
    low_nodes = max(2, nodes // 2)
    if n == 2:
        breaks = _graded_breaks(np.pi, panels, both_ends=True)
        th_h, w_h = _composite_gauss(breaks, nodes)
        th_l, w_l = _composite_gauss(breaks, low_nodes)
        theta = np.concatenate([th_h, th_l])
        local = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        high = np.concatenate([w_h, np.zeros_like(w_l)])
        low = np.concatenate([np.zeros_like(w_h), w_l])
    elif n == 3:
        breaks = _graded_breaks(0.5 * np.pi, max(4, panels // 2), both_ends=False)
        psi_h, w_h = _composite_gauss(breaks, nodes)
        psi_l, w_l = _composite_gauss(breaks, low_nodes)
        m_high = 4 * nodes
        m_low = 2 * nodes

        def product(psi, wpsi, m):
            phi = 2.0 * np.pi * np.arange(m) / m
            pp, ff = np.meshgrid(psi, phi, indexing="ij")
            ww = (wpsi[:, None] * np.sin(pp) * (2.0 * np.pi / m)).ravel()
            dirs = np.stack([np.cos(pp).ravel(),
                             (np.sin(pp) * np.cos(ff)).ravel(),
                             (np.sin(pp) * np.sin(ff)).ravel()], axis=1)
            return dirs, ww

        d_h, ww_h = product(psi_h, w_h, m_high)
        d_l, ww_l = product(psi_l, w_l, m_low)
        local = np.vstack([d_h, d_l])
        high = np.concatenate([ww_h, np.zeros_like(ww_l)])
        low = np.concatenate([np.zeros_like(ww_h), ww_l])
    else:
        raise DomainError(f"angular rules are available for n <= {MAX_DIMENSION}, got n={n}")
    directions = local @ frame
    return AngularRule(directions, high, low)


def angular_rule(n: int, panels: int = 24, nodes: int = 8,
                 axis: Optional[np.ndarray] = None) -> AngularRule:
    """Pair rule on S^{n-1}, graded toward ``axis`` (and its antipode)"""
    if n < 1:
        raise DomainError(f"dimension must be positive, got {n}")
    if n > MAX_DIMENSION:
        raise DomainError(f"angular rules are available for n <= {MAX_DIMENSION}, got n={n}")
    key = None
    if axis is not None and n > 1:
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm > 0:
            key = tuple(np.round(axis / norm, 15))
    return _rule_cached(n, int(panels), int(nodes), key)
