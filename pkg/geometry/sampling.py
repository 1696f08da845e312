"""Sampling primitives shared by volume, perimeter and curvature estimators"""
from typing import Tuple

import numpy as np
from scipy import special

from geometry.sets import Ball, Box, GeomSetBase
from utils.errors import DomainError
from utils.rng import uniform_directions


def window_volume(window: GeomSetBase) -> float:
    if isinstance(window, (Ball, Box)):
        return float(window.exact_volume())
    raise DomainError(f"windows must be balls or boxes, got {type(window).__name__}")


def uniform_in_orthant(window: GeomSetBase, signs: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points in the orthant ``signs`` (entries +-1) of a ball or box window, split at its centre"""
    dim = signs.shape[0]
    if isinstance(window, Ball):
        u = uniform_directions(rng, count, dim)
        r = window.radius * rng.random(count) ** (1.0 / dim)
        local = np.abs(u * r[:, None]) * signs
        return np.asarray(window.center) + local
    if isinstance(window, Box):
        lo, hi = np.asarray(window.lo), np.asarray(window.hi)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return mid + signs * half * rng.random((count, dim))
    raise DomainError(f"windows must be balls or boxes, got {type(window).__name__}")


def orthant_signs(dim: int) -> np.ndarray:
    """All 2^dim sign patterns in a fixed order"""
    idx = np.arange(2 ** dim)[:, None]
    bits = (idx >> np.arange(dim)[None, :]) & 1
    return np.where(bits == 1, 1.0, -1.0)


def uniform_in_box(lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    return lo + (hi - lo) * rng.random((count, lo.shape[0]))


def sample_in_set(region: GeomSetBase, rng: np.random.Generator, count: int,
                  max_rounds: int = 200) -> Tuple[np.ndarray, float]:
    """Rejection sample ``count`` uniform points of a bounded region.

    Returns the points and the region volume (exact when known, otherwise the
    acceptance-rate estimate).
    """
    box = region.bounding_box()
    if box is None:
        raise DomainError(f"{type(region).__name__} is unbounded; cannot sample it uniformly")
    lo, hi = box
    box_volume = float(np.prod(hi - lo))
    if box_volume <= 0.0:
        raise DomainError("sampling region has zero volume")
    accepted, drawn = [], 0
    total = 0
    for _ in range(max_rounds):
        batch = uniform_in_box(lo, hi, rng, max(count, 256))
        drawn += batch.shape[0]
        keep = batch[region.contains(batch)]
        accepted.append(keep)
        total += keep.shape[0]
        if total >= count:
            break
    if total < count:
        raise DomainError("sampling region is too thin for rejection sampling")
    pts = np.vstack(accepted)[:count]
    volume = region.exact_volume()
    if volume is None:
        volume = box_volume * total / drawn
    return pts, float(volume)


def frame_for(normal: np.ndarray) -> np.ndarray:
    """(N-1, N) orthonormal basis of the hyperplane orthogonal to ``normal``"""
    dim = normal.shape[0]
    k = int(np.argmax(np.abs(normal)))
    seed = np.vstack([normal, np.delete(np.eye(dim), k, axis=0)])
    q, _ = np.linalg.qr(seed.T)
    return q.T[1:]


def band_probability(dim: int, width: float) -> float:
    """P(|w . nu| < width) for w uniform on S^{dim-1}"""
    if width >= 1.0:
        return 1.0
    return float(special.betainc(0.5, 0.5 * (dim - 1), width * width))


def directions_in_band(rng: np.random.Generator, count: int, normal: np.ndarray, width: float,
                       inside: bool) -> np.ndarray:
    """Uniform directions conditioned on |w . nu| < width (inside) or >= width (outside)"""
    dim = normal.shape[0]
    b = 0.5 * (dim - 1)
    p_band = band_probability(dim, width)
    u = rng.random(count)
    level = u * p_band if inside else p_band + u * (1.0 - p_band)
    z2 = special.betaincinv(0.5, b, np.clip(level, 0.0, 1.0))
    z = np.sqrt(np.clip(z2, 0.0, 1.0)) * np.where(rng.random(count) < 0.5, -1.0, 1.0)
    tangent = uniform_directions(rng, count, dim - 1)
    basis = frame_for(normal)
    return z[:, None] * normal[None, :] + np.sqrt(1.0 - z * z)[:, None] * (tangent @ basis)


def shell_radii(rng: np.random.Generator, count: int, inner: float, s: float) -> Tuple[np.ndarray, float]:
    """Radii on [inner, 2 inner] with density proportional to rho^{-1-s}.

    Returns the radii and the shell weight int rho^{-1-s} d rho over the shell.
    """
    a = inner ** (-s)
    b = (2.0 * inner) ** (-s)
    u = rng.random(count)
    rho = (a - u * (a - b)) ** (-1.0 / s)
    return rho, (a - b) / s


def outer_radii(rng: np.random.Generator, count: int, start: float, s: float) -> Tuple[np.ndarray, float]:
    """Radii on [start, inf) with density proportional to rho^{-1-s}; weight start^{-s}/s"""
    u = 1.0 - rng.random(count)
    return start * u ** (-1.0 / s), start ** (-s) / s


def downward_cone_directions(rng: np.random.Generator, count: int, dim: int, slope: float,
                             max_rounds: int = 200) -> np.ndarray:
    """Uniform unit vectors d with d_N < -slope |d'|"""
    accepted, total = [], 0
    for _ in range(max_rounds):
        batch = uniform_directions(rng, max(count, 256), dim)
        keep = batch[batch[:, -1] < -slope * np.linalg.norm(batch[:, :-1], axis=1)]
        accepted.append(keep)
        total += keep.shape[0]
        if total >= count:
            return np.vstack(accepted)[:count]
    raise DomainError(f"cone of slope {slope:g} is too narrow for direction sampling")


def cone_strata(apex, slope: float, radius: float, rng: np.random.Generator, per_shell: int,
                shells: int, axis_points: int = 0) -> np.ndarray:
    """Points of (apex + downward cone of ``slope``) within B_radius(apex), stratified toward the apex.

    Shell k holds |y - apex| in [radius 2^(-k-1), radius 2^(-k)) for k < shells
    and the last stratum is the ball of radius radius 2^(-shells); each gets
    ``per_shell`` uniform points. ``axis_points`` adds a geometric scan of the
    axis apex - t e_N, t in [radius 2^(-shells-2), radius).
    """
    apex = np.asarray(apex, dtype=float)
    dim = apex.shape[0]
    if per_shell < 1 or shells < 0:
        raise DomainError("cone strata need per_shell >= 1 and shells >= 0")
    parts = []
    for k in range(shells + 1):
        outer = radius * 2.0 ** (-k)
        inner = 0.0 if k == shells else 0.5 * outer
        dirs = downward_cone_directions(rng, per_shell, dim, slope)
        # uniform in volume on the annulus
        r = (inner ** dim + rng.random(per_shell) * (outer ** dim - inner ** dim)) ** (1.0 / dim)
        parts.append(apex + r[:, None] * dirs)
    if axis_points > 0:
        t = np.geomspace(radius * 2.0 ** (-shells - 2), radius, axis_points, endpoint=False)
        axis = np.tile(apex, (axis_points, 1))
        axis[:, -1] -= t
        parts.append(axis)
    return np.vstack(parts)
