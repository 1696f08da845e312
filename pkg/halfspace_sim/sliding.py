"""Containment infima, touching points, the l_j schedule and the cone dichotomy"""
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from geometry.sampling import cone_strata
from geometry.sets import GeomSetBase, TruncatedCone
from halfspace_sim.candidate import BoundarySamples
from utils.errors import DomainError, GeometryViolationError, SamplingResolutionError
from utils.logger import logger
from utils.rng import stream

CaseTag = Literal["graph-type", "cone-empty", "cone-hits-boundary"]

CONE_TAG = 29
# minority counts at or below this make the cone verdict indeterminate
_MINORITY = 2
_BISECTION_STEPS = 48
# dyadic shells toward the apex and the size of the axis scan in cone sampling
_CONE_SHELLS = 10
_AXIS_POINTS = 4096


def _points(samples: Union[BoundarySamples, np.ndarray]) -> np.ndarray:
    pts = samples.points if isinstance(samples, BoundarySamples) else np.asarray(samples, dtype=float)
    return np.atleast_2d(pts)


def epsilon_infimum(samples: Union[BoundarySamples, np.ndarray], alpha: float, cutoff: float = 0.0) -> float:
    """Smallest eps with every sample inside F_eps = {x_N < eps^(1-alpha) |x'|^alpha}.

    Samples with x_N <= 0 impose nothing. A sample with x_N > 0 and |x'| below
    ``cutoff`` (or x' = 0) sits in the excluded cylinder and is a violation.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    pts = _points(samples)
    height = pts[:, -1]
    radial = np.linalg.norm(pts[:, :-1], axis=1)
    above = height > 0.0
    bad = above & ((radial < cutoff) | (radial == 0.0))
    if np.any(bad):
        raise GeometryViolationError(
            f"{int(bad.sum())} samples above the hyperplane inside the excluded cylinder |x'| < {cutoff}")
    if not np.any(above):
        return 0.0
    ratio = height[above] / radial[above] ** alpha
    return float(np.max(ratio) ** (1.0 / (1.0 - alpha)))


def touching_points(samples: Union[BoundarySamples, np.ndarray], eps: float, alpha: float,
                    tol: float, min_radius: float = 1.0) -> np.ndarray:
    """Samples on the barrier boundary, |x_N - eps^(1-alpha)|x'|^alpha| <= tol, with |x'| >= min_radius.

    Rows are ordered by distance to the barrier boundary, closest first.
    """
    if not eps > 0.0:
        raise DomainError("touching points need eps > 0")
    pts = _points(samples)
    radial = np.linalg.norm(pts[:, :-1], axis=1)
    gap = np.abs(pts[:, -1] - eps ** (1.0 - alpha) * radial ** alpha)
    keep = np.nonzero((gap <= tol) & (radial >= min_radius))[0]
    if keep.size == 0:
        raise SamplingResolutionError(
            f"no boundary sample within {tol:.2e} of the barrier at eps={eps:.6e}; refine the sampler")
    order = keep[np.argsort(gap[keep], kind="stable")]
    return pts[order]


def ell_schedule(j: int, p_norm: float, n: int, alpha: float) -> float:
    """max{1/sqrt(j+1), (|p_j| + 2)^(-(1-alpha)/(2(n+2)))}"""
    if j < 1 or p_norm < 0:
        raise DomainError("ell_schedule needs j >= 1 and |p| >= 0")
    return float(max(1.0 / np.sqrt(j + 1.0), (p_norm + 2.0) ** (-(1.0 - alpha) / (2.0 * (n + 2)))))


class ConeTest(BaseModel):
    """Outcome of sampling C + p = (downward cone of slope ell) within B_{4|p|}(p), shifted to p.

    Counts cover the dyadic strata and the axis scan together.
    """
    case_tag: CaseTag
    inside: int = Field(..., ge=0, description="samples of C + p inside E")
    outside: int = Field(..., ge=0)
    q: Optional[List[float]] = Field(None, description="located boundary point of E in C + p")
    indeterminate: bool = False
    seed: int


def bisect_boundary(E: GeomSetBase, inner: np.ndarray, outer: np.ndarray, steps: int = _BISECTION_STEPS) -> np.ndarray:
    """Boundary point on the segment from a point of E to a point outside it"""
    a, b = inner.astype(float), outer.astype(float)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        if E.contains(mid):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _vertical_hit(E: GeomSetBase, cone: GeomSetBase, start: np.ndarray, direction: float,
                  step: float) -> Optional[np.ndarray]:
    """First boundary crossing walking vertically from an exterior point while staying in the cone"""
    e = np.zeros_like(start)
    e[-1] = direction
    prev = start
    while True:
        nxt = prev + step * e
        if not cone.contains(nxt):
            return None
        if E.contains(nxt):
            return bisect_boundary(E, nxt, prev)
        prev = nxt


def _locate_boundary(E: GeomSetBase, cone: TruncatedCone, p: np.ndarray, pts: np.ndarray,
                     inside: np.ndarray, tries: int = 8) -> np.ndarray:
    """Boundary point of E inside C + p with the largest drop (p - q)_N among a few candidates.

    The deepest exterior samples are walked down (then up) vertically to the
    first crossing; a segment bisection toward the nearest interior sample is
    the fallback.
    """
    outside_pts = pts[~inside]
    inside_pts = pts[inside]
    order = np.argsort(outside_pts[:, -1], kind="stable")[:tries]
    step = cone.radius / 256.0
    found = []
    for z in outside_pts[order]:
        hit = _vertical_hit(E, cone, z, -1.0, step)
        if hit is None:
            hit = _vertical_hit(E, cone, z, 1.0, step)
        if hit is None:
            nearest = inside_pts[np.argmin(np.linalg.norm(inside_pts - z, axis=1))]
            hit = bisect_boundary(E, nearest, z)
        found.append(hit)
    found = np.array(found)
    return found[np.argmax(p[-1] - found[:, -1])]


def cone_inclusion_test(E: GeomSetBase, p, ell: float, samples: int, seed: int) -> ConeTest:
    """Classify C + p against E: all inside, all outside, or crossing the boundary"""
    if not 0.0 < ell < 1.0:
        raise DomainError(f"cone slope must lie in (0, 1), got {ell}")
    p = np.asarray(p, dtype=float)
    radius = 4.0 * float(np.linalg.norm(p))
    if radius <= 0.0:
        raise DomainError("touching point must be away from the origin")
    cone = TruncatedCone(slope=ell, apex=p.tolist(), radius=radius, opening=-1)
    # features of E near the apex fill a vanishing share of the cone's volume
    pts = cone_strata(p, ell, radius, stream(seed, CONE_TAG), max(64, samples // 4), _CONE_SHELLS,
                      axis_points=_AXIS_POINTS)
    inside = np.asarray(E.contains(pts), dtype=bool)
    n_in = int(inside.sum())
    n_out = int(inside.size - n_in)
    if n_out == 0:
        return ConeTest(case_tag="graph-type", inside=n_in, outside=0, seed=seed)
    if n_in == 0:
        return ConeTest(case_tag="cone-empty", inside=0, outside=n_out, seed=seed)
    q = _locate_boundary(E, cone, p, pts, inside)
    indeterminate = min(n_in, n_out) <= _MINORITY
    if indeterminate:
        logger.warning(f"cone test at |p|={radius / 4:.3e}: only {min(n_in, n_out)} minority samples")
    return ConeTest(case_tag="cone-hits-boundary", inside=n_in, outside=n_out, q=q.tolist(),
                    indeterminate=indeterminate, seed=seed)


class InclusionCheck(BaseModel):
    samples: int
    violations: int
    passed: bool


def lambda_hat_inclusion(p, ell: float, eps: float, alpha: float, samples: int, seed: int,
                         radius: Optional[float] = None) -> InclusionCheck:
    """Sample (cone of slope ell/4 below p) within B_radius(p) and count points outside F_eps.

    Points of the wider cone with x_N < 0 lie in F_eps trivially, so the
    default radius 4|p| covers every point that can fail.
    """
    p = np.asarray(p, dtype=float)
    radius = radius or 4.0 * float(np.linalg.norm(p))
    pts = cone_strata(p, ell / 4.0, radius, stream(seed, CONE_TAG, 1), max(64, samples // 4), _CONE_SHELLS)
    height = eps ** (1.0 - alpha) * np.linalg.norm(pts[:, :-1], axis=1) ** alpha
    violations = int(np.count_nonzero(pts[:, -1] >= height))
    return InclusionCheck(samples=int(pts.shape[0]), violations=violations, passed=violations == 0)


def flatness_score(samples: Union[BoundarySamples, np.ndarray], p) -> float:
    """Oscillation of x_N over boundary samples of (E - p)/(2|p|) in B'_1 x (-1, 1).

    Report-only: small values say the rescaled boundary looks flat at this scale.
    NaN when no sample falls in the window.
    """
    p = np.asarray(p, dtype=float)
    scale = 2.0 * float(np.linalg.norm(p))
    if scale <= 0.0:
        raise DomainError("flatness needs p away from the origin")
    local = (_points(samples) - p) / scale
    window = (np.linalg.norm(local[:, :-1], axis=1) < 1.0) & (np.abs(local[:, -1]) < 1.0)
    if not np.any(window):
        return float("nan")
    heights = local[window, -1]
    return float(heights.max() - heights.min())
