"""Witness regions D outside the candidate and the repaired-barrier sign check.

A witness D must sit at positive distance from the touching point p, inside
the widened cone (slope ell/4) below p, and carry positive volume outside E.
Removing D from F_eps adds 2 * int_D |y - p|^{-(N+s)} dy to the curvature
at p, which is what turns the barrier into a strict supersolution.
"""
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from barrier.profile import barrier_curvature
from barrier.spec import BarrierSpec
from curvature.correction import correction_integral
from curvature.models import CurvatureResult
from geometry.measure import VolumeEstimate, mc_volume
from geometry.sampling import sample_in_set
from geometry.sets import Ball, GeomSetBase, IceCreamCone
from halfspace_sim.sliding import bisect_boundary
from kernel_quadrature.engine import PVResult, QuadConfig
from kernel_quadrature.sphere import ball_volume
from utils.errors import DomainError, GeometryViolationError
from utils.logger import logger
from utils.rng import derive_seed, stream, uniform_directions

WitnessCase = Literal["cone-empty", "cone-hits-boundary", "c1"]
Verdict = Literal["positive", "negative", "indeterminate"]

WITNESS_TAG = 31
ICE_CREAM_TAG = 37


class WitnessRegion(BaseModel):
    """D = ball, or ball minus E, with the certified placement clauses"""
    case: WitnessCase
    center: List[float]
    radius: float = Field(..., gt=0)
    minus_candidate: bool = Field(..., description="True when D = ball \\ E")
    distance: float = Field(..., gt=0, description="certified dist(D, p)")
    enclosing_radius: float = Field(..., gt=0, description="D lies in B_{enclosing_radius}(p)")
    cone_margin: float = Field(..., lt=0, description="sup over D of (y-p)_N + (ell/4)|y'-p'|")
    volume: VolumeEstimate
    contact: Optional[Dict[str, Any]] = Field(None, description="ice-cream contact data for the c1 case")
    region: Any = Field(None, exclude=True, description="the GeomSet D itself")


def _cone_sup(center: np.ndarray, radius: float, p: np.ndarray, slope: float) -> float:
    """sup over B_radius(center) of (y - p)_N + slope |y' - p'|"""
    w = center - p
    return float(w[-1] + slope * np.linalg.norm(w[:-1]) + radius * np.sqrt(1.0 + slope * slope))


def _certify(case: WitnessCase, center: np.ndarray, radius: float, p: np.ndarray, ell: float,
             enclosing: float, floor: float) -> Dict[str, float]:
    """Check dist(D, p) > 0, D within B_enclosing(p) and D below the widened cone.

    ``floor`` is the margin the cone clause has to beat (0, or the -drop/8 of the
    boundary-hit construction).
    """
    gap = float(np.linalg.norm(center - p))
    distance = gap - radius
    margin = _cone_sup(center, radius, p, ell / 4.0)
    failures = []
    if not distance > 0.0:
        failures.append(f"dist(D, p) = {distance:.3e}")
    if gap + radius > enclosing * (1.0 + 1e-12):
        failures.append(f"D leaves B_{enclosing:.3e}(p)")
    if not margin < floor:
        failures.append(f"cone margin {margin:.3e} is not below {floor:.3e}")
    if failures:
        raise GeometryViolationError(f"witness ({case}) certification failed: " + "; ".join(failures))
    return {"distance": distance, "margin": margin}


def _positive_volume(case: WitnessCase, volume: VolumeEstimate) -> None:
    if not volume.value > 3.0 * volume.std_error:
        raise GeometryViolationError(
            f"witness ({case}) has no measurable volume outside the candidate "
            f"({volume.value:.3e} +/- {volume.std_error:.1e})")


class IceCreamContact(BaseModel):
    radius: float = Field(..., gt=0, description="r_j = sup of radii whose ice-cream cone fits in E")
    capped: bool = Field(..., description="True when the cone fits all the way to 4|p|")
    center: Optional[List[float]] = Field(None, description="ball centre x_j on the cone's outer sphere")
    ball_radius: Optional[float] = Field(None, description="(p - x_j)_N / 4")
    contact: Optional[List[float]] = Field(None, description="touching point q_j on the boundary of E")


def _fits(E: GeomSetBase, p: np.ndarray, ell: float, r: float, samples: int, seed: int, k: int):
    region = IceCreamCone(slope=ell, apex=p.tolist(), radius=r)
    pts, _ = sample_in_set(region, stream(seed, ICE_CREAM_TAG, k), samples)
    inside = np.asarray(E.contains(pts), dtype=bool)
    return bool(inside.all()), pts[~inside]


def ice_cream_radius(E: GeomSetBase, p, ell: float, samples: int = 2048, seed: int = 0,
                     steps: int = 24, directions: int = 4096) -> IceCreamContact:
    """Bisection for the largest r <= 4|p| whose ice-cream cone G_r (apex p, slope ell) fits in E.

    When the supremum is below 4|p| the contact is recovered from a sampled
    point of G_{r_hi} outside E: the admissible ball containing it most deeply
    gives the centre x_j, and bisection from x_j toward that point gives q_j.
    """
    p = np.asarray(p, dtype=float)
    cap = 4.0 * float(np.linalg.norm(p))
    ok, _ = _fits(E, p, ell, cap, samples, seed, 0)
    if ok:
        return IceCreamContact(radius=cap, capped=True)
    lo, hi, escaped = 0.0, cap, None
    for k in range(1, steps + 1):
        mid = 0.5 * (lo + hi)
        ok, outside = _fits(E, p, ell, mid, samples, seed, k)
        if ok:
            lo = mid
        else:
            hi, escaped = mid, outside
    if lo == 0.0:
        raise GeometryViolationError("no ice-cream cone below p fits inside the candidate")
    if escaped is None:
        _, escaped = _fits(E, p, ell, hi, samples, seed, steps + 1)
    y = escaped[0]

    dirs = uniform_directions(stream(seed, ICE_CREAM_TAG, 0, 1), directions, p.shape[0])
    dirs = dirs[dirs[:, -1] <= -ell * np.linalg.norm(dirs[:, :-1], axis=1)]
    centres = p + hi * dirs
    score = np.linalg.norm(y - centres, axis=1) - (p[-1] - centres[:, -1]) / 4.0
    best = dirs[int(np.argmin(score))]
    x = p + lo * best
    ball_radius = float((p[-1] - x[-1]) / 4.0)
    if not E.contains(x):
        raise GeometryViolationError("recovered ice-cream centre lies outside the candidate")
    q = bisect_boundary(E, x, y)
    logger.debug(f"ice-cream radius {lo:.4e} (cap {cap:.4e}), contact at {np.round(q, 6).tolist()}")
    return IceCreamContact(radius=lo, capped=False, center=x.tolist(), ball_radius=ball_radius,
                           contact=q.tolist())


def witness_region(case: str, p, ell: float, E: GeomSetBase, q=None, samples: int = 4096,
                   seed: int = 0, threads: int = 1) -> WitnessRegion:
    """Build and certify D for the cone dichotomy case (or the C^1 ice-cream construction)"""
    p = np.asarray(p, dtype=float)
    dim = p.shape[0]
    norm = float(np.linalg.norm(p))
    if case == "cone-empty":
        center = p.copy()
        center[-1] -= 0.5 * norm
        radius = norm / 8.0
        ball = Ball(center=center.tolist(), radius=radius)
        info = _certify(case, center, radius, p, ell, norm, 0.0)
        if not _cone_sup(center, radius, p, ell) < 0.0:
            raise GeometryViolationError("witness (cone-empty) is not inside C + p")
        hits = mc_volume(E, ball, samples, derive_seed(seed, WITNESS_TAG), threads)
        if hits.value > 0.0:
            raise GeometryViolationError("witness (cone-empty) meets the candidate")
        exact = ball_volume(dim) * radius ** dim
        volume = VolumeEstimate(value=exact, std_error=0.0, samples=samples, seed=hits.seed)
        return WitnessRegion(case=case, center=center.tolist(), radius=radius, minus_candidate=False,
                             distance=info["distance"], enclosing_radius=norm, cone_margin=info["margin"],
                             volume=volume, region=ball)

    contact = None
    if case == "cone-hits-boundary":
        if q is None:
            raise DomainError("the boundary-hit witness needs the located point q")
        center = np.asarray(q, dtype=float)
        drop = float(p[-1] - center[-1])
        if not drop > 0.0:
            raise GeometryViolationError(f"boundary hit is not below p (drop {drop:.3e})")
        radius = 0.5 * drop
        info = _certify(case, center, radius, p, ell, 4.0 * drop / ell, -drop / 8.0)
    elif case == "c1":
        found = ice_cream_radius(E, p, ell, samples=max(512, samples // 2), seed=seed)
        if found.capped:
            raise GeometryViolationError("ice-cream cone fits up to 4|p|; no contact to build a witness from")
        x = np.asarray(found.center)
        center = np.asarray(found.contact)
        drop = float(p[-1] - x[-1])
        radius = found.ball_radius
        info = _certify(case, center, radius, p, ell, 4.0 * drop / ell, 0.0)
        contact = found.model_dump()
    else:
        raise DomainError(f"no witness construction for case '{case}'")

    ball = Ball(center=center.tolist(), radius=radius)
    region = ball - E
    volume = mc_volume(~E, ball, samples, derive_seed(seed, WITNESS_TAG), threads)
    _positive_volume(case, volume)
    return WitnessRegion(case=case, center=center.tolist(), radius=radius, minus_candidate=True,
                         distance=info["distance"], enclosing_radius=float(np.linalg.norm(center - p) + radius),
                         cone_margin=info["margin"], volume=volume, contact=contact, region=region)


class RepairVerdict(BaseModel):
    """H_{F_eps \\ D}(p) = H_{F_eps}(p) + 2 int_D |y - p|^{-(N+s)} dy"""
    barrier: CurvatureResult
    correction: Optional[PVResult] = None
    value: float
    error_estimate: float = Field(..., ge=0)
    verdict: Verdict
    scaled_correction: Optional[float] = Field(
        None, description="int_D |y - p|^{-(N+s)} dy * |p|^(s+1-alpha), the empirical c2")


def repaired_supersolution_check(spec: BarrierSpec, D: Union[GeomSetBase, WitnessRegion, None], p,
                                 cfg: Optional[QuadConfig] = None) -> RepairVerdict:
    """Sign of the curvature of F_eps minus D at the touching point, beyond 3x the combined error"""
    cfg = cfg or QuadConfig()
    p = np.asarray(p, dtype=float)
    region = D.region if isinstance(D, WitnessRegion) else D
    barrier = barrier_curvature(spec, float(np.linalg.norm(p[:-1])), cfg)
    value, error = barrier.value, barrier.error_estimate
    correction = scaled = None
    if region is not None and not region.is_empty:
        correction = correction_integral(region, p, spec.params, cfg)
        value += 2.0 * correction.value
        error += 2.0 * correction.error_estimate
        scaled = correction.value * float(np.linalg.norm(p)) ** (spec.s + 1.0 - spec.alpha)
    if value - 3.0 * error > 0.0:
        verdict = "positive"
    elif value + 3.0 * error < 0.0:
        verdict = "negative"
    else:
        verdict = "indeterminate"
    return RepairVerdict(barrier=barrier, correction=correction, value=value, error_estimate=error,
                         verdict=verdict, scaled_correction=scaled)
