"""Evaluation paths for H_{s,E}(x).

* graph formula: H = 2 P.V. int G_s((u(x') - u(y')) / |x' - y'|) |x' - y'|^{-n-s} dy'
  for subgraphs, through the deterministic principal-value engine;
* radial: closed forms for balls and the reduced barrier integral;
* indicator PV: antithetic Monte-Carlo on dyadic shells about x of
  (chi_{E^c} - chi_E)(y) |x - y|^{-N-s}, with the far part taken from the
  caller's FarField registration.
"""
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy import special

from barrier.profile import barrier_curvature
from curvature.models import CurvatureResult
from geometry.farfield import FarField
from geometry.profiles import ProfileBase
from geometry.sampling import band_probability, directions_in_band, shell_radii
from geometry.sets import (Ball, BarrierSet, ComplementSet, GeomSetBase, HalfSpace, Scale, Subgraph,
                           Translate, snap_to_boundary)
from kernel_quadrature.engine import QuadConfig, pv_integrate_nd
from kernel_quadrature.kernel import FracParams, eval_G
from kernel_quadrature.sphere import sphere_area
from utils.errors import DomainError
from utils.logger import logger
from utils.parallel import ordered_map
from utils.rng import stream, uniform_directions

# stream tags keep the indicator and excision samplers independent
INDICATOR_TAG = 11
EXCISION_TAG = 12


def curvature_subgraph(profile: ProfileBase, xp, params: FracParams, cfg: Optional[QuadConfig] = None,
                       subtract_linear: bool = False) -> CurvatureResult:
    """Curvature of {x_N < u(x')} at (x', u(x')) by the graph formula.

    With ``subtract_linear`` the odd term G_s(-grad u(x') . w) |y' - x'|^{-n-s}
    is removed inside the unit ball about x'; its principal value vanishes, and
    the remaining integrand is bounded near x'.
    """
    cfg = cfg or QuadConfig()
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    if xp.shape[0] != params.n:
        raise DomainError(f"x' has dimension {xp.shape[0]}, expected {params.n}")
    gamma = profile.growth
    if gamma is None:
        raise DomainError("profile has no registered growth exponent; the tail cannot be bounded")
    if gamma > 1.0:
        raise DomainError(f"profile grows like |x'|^{gamma:g}; at most linear growth is supported")
    singular = [np.atleast_1d(np.asarray(p, dtype=float)) for p in profile.singular_points()]
    if any(np.allclose(p, xp, rtol=0.0, atol=1e-12) for p in singular):
        raise DomainError(f"profile is not twice differentiable at x' = {xp.tolist()}")

    u0 = float(profile.value(xp[None, :])[0])
    grad = np.asarray(profile.gradient(xp[None, :])[0], dtype=float)
    power = params.n + params.s

    def integrand(h: np.ndarray) -> np.ndarray:
        # h = y' - x'
        dist = np.linalg.norm(h, axis=1)
        out = eval_G(params, -profile.increment(xp, h) / dist) * dist ** (-power)
        if subtract_linear:
            near = dist < 1.0
            if near.any():
                lin = -(h[near] @ grad) / dist[near]
                out[near] -= eval_G(params, lin) * dist[near] ** (-power)
        return out

    result = pv_integrate_nd(integrand, xp, cfg, decay_exponent=1.0 + params.s - gamma,
                             singular_points=singular, radial_breakpoints=(1.0,) if subtract_linear else (),
                             label=f"graph of {profile.kind}", local=True,
                             offset_scale=None if profile.exact_increment else max(float(np.max(np.abs(xp))), abs(u0), 1.0))
    point = np.concatenate([xp, [u0]])
    return CurvatureResult.from_pv(result, 2.0, "graph-formula", point, config=cfg.model_dump())


@lru_cache(maxsize=64)
def _unit_ball_curvature(n: int, s: float) -> float:
    # (2^{-s}/s) |S^{n-1}| B(n/2, (1-s)/2)
    return float(2.0 ** (-s) / s * sphere_area(n) * special.beta(0.5 * n, 0.5 * (1.0 - s)))


def curvature_ball(params: FracParams, r: float, inside: bool = True, point=None) -> CurvatureResult:
    """H at any boundary point of B_r (``inside``) or of its complement"""
    if not r > 0:
        raise DomainError(f"ball radius must be positive, got {r}")
    value = r ** (-params.s) * _unit_ball_curvature(params.n, params.s)
    if not inside:
        value = -value
    if point is None:
        point = np.zeros(params.n + 1)
    eps = np.finfo(float).eps
    return CurvatureResult(value=value, error_estimate=8.0 * eps * abs(value), method="radial",
                           point=[float(c) for c in np.asarray(point)],
                           diagnostics={"radius": float(r), "inside": bool(inside)})


def _pair_values(geom: GeomSetBase, x: np.ndarray, rho: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Average of (chi_{E^c} - chi_E) over the antipodal pair x +- rho w"""
    step = rho[:, None] * omega
    plus = geom.contains(x + step)
    minus = geom.contains(x - step)
    return 0.5 * ((1.0 - 2.0 * plus) + (1.0 - 2.0 * minus))


def _shell_term(geom: GeomSetBase, x: np.ndarray, normal: Optional[np.ndarray], params: FracParams,
                cfg: QuadConfig, inner: float, index: int, tag: int) -> Tuple[float, float]:
    """Mean and variance of the shell [inner, 2 inner] about x"""
    rng = stream(cfg.seed, tag, index)
    dim = params.n + 1
    count = cfg.samples
    rho, weight = shell_radii(rng, count, inner, params.s)
    scale = weight * sphere_area(dim)
    width = 1.0 if normal is None else min(1.0, cfg.band_factor * 2.0 * inner)
    if width >= 1.0:
        values = _pair_values(geom, x, rho, uniform_directions(rng, count, dim))
        return scale * float(values.mean()), scale ** 2 * float(values.var(ddof=1)) / count
    # 3/4 of the samples in the band |w . nu| < width, where the pair sum lives
    p = band_probability(dim, width)
    m_in = (3 * count) // 4
    m_out = count - m_in
    v_in = _pair_values(geom, x, rho[:m_in], directions_in_band(rng, m_in, normal, width, True))
    v_out = _pair_values(geom, x, rho[m_in:], directions_in_band(rng, m_out, normal, width, False))
    mean = p * v_in.mean() + (1.0 - p) * v_out.mean()
    var = p * p * v_in.var(ddof=1) / m_in + (1.0 - p) ** 2 * v_out.var(ddof=1) / m_out
    return scale * float(mean), scale ** 2 * float(var)


def shell_terms(geom: GeomSetBase, x: np.ndarray, normal: Optional[np.ndarray], params: FracParams,
                cfg: QuadConfig, r_outer: float, tag: int) -> List[Tuple[float, float]]:
    """Shell estimates from r_outer down to about excision_start * r_outer, outermost first"""
    count = max(3, int(np.ceil(np.log2(1.0 / cfg.excision_start))))
    inners = [r_outer * 2.0 ** (-(k + 1)) for k in range(count)]
    return ordered_map(lambda job: _shell_term(geom, x, normal, params, cfg, job[1], job[0], tag),
                       list(enumerate(inners)), cfg.threads)


def core_remainder(terms: List[Tuple[float, float]], params: FracParams) -> Tuple[float, float]:
    """Geometric extrapolation below the innermost shell; shells shrink by 2^{-(1-s)} at a C^2 point"""
    q = 2.0 ** (-(1.0 - params.s))
    last, last_var = terms[-1]
    prev, _ = terms[-2]
    remainder = last * q / (1.0 - q)
    previous = prev * q * q / (1.0 - q)
    error = abs(remainder - previous) + 2.0 * np.sqrt(last_var) * q / (1.0 - q)
    return remainder, float(error)


def curvature_indicator(geom: GeomSetBase, x, params: FracParams, cfg: Optional[QuadConfig] = None,
                        far_field: Optional[FarField] = None) -> CurvatureResult:
    """PV of (chi_{E^c} - chi_E) |x - y|^{-N-s} by shell sampling plus the far-field registration"""
    cfg = cfg or QuadConfig()
    x = np.asarray(x, dtype=float)
    if x.shape[0] != params.n + 1:
        raise DomainError(f"point lives in R^{x.shape[0]}, expected R^{params.n + 1}")
    if far_field is None:
        far_field = default_far_field(geom)
    if far_field is None:
        raise DomainError(f"no far-field registration for {type(geom).__name__}; the tail is not controllable")
    point, normal = snap_to_boundary(geom, x)
    far_value, far_error, r_outer = far_field.contribution(point, params)

    terms = shell_terms(geom, point, normal, params, cfg, r_outer, INDICATOR_TAG)
    remainder, core_error = core_remainder(terms, params)
    body = float(sum(m for m, _ in terms))
    sigma = float(np.sqrt(sum(v for _, v in terms)))
    value = body + remainder + far_value
    error = 2.0 * sigma + core_error + far_error
    logger.debug(f"indicator curvature at {point.tolist()}: shells={body:.6g} core={remainder:.3g} "
                 f"far={far_value:.6g} +- {error:.3g}")
    return CurvatureResult(value=value, error_estimate=error, method="indicator-PV",
                           point=[float(c) for c in point], evaluations=2 * len(terms) * cfg.samples,
                           seed=cfg.seed, config=cfg.model_dump(),
                           diagnostics={"shells": [m for m, _ in terms], "core_remainder": remainder,
                                        "far_field": far_value, "far_field_error": far_error,
                                        "outer_radius": r_outer, "sigma": sigma})


def default_far_field(geom: GeomSetBase) -> Optional[FarField]:
    """Structural registration for half-spaces and bounded sets; None otherwise"""
    if isinstance(geom, HalfSpace):
        dim = len(geom.normal)
        return FarField.halfspace(geom.normal, geom.offset, np.zeros(dim), 1.0)
    box = geom.bounding_box()
    if box is None:
        return None
    lo, hi = box
    center = 0.5 * (lo + hi)
    return FarField.bounded(center, float(np.linalg.norm(hi - lo)) * 0.5 + 1e-12)


def _normalize(geom: GeomSetBase, x: np.ndarray, far_field: Optional[FarField]):
    """Strip Translate/Scale layers around primitives that have closed forms.

    Returns (primitive, local point, local far field, a, b) with x = a * local + b.
    """
    a, b = 1.0, np.zeros_like(x)
    while isinstance(geom, (Translate, Scale)):
        core = geom.inner
        while isinstance(core, (Translate, Scale)):
            core = core.inner
        if not isinstance(core, (Ball, BarrierSet, HalfSpace, Subgraph)):
            break
        if isinstance(geom, Translate):
            v = np.asarray(geom.vector, dtype=float)
            x = x - v
            b = b + a * v
            far_field = far_field.translated(-v) if far_field is not None else None
        else:
            f = float(geom.factor)
            x = x / f
            a *= f
            far_field = far_field.scaled(1.0 / f) if far_field is not None else None
        geom = geom.inner
    return geom, x, far_field, a, b


def evaluate_curvature(geom: GeomSetBase, x, params: FracParams, cfg: Optional[QuadConfig] = None,
                       far_field: Optional[FarField] = None, subtract_linear: bool = False) -> CurvatureResult:
    """Dispatch to the most accurate path available for ``geom``"""
    cfg = cfg or QuadConfig()
    x = np.asarray(x, dtype=float)
    geom, local, far_field, a, b = _normalize(geom, x, far_field)

    if isinstance(geom, ComplementSet):
        inner_ff = far_field.complement() if far_field is not None else None
        result = evaluate_curvature(geom.inner, local, params, cfg, inner_ff, subtract_linear).negated()
    elif isinstance(geom, BarrierSet):
        if geom.spec.params != params:
            raise DomainError(f"barrier has (n, s) = ({geom.spec.n}, {geom.spec.s}), "
                              f"evaluation asked for ({params.n}, {params.s})")
        point, _ = snap_to_boundary(geom, local)
        r = float(np.linalg.norm(point[:-1]))
        result = barrier_curvature(geom.spec, r, cfg, subtract_linear=subtract_linear)
        result = result.rescaled(1.0, point)
    elif isinstance(geom, Subgraph):
        point, _ = snap_to_boundary(geom, local)
        result = curvature_subgraph(geom.profile, point[:-1], params, cfg, subtract_linear)
    elif isinstance(geom, Ball):
        point, _ = snap_to_boundary(geom, local)
        result = curvature_ball(params, geom.radius, inside=True, point=point)
    else:
        result = curvature_indicator(geom, local, params, cfg, far_field)

    if a != 1.0 or np.any(b != 0.0):
        # H_{aE + b}(a x + b) = a^{-s} H_E(x)
        result = result.rescaled(a ** (-params.s), a * np.asarray(result.point) + b)
    return result
