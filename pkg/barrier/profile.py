"""Curvature of the barrier F_eps = {x_N < eps^(1-alpha) |x'|^alpha} and its decay law.

At |x'| = r with rho = r / eps the change of variables y' = r z gives

    H(r) = eps^{-s} 2 rho^{-s} P.V. int G_s(rho^{alpha-1} (1 - |z|^alpha) / |e_1 - z|) |e_1 - z|^{-n-s} dz

and splitting G_s = id + G~_s,

    H(r) = eps^{-s} (2 beta rho^{alpha-1-s} + 2 rho^{-s} int G~_s(...) |e_1 - z|^{-n-s} dz).
"""
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from barrier.constants import beta_constant, one_minus_power
from barrier.spec import BarrierSpec
from curvature.models import CurvatureResult
from kernel_quadrature.engine import PVResult, QuadConfig, pv_integrate_nd
from kernel_quadrature.kernel import eval_G, eval_G_tilde
from utils.errors import DomainError
from utils.logger import logger
from utils.parallel import ordered_map

BarrierMethod = Literal["direct", "decomposed"]

# ratio of the linear-part subtraction radius to |e_1 - z|
_SUBTRACTION_RADIUS = 0.5


def _check_radius(spec: BarrierSpec, r: float) -> None:
    floor = spec.admissible_radius
    if not r >= floor * (1.0 - 1e-12):
        raise DomainError(f"radius {r:.6g} is below the admissible floor 2^(-1/(2 alpha)) eps = {floor:.6g}")


def _e1(n: int) -> np.ndarray:
    e1 = np.zeros(n)
    e1[0] = 1.0
    return e1


def _reduced_argument(spec: BarrierSpec, rho: float, h: np.ndarray):
    # h = z - e_1
    dist = np.linalg.norm(h, axis=1)
    t = rho ** (spec.alpha - 1.0) * one_minus_power(h, spec.alpha) / dist
    return t, dist


def _reduced_pv(spec: BarrierSpec, r: float, cfg: QuadConfig, subtract_linear: bool) -> PVResult:
    rho = r / spec.eps
    params = spec.params
    power = spec.n + spec.s
    slope = spec.alpha * rho ** (spec.alpha - 1.0)

    def integrand(h: np.ndarray) -> np.ndarray:
        t, dist = _reduced_argument(spec, rho, h)
        out = eval_G(params, t) * dist ** (-power)
        if subtract_linear:
            near = dist < _SUBTRACTION_RADIUS
            if near.any():
                lin = -slope * h[near, 0] / dist[near]
                out[near] -= eval_G(params, lin) * dist[near] ** (-power)
        return out

    return pv_integrate_nd(integrand, _e1(spec.n), cfg, decay_exponent=spec.tail_exponent,
                           singular_points=[np.zeros(spec.n)],
                           radial_breakpoints=(_SUBTRACTION_RADIUS,) if subtract_linear else (),
                           label=f"barrier r={r:.4g}", local=True)


def barrier_residual(spec: BarrierSpec, r: float, cfg: Optional[QuadConfig] = None) -> PVResult:
    """eps^{-s} 2 rho^{-s} int G~_s(...) |e_1 - z|^{-n-s} dz, of order r^{3(alpha-1)-s}"""
    cfg = cfg or QuadConfig()
    _check_radius(spec, r)
    rho = r / spec.eps
    params = spec.params
    power = spec.n + spec.s

    def integrand(h: np.ndarray) -> np.ndarray:
        t, dist = _reduced_argument(spec, rho, h)
        return eval_G_tilde(params, t) * dist ** (-power)

    res = pv_integrate_nd(integrand, _e1(spec.n), cfg,
                          decay_exponent=3.0 * (1.0 - spec.alpha) + spec.s,
                          singular_points=[np.zeros(spec.n)], label=f"barrier residual r={r:.4g}",
                          local=True)
    return res.scaled(spec.eps ** (-spec.s) * 2.0 * rho ** (-spec.s))


def _beta(spec: BarrierSpec, cfg: QuadConfig) -> PVResult:
    if spec.beta is not None:
        return PVResult(value=spec.beta, error_estimate=0.0, truncation_radius=1.0)
    return beta_constant(spec.n, spec.s, spec.alpha, cfg)


def barrier_curvature(spec: BarrierSpec, r: float, cfg: Optional[QuadConfig] = None,
                      method: BarrierMethod = "direct", subtract_linear: bool = False) -> CurvatureResult:
    """H_{s,F_eps} at the boundary point with |x'| = r"""
    cfg = cfg or QuadConfig()
    _check_radius(spec, r)
    rho = r / spec.eps
    point = spec.boundary_point(r)
    if method == "direct":
        res = _reduced_pv(spec, r, cfg, subtract_linear)
        factor = spec.eps ** (-spec.s) * 2.0 * rho ** (-spec.s)
        result = CurvatureResult.from_pv(res, factor, "radial", point, config=cfg.model_dump())
    elif method == "decomposed":
        beta = _beta(spec, cfg)
        lead = spec.eps ** (-spec.s) * 2.0 * rho ** (spec.alpha - 1.0 - spec.s)
        residual = barrier_residual(spec, r, cfg)
        combined = PVResult.linear_combination([(lead, beta), (1.0, residual)],
                                               beta=beta.value, leading=lead * beta.value,
                                               residual=residual.value)
        result = CurvatureResult.from_pv(combined, 1.0, "radial", point, config=cfg.model_dump())
    else:
        raise DomainError(f"unknown barrier method '{method}'")
    result.diagnostics.update(r=float(r), eps=spec.eps, alpha=spec.alpha, barrier_method=method)
    return result


class BarrierProfile(BaseModel):
    """H(r) on a radius grid with the fitted decay exponents"""
    spec: BarrierSpec
    radii: List[float] = Field(..., min_length=2)
    curvatures: List[float]
    errors: List[float]
    residuals: List[float]
    residual_errors: List[float]
    beta: float = Field(..., description="beta_{n,s,alpha}")
    beta_error: float = Field(..., ge=0)
    fitted_exponent: float = Field(..., description="slope of log|H| against log r")
    residual_exponent: float = Field(..., description="slope of log|H - 2 beta r^(alpha-1-s)|")
    envelope_constant: float = Field(..., ge=0, description="max |H| |x|^(s+1-alpha) over the grid")

    @model_validator(mode="after")
    def _check_grid(self):
        r = np.asarray(self.radii)
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")
        if r[0] < self.spec.admissible_radius * (1.0 - 1e-12):
            raise ValueError("radii must not go below the admissible floor")
        size = len(self.radii)
        if any(len(v) != size for v in (self.curvatures, self.errors, self.residuals, self.residual_errors)):
            raise ValueError("profile columns must have matching lengths")
        return self

    @property
    def expected_exponent(self) -> float:
        return self.spec.alpha - 1.0 - self.spec.s

    @property
    def expected_residual_exponent(self) -> float:
        return 3.0 * (self.spec.alpha - 1.0) - self.spec.s


def _slope(radii: np.ndarray, values: np.ndarray) -> float:
    keep = np.abs(values) > 0
    if keep.sum() < 2:
        raise DomainError("too few non-zero values for a log-log fit")
    return float(np.polyfit(np.log(radii[keep]), np.log(np.abs(values[keep])), 1)[0])


def _point_norms(spec: BarrierSpec, radii: np.ndarray) -> np.ndarray:
    return np.hypot(radii, spec.coefficient * radii ** spec.alpha)


def envelope_constant(profile: BarrierProfile) -> float:
    """Empirical C0 = max |H| |x|^(s+1-alpha)"""
    spec = profile.spec
    norms = _point_norms(spec, np.asarray(profile.radii))
    return float(np.max(np.abs(profile.curvatures) * norms ** (spec.s + 1.0 - spec.alpha)))


def decay_fit(spec: BarrierSpec, r_grid: Sequence[float], cfg: Optional[QuadConfig] = None,
              method: BarrierMethod = "direct") -> BarrierProfile:
    """Evaluate H and the G~ residual on ``r_grid`` and fit both power laws"""
    cfg = cfg or QuadConfig()
    radii = np.unique(np.asarray(r_grid, dtype=float))
    if radii.size < 2 or np.log10(radii[-1] / radii[0]) < 2.0 - 1e-12:
        raise DomainError("decay fit needs a radius grid spanning at least two decades")
    for r in radii:
        _check_radius(spec, float(r))
    beta = _beta(spec, cfg)
    spec_b = spec.with_beta(beta.value)

    def point(r: float):
        h = barrier_curvature(spec_b, r, cfg, method=method)
        res = barrier_residual(spec_b, r, cfg)
        logger.info(f"barrier profile r={r:.4g}: H={h.value:.6e} +- {h.error_estimate:.2e}")
        return h, res

    rows = ordered_map(point, [float(r) for r in radii], cfg.threads)
    values = np.array([h.value for h, _ in rows])
    residuals = np.array([res.value for _, res in rows])
    profile = BarrierProfile(
        spec=spec_b, radii=radii.tolist(), curvatures=values.tolist(),
        errors=[h.error_estimate for h, _ in rows], residuals=residuals.tolist(),
        residual_errors=[res.error_estimate for _, res in rows], beta=beta.value,
        beta_error=beta.error_estimate, fitted_exponent=_slope(radii, values),
        residual_exponent=_slope(radii, residuals), envelope_constant=0.0)
    return profile.model_copy(update={"envelope_constant": envelope_constant(profile)})


class EnvelopeRow(BaseModel):
    r: float
    value: float
    error: float = Field(..., ge=0)
    bound: float
    ok: bool


class EnvelopeReport(BaseModel):
    eps: float
    c0: float
    rows: List[EnvelopeRow]

    @property
    def passed(self) -> bool:
        return all(row.ok for row in self.rows)


def envelope_check(spec: BarrierSpec, radii: Sequence[float], c0: float,
                   cfg: Optional[QuadConfig] = None) -> EnvelopeReport:
    """|H_{F_eps}(x)| <= C0 eps^(1-alpha) / |x|^(s+1-alpha) on the given radii"""
    cfg = cfg or QuadConfig()
    radii = [float(r) for r in radii]
    results = ordered_map(lambda r: barrier_curvature(spec, r, cfg), radii, cfg.threads)
    norms = _point_norms(spec, np.asarray(radii))
    rows = []
    for r, res, norm in zip(radii, results, norms):
        bound = c0 * spec.eps ** (1.0 - spec.alpha) / norm ** (spec.s + 1.0 - spec.alpha)
        rows.append(EnvelopeRow(r=r, value=res.value, error=res.error_estimate, bound=float(bound),
                                ok=abs(res.value) <= bound + 3.0 * res.error_estimate))
    return EnvelopeReport(eps=spec.eps, c0=c0, rows=rows)
