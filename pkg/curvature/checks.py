"""Structural identities of the curvature: scaling, translation, excision order"""
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate

from curvature.evaluator import EXCISION_TAG, core_remainder, evaluate_curvature, shell_terms
from curvature.models import CurvatureResult
from geometry.farfield import FarField
from geometry.sets import GeomSetBase, snap_to_boundary
from kernel_quadrature.engine import PVResult, QuadConfig
from kernel_quadrature.kernel import FracParams
from kernel_quadrature.sphere import sphere_area
from utils.errors import DomainError
from utils.logger import logger


class IdentityCheck(BaseModel):
    name: str
    lhs: float
    rhs: float
    lhs_error: float = Field(..., ge=0)
    rhs_error: float = Field(..., ge=0)
    passed: bool


def _identity(name: str, lhs: float, lhs_err: float, rhs: float, rhs_err: float, factor: float) -> IdentityCheck:
    passed = abs(lhs - rhs) <= factor * (lhs_err + rhs_err) or lhs == rhs
    return IdentityCheck(name=name, lhs=lhs, rhs=rhs, lhs_error=lhs_err, rhs_error=rhs_err, passed=passed)


class ScalingReport(BaseModel):
    factor: float
    vector: List[float]
    base: CurvatureResult
    scaled: CurvatureResult
    translated: CurvatureResult
    checks: List[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def scaling_translation_check(geom: GeomSetBase, x, params: FracParams, cfg: Optional[QuadConfig] = None,
                              factor: float = 1.0, vector: Optional[Sequence[float]] = None,
                              far_field: Optional[FarField] = None, tolerance: float = 3.0) -> ScalingReport:
    """Both sides of H_{eps E}(eps x) eps^s = H_E(x) and H_{E+v}(x+v) = H_E(x)"""
    if not factor > 0:
        raise DomainError(f"scaling factor must be positive, got {factor}")
    cfg = cfg or QuadConfig()
    x = np.asarray(x, dtype=float)
    v = np.zeros_like(x) if vector is None else np.asarray(vector, dtype=float)
    base = evaluate_curvature(geom, x, params, cfg, far_field)

    if factor == 1.0:
        scaled = base
    else:
        ff = far_field.scaled(factor) if far_field is not None else None
        scaled = evaluate_curvature(geom.scaled(factor), factor * x, params, cfg, ff)
    if not np.any(v):
        translated = base
    else:
        ff = far_field.translated(v) if far_field is not None else None
        translated = evaluate_curvature(geom.translated(v), x + v, params, cfg, ff)

    weight = factor ** params.s
    checks = [
        _identity("scaling", weight * scaled.value, weight * scaled.error_estimate,
                  base.value, base.error_estimate, tolerance),
        _identity("translation", translated.value, translated.error_estimate,
                  base.value, base.error_estimate, tolerance),
    ]
    return ScalingReport(factor=factor, vector=[float(c) for c in v], base=base, scaled=scaled,
                         translated=translated, checks=checks)


def excision_contribution(geom: GeomSetBase, x, eps: float, params: FracParams,
                          cfg: Optional[QuadConfig] = None) -> PVResult:
    """P.V. of (chi_{E^c} - chi_E) |x - y|^{-N-s} over B_eps(x); of order eps^{1-s} at a C^2 point"""
    if not eps > 0:
        raise DomainError(f"excision radius must be positive, got {eps}")
    cfg = cfg or QuadConfig()
    point, normal = snap_to_boundary(geom, np.asarray(x, dtype=float))
    terms = shell_terms(geom, point, normal, params, cfg, eps, EXCISION_TAG)
    remainder, core_error = core_remainder(terms, params)
    sigma = float(np.sqrt(sum(v for _, v in terms)))
    value = float(sum(m for m, _ in terms)) + remainder
    return PVResult(value=value, error_estimate=2.0 * sigma + core_error,
                    evaluations=2 * len(terms) * cfg.samples, truncation_radius=eps,
                    diagnostics={"core_remainder": remainder, "sigma": sigma, "seed": cfg.seed})


def ball_excision_exact(params: FracParams, eps: float) -> float:
    """Excision contribution of B_1(e_N) at the origin.

    (2/s) int_0^{eps/2} ((2t)^{-s} - eps^{-s}) |S^{N-2}| (1 - t^2)^{(N-3)/2} dt
    """
    if not 0.0 < eps < 2.0:
        raise DomainError(f"excision radius must lie in (0, 2), got {eps}")
    dim = params.n + 1
    s = params.s
    upper = 0.5 * eps
    area = sphere_area(dim - 1)

    def density(t: float) -> float:
        return area * (1.0 - t * t) ** (0.5 * (dim - 3))

    singular, _ = integrate.quad(density, 0.0, upper, weight="alg", wvar=(-s, 0.0))
    regular, _ = integrate.quad(density, 0.0, upper, epsabs=0.0, epsrel=1e-13)
    return float(2.0 / s * (2.0 ** (-s) * singular - eps ** (-s) * regular))


class OrderFit(BaseModel):
    radii: List[float]
    values: List[float]
    errors: List[float]
    slope: float = Field(..., description="fitted exponent of |contribution| against eps")
    expected: float = Field(..., description="1 - s")


def excision_order_fit(geom: GeomSetBase, x, eps_grid: Sequence[float], params: FracParams,
                       cfg: Optional[QuadConfig] = None) -> OrderFit:
    """Log-log slope of the excision contribution over ``eps_grid``"""
    radii = sorted(float(e) for e in eps_grid)
    if len(radii) < 2:
        raise DomainError("order fit needs at least two radii")
    parts = [excision_contribution(geom, x, e, params, cfg) for e in radii]
    values = np.array([p.value for p in parts])
    if np.any(values == 0.0):
        raise DomainError("excision contribution vanished on the grid; no order can be fitted")
    slope = float(np.polyfit(np.log(radii), np.log(np.abs(values)), 1)[0])
    logger.info(f"excision order: slope {slope:.4f}, expected {1.0 - params.s:.4f}")
    return OrderFit(radii=radii, values=values.tolist(), errors=[p.error_estimate for p in parts],
                    slope=slope, expected=1.0 - params.s)
