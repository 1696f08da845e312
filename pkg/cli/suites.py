"""Invariant suites behind `fracmin check`, each at a size that runs in seconds to minutes"""
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

import config
from barrier.constants import beta_constant, beta_sweep
from curvature.checks import scaling_translation_check
from curvature.correction import correction_integral
from curvature.evaluator import curvature_ball, curvature_indicator, curvature_subgraph
from geometry.profiles import AffineProfile
from geometry.sets import Ball, HalfSpace
from kernel_quadrature.engine import QuadConfig
from kernel_quadrature.kernel import FracParams, eval_G, eval_G_tilde, g_tilde_lipschitz_bound
from utils.errors import DomainError, FracminError
from utils.logger import logger
from utils.rng import stream

SUITE_TAG = 53
FLAT_TOLERANCE = 1e-6
DIAGONAL_TOLERANCE = 1e-6


class SuiteResult(BaseModel):
    name: str
    passed: bool
    cases: int = Field(..., ge=0)
    failures: int = Field(..., ge=0)
    details: List[Dict] = Field(default_factory=list)


def kernel_lipschitz(cfg: QuadConfig, pairs: int = 10_000) -> SuiteResult:
    """|G~(a) - G~(b)| <= ((n+2)/2) max(a^2, b^2) |a - b| on random pairs"""
    details, failures, cases = [], 0, 0
    for n in (1, 2, 3):
        for s in (0.3, 0.5, 0.7):
            params = FracParams(n=n, s=s)
            rng = stream(cfg.seed, SUITE_TAG, n, int(round(100 * s)))
            ab = rng.uniform(-3.0, 3.0, size=(2, pairs))
            lhs = np.abs(eval_G_tilde(params, ab[0]) - eval_G_tilde(params, ab[1]))
            rhs = g_tilde_lipschitz_bound(params, ab[0], ab[1])
            bad = int(np.count_nonzero(lhs > rhs * (1.0 + 1e-9) + 1e-14))
            failures += bad
            cases += pairs
            details.append({"n": n, "s": s, "violations": bad})
    return SuiteResult(name="kernel-lipschitz", passed=failures == 0, cases=cases, failures=failures, details=details)


def oddness(cfg: QuadConfig, points: int = 2_000) -> SuiteResult:
    """G and G~ are odd"""
    details, failures = [], 0
    t = stream(cfg.seed, SUITE_TAG, 99).uniform(0.0, 5.0, size=points)
    for n in (1, 2, 3):
        params = FracParams(n=n, s=0.5)
        g = eval_G(params, t)
        gt = eval_G_tilde(params, t)
        err_g = float(np.max(np.abs(g + eval_G(params, -t)) / (1.0 + np.abs(g))))
        err_t = float(np.max(np.abs(gt + eval_G_tilde(params, -t)) / (1.0 + np.abs(gt))))
        bad = int(err_g > 1e-12) + int(err_t > 1e-12)
        failures += bad
        details.append({"n": n, "G": err_g, "G_tilde": err_t})
    return SuiteResult(name="oddness", passed=failures == 0, cases=2 * 3, failures=failures, details=details)


def trichotomy(cfg: QuadConfig) -> SuiteResult:
    """sign(beta_{1,s,alpha}) = sign(s - alpha) off the diagonal; beta = 0 on it"""
    s_values = (0.3, 0.5, 0.7, 0.9)
    alphas = [a for a in np.linspace(0.05, 0.95, 10)]
    frame = beta_sweep(s_values, alphas, n=1, cfg=cfg)
    off = frame[np.abs(frame["s"] - frame["alpha"]) > 0.01]
    bad_off = off[~(off["resolved"] & off["agrees"])]
    details = [{"s": r.s, "alpha": r.alpha, "beta": r.beta, "err": r.err} for r in bad_off.itertuples()]
    failures = len(bad_off)
    for s in s_values:
        diag = beta_constant(1, s, s, cfg)
        if abs(diag.value) > DIAGONAL_TOLERANCE:
            failures += 1
            details.append({"s": s, "alpha": s, "beta": diag.value})
    return SuiteResult(name="trichotomy", passed=failures == 0, cases=len(off) + len(s_values),
                       failures=failures, details=details)


def _normals(dim: int) -> List[np.ndarray]:
    tilted = np.ones(dim) / np.sqrt(dim)
    e_n = np.zeros(dim)
    e_n[-1] = 1.0
    e_1 = np.zeros(dim)
    e_1[0] = 1.0
    return [e_n, tilted, e_1]


def flat_zero(cfg: QuadConfig) -> SuiteResult:
    """Half-spaces have zero curvature through both evaluation paths"""
    details, failures, cases = [], 0, 0
    for n, s in ((1, 0.5), (2, 0.3), (2, 0.7)):
        params = FracParams(n=n, s=s)
        dim = n + 1
        for normal in _normals(dim):
            x = np.zeros(dim)
            indicator = curvature_indicator(HalfSpace(normal=normal.tolist(), offset=0.0), x, params, cfg)
            values = {"indicator": indicator.value}
            if abs(normal[-1]) > 1e-12:
                # {x . nu < 0} as the subgraph of the affine function -nu' . x' / nu_N
                profile = AffineProfile(slope=(-normal[:-1] / normal[-1]).tolist(), intercept=0.0)
                values["graph"] = curvature_subgraph(profile, np.zeros(n), params, cfg).value
            for method, value in values.items():
                cases += 1
                if abs(value) > FLAT_TOLERANCE:
                    failures += 1
                details.append({"n": n, "s": s, "normal": normal.tolist(), "method": method, "value": value})
    return SuiteResult(name="flat-zero", passed=failures == 0, cases=cases, failures=failures, details=details)


def comparison(cfg: QuadConfig, fixtures: Optional[int] = None) -> SuiteResult:
    """H_{F minus D}(x) - H_F(x) = 2 int_D |y - x|^{-N-s} dy with F the unit ball, D a ball inside it"""
    fixtures = fixtures or config.COMPARISON_FIXTURES
    details, failures = [], 0
    rng = stream(cfg.seed, SUITE_TAG, 7)
    for k in range(fixtures):
        n = 1 + k % 2
        params = FracParams(n=n, s=float(rng.uniform(0.3, 0.8)))
        dim = n + 1
        x = np.zeros(dim)
        x[-1] = 1.0
        radius = float(rng.uniform(0.1, 0.3))
        center = rng.uniform(-1.0, 1.0, size=dim)
        center *= rng.uniform(0.0, 0.9 - radius) / np.linalg.norm(center)
        if np.linalg.norm(center - x) - radius < 0.05:
            center[-1] -= 0.2
        F = Ball(center=[0.0] * dim, radius=1.0)
        D = Ball(center=center.tolist(), radius=radius)
        lhs = curvature_indicator(F - D, x, params, cfg.with_overrides(seed=cfg.seed + k))
        base = curvature_ball(params, 1.0, point=x)
        rhs = correction_integral(D, x, params, cfg)
        diff = lhs.value - base.value
        slack = 3.0 * (lhs.error_estimate + base.error_estimate + 2.0 * rhs.error_estimate)
        ok = abs(diff - 2.0 * rhs.value) <= slack
        failures += int(not ok)
        details.append({"n": n, "s": params.s, "difference": diff, "correction": 2.0 * rhs.value, "slack": slack})
    # at most one miss in 25 fixtures
    return SuiteResult(name="comparison", passed=failures <= fixtures // 25, cases=fixtures,
                       failures=failures, details=details)


def scaling(cfg: QuadConfig) -> SuiteResult:
    """eps^s H_{eps E}(eps x) = H_E(x) and translation invariance on a ball with a hole"""
    details, failures, cases = [], 0, 0
    for n, s in ((1, 0.5), (2, 0.5)):
        params = FracParams(n=n, s=s)
        dim = n + 1
        x = np.zeros(dim)
        x[-1] = 1.0
        hole = np.zeros(dim)
        hole[-1] = -0.3
        geom = Ball(center=[0.0] * dim, radius=1.0) - Ball(center=hole.tolist(), radius=0.25)
        for factor in (0.5, 2.0):
            report = scaling_translation_check(geom, x, params, cfg, factor=factor, vector=[0.5] * dim)
            cases += len(report.checks)
            failures += sum(not c.passed for c in report.checks)
            details.extend(c.model_dump() for c in report.checks)
    return SuiteResult(name="scaling", passed=failures == 0, cases=cases, failures=failures, details=details)


SUITES: Dict[str, Callable[[QuadConfig], SuiteResult]] = {
    "kernel-lipschitz": kernel_lipschitz,
    "oddness": oddness,
    "trichotomy": trichotomy,
    "flat-zero": flat_zero,
    "comparison": comparison,
    "scaling": scaling,
}


def run_suites(names: Optional[List[str]], cfg: QuadConfig) -> List[SuiteResult]:
    names = names or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise DomainError(f"unknown suites: {', '.join(unknown)}; available: {', '.join(SUITES)}")
    results = []
    for name in names:
        logger.info(f"suite {name}")
        try:
            result = SUITES[name](cfg)
        except FracminError as exc:
            logger.error(f"suite {name} aborted: {exc}")
            result = SuiteResult(name=name, passed=False, cases=0, failures=1,
                                 details=[{"error": f"{type(exc).__name__}: {exc}"}])
        logger.info(f"suite {name}: {'pass' if result.passed else 'FAIL'} ({result.failures}/{result.cases})")
        results.append(result)
    return results
