"""beta_{n,s,alpha} = P.V. int_{R^n} (1 - |y|^alpha) / |e_1 - y|^{n+1+s} dy"""
import warnings
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate

from kernel_quadrature.engine import PVResult, QuadConfig, pv_integrate_nd
from utils.errors import ConvergenceError, DomainError
from utils.logger import logger
from utils.parallel import ordered_map

_EPS = np.finfo(float).eps


def one_minus_power(h: np.ndarray, alpha: float) -> np.ndarray:
    """1 - |e_1 + h|^alpha, accurate relative to |h| as h -> 0"""
    growth = 2.0 * h[:, 0] + np.sum(h * h, axis=1)
    with np.errstate(divide="ignore"):
        return -np.expm1(0.5 * alpha * np.log1p(growth))


def _quad(func, a: float, b: float, **kw) -> tuple:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(func, a, b, epsabs=1e-14, epsrel=1e-12, limit=400, **kw)
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"beta quadrature did not converge on [{a}, {b}]: {exc}") from exc


def _beta_line(s: float, alpha: float) -> PVResult:
    """n = 1 through the absolutely convergent folded form on (0, 1):

    int_0^1 (1 - t^alpha)(1 - t^{s-alpha}) [(1-t)^{-2-s} + (1+t)^{-2-s}] dt
    """
    if alpha == s:
        return PVResult(value=0.0, error_estimate=0.0, evaluations=0, truncation_radius=1.0,
                        diagnostics={"exact": True})

    limit = alpha * (s - alpha)

    def near_one(t: float) -> float:
        # integrand / (1-t)^{-s}; the quotients tend to alpha and s - alpha at t = 1
        if 1.0 - t < 1e-9:
            g = limit
        else:
            lt = np.log(t)
            g = (-np.expm1(alpha * lt) / (1.0 - t)) * (-np.expm1((s - alpha) * lt) / (1.0 - t))
        return g * (1.0 + ((1.0 - t) / (1.0 + t)) ** (2.0 + s))

    def kernel(t: float) -> float:
        return (1.0 - t) ** (-2.0 - s) + (1.0 + t) ** (-2.0 - s)

    upper, err_u = _quad(near_one, 0.5, 1.0, weight="alg", wvar=(0.0, -s))
    if alpha > s:
        # t^{s-alpha} factored into the weight
        lower, err_l = _quad(lambda t: (1.0 - t ** alpha) * (t ** (alpha - s) - 1.0) * kernel(t),
                             0.0, 0.5, weight="alg", wvar=(s - alpha, 0.0))
    else:
        lower, err_l = _quad(lambda t: (1.0 - t ** alpha) * (1.0 - t ** (s - alpha)) * kernel(t), 0.0, 0.5)
    value = upper + lower
    error = abs(err_u) + abs(err_l) + 50.0 * _EPS * (abs(upper) + abs(lower))
    return PVResult(value=float(value), error_estimate=float(error), evaluations=0, truncation_radius=1.0,
                    diagnostics={"upper": float(upper), "lower": float(lower)})


def beta_constant(n: int, s: float, alpha: float, cfg: Optional[QuadConfig] = None) -> PVResult:
    """beta_{n,s,alpha}; positive for alpha < s, zero at alpha = s, negative beyond (n = 1)"""
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if n == 1:
        if not 0.0 < alpha < 1.0 + s:
            raise DomainError(f"alpha must lie in (0, 1 + s) for n = 1, got {alpha}")
        return _beta_line(s, alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    power = n + 1 + s
    e1 = np.zeros(n)
    e1[0] = 1.0

    def integrand(h: np.ndarray) -> np.ndarray:
        # h = y - e_1
        return one_minus_power(h, alpha) * np.linalg.norm(h, axis=1) ** (-power)

    return pv_integrate_nd(integrand, e1, cfg, decay_exponent=1.0 + s - alpha,
                           singular_points=[np.zeros(n)], label=f"beta n={n}", local=True)


def beta_sweep(s_values: Sequence[float], alpha_values: Sequence[float], n: int = 1,
               cfg: Optional[QuadConfig] = None) -> pd.DataFrame:
    """Table of beta over an (s, alpha) grid with the sign expected from s - alpha.

    A sign is only claimed where |beta| > 3 err; on the diagonal alpha = s the
    value must stay within that band.
    """
    cfg = cfg or QuadConfig()
    jobs = [(float(s), float(a)) for s in s_values for a in alpha_values]

    def row(job):
        s, a = job
        res = beta_constant(n, s, a, cfg)
        resolved = abs(res.value) > 3.0 * res.error_estimate
        sign = int(np.sign(res.value)) if resolved else 0
        expected = int(np.sign(s - a))
        agrees = sign == expected if (resolved or expected == 0) else True
        return {"n": n, "s": s, "alpha": a, "beta": res.value, "err": res.error_estimate,
                "sign": sign, "expected_sign": expected, "resolved": resolved, "agrees": agrees}

    frame = pd.DataFrame(ordered_map(row, jobs, cfg.threads))
    logger.info(f"beta sweep: {len(frame)} points, {int((~frame['agrees']).sum())} disagreements")
    return frame
