"""Principal-value quadrature with symmetrized excision and analytic power-law tails.

The engine works in polar coordinates about the singular point x0. Antipodal
pairs f(x0 + rho w) + f(x0 - rho w) cancel the leading singular part, so
the radial integrand F(rho) = rho^n * (sphere integral of the pair sum) is
absolutely integrable. Radial integration runs in u = log(rho) with
``scipy.integrate.quad_vec``. Three dyadic shells start at the excision
radius; the core below them is added by geometric extrapolation.

An integrand registered with ``local=True`` receives the offsets +-rho w
instead of absolute points, so a difference quotient written against them
keeps full relative precision as rho -> 0. Otherwise the rounding of
x0 + rho w sets an absolute noise floor for each segment. Beyond the truncation
radius a registered decay exponent kappa (integrand ~ |y - x0|^(-n-kappa))
gives the tail F(T)/kappa.
"""
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

import config
from kernel_quadrature.sphere import AngularRule, angular_rule
from utils.errors import ConvergenceError, DomainError
from utils.logger import logger

_EPS = np.finfo(float).eps


class QuadConfig(BaseModel):
    """Tolerances, budgets and excision/tail radii shared by all quadrature paths"""
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default_factory=lambda: config.REL_TOL, gt=0, description="relative tolerance")
    abs_tol: float = Field(default_factory=lambda: config.ABS_TOL, gt=0, description="absolute tolerance")
    max_evaluations: int = Field(default_factory=lambda: config.MAX_EVALUATIONS, gt=0,
                                 description="integrand evaluation budget per integral")
    excision_start: float = Field(default_factory=lambda: config.EXCISION_START, gt=0,
                                  description="initial symmetric excision radius")
    tail_radius: float = Field(default_factory=lambda: config.TAIL_RADIUS, gt=0,
                               description="first outer cutoff; grown until the tail settles")
    max_tail_radius: float = Field(1e12, gt=0, description="cap on the adaptive outer cutoff")
    angular_panels: int = Field(24, ge=2, description="graded panels of the angular rule")
    angular_nodes: int = Field(8, ge=2, description="Gauss nodes per angular panel (high-order rule)")
    samples: int = Field(default_factory=lambda: config.SAMPLES, ge=16,
                         description="Monte-Carlo samples per shell or stratum")
    band_factor: float = Field(2.0, gt=0, description="width factor of the boundary band used by shell sampling")
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED, description="base seed for sampled paths")
    threads: int = Field(default_factory=lambda: max(1, config.THREADS), ge=1, description="worker threads")

    @model_validator(mode="after")
    def _check_radii(self) -> "QuadConfig":
        if not self.excision_start < self.tail_radius:
            raise ValueError(
                f"excision_start ({self.excision_start}) must be below tail_radius ({self.tail_radius})")
        if self.max_tail_radius < self.tail_radius:
            raise ValueError("max_tail_radius must not be below tail_radius")
        return self

    def with_overrides(self, **overrides: Any) -> "QuadConfig":
        """Validated copy with some fields replaced"""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return QuadConfig.model_validate(data)


class PVResult(BaseModel):
    """Principal value with an absolute error estimate"""
    value: float = Field(..., description="principal value")
    error_estimate: float = Field(..., ge=0, description="absolute error estimate")
    evaluations: int = Field(0, ge=0, description="integrand evaluations used")
    truncation_radius: float = Field(..., gt=0, description="outer cutoff used")
    diagnostics: Dict[str, Any] = Field(default_factory=dict, description="engine internals")

    def scaled(self, factor: float) -> "PVResult":
        return PVResult(value=factor * self.value, error_estimate=abs(factor) * self.error_estimate,
                        evaluations=self.evaluations, truncation_radius=self.truncation_radius,
                        diagnostics=dict(self.diagnostics))

    @staticmethod
    def linear_combination(terms: Sequence[Tuple[float, "PVResult"]], **diagnostics: Any) -> "PVResult":
        """sum c_i * r_i with errors added in absolute value"""
        value = 0.0
        error = 0.0
        evaluations = 0
        radius = 0.0
        for coeff, part in terms:
            value += coeff * part.value
            error += abs(coeff) * part.error_estimate
            evaluations += part.evaluations
            radius = max(radius, part.truncation_radius)
        return PVResult(value=value, error_estimate=error, evaluations=evaluations,
                        truncation_radius=radius if radius > 0 else 1.0, diagnostics=diagnostics)


@dataclass
class Integrand:
    """Integrand plus the registration data the engine needs.

    ``func`` is vectorized: it takes points of shape (m, n) (shape (m,) in 1-D)
    and returns m values. With ``local`` the points are offsets y - x0.
    ``offset_scale`` is the size of the coordinates a local integrand still
    adds its offsets to (None when it never does); it only enters the noise floor.
    """
    func: Callable[[np.ndarray], np.ndarray]
    decay_exponent: Optional[float] = None
    support_radius: Optional[float] = None
    singular_points: Sequence[Any] = field(default_factory=tuple)
    radial_breakpoints: Sequence[float] = field(default_factory=tuple)
    label: str = ""
    local: bool = False
    offset_scale: Optional[float] = None


IntegrandLike = Union[Integrand, Callable[[np.ndarray], np.ndarray]]


def as_integrand(f: IntegrandLike, **registration: Any) -> Integrand:
    if isinstance(f, Integrand):
        if registration:
            data = dict(f.__dict__)
            data.update({k: v for k, v in registration.items() if v is not None})
            return Integrand(**data)
        return f
    return Integrand(func=f, **{k: v for k, v in registration.items() if v is not None})


class _BudgetExceeded(Exception):
    pass


class _Counter:
    def __init__(self, budget: int):
        self.budget = budget
        self.count = 0
        self._lock = threading.Lock()

    def add(self, amount: int) -> None:
        with self._lock:
            self.count += amount
            if self.count > self.budget:
                raise _BudgetExceeded()


@contextmanager
def _worker_map(threads: int) -> Iterator[Any]:
    if threads <= 1:
        yield 1
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


class _RadialProblem:
    """rho -> rho^n [high, low] angular integrals of the antipodal pair sum"""

    def __init__(self, integrand: Integrand, x0: np.ndarray, rule: AngularRule, counter: _Counter):
        self.integrand = integrand
        self.x0 = x0
        self.n = x0.shape[0]
        self.rule = rule
        self.counter = counter
        if integrand.local:
            self.origin = np.zeros_like(x0)
            self.scale = float(integrand.offset_scale or 0.0)
        else:
            self.origin = x0
            self.scale = float(np.max(np.abs(x0)))

    def _pair(self, rho: float) -> Tuple[np.ndarray, int]:
        dirs = self.rule.directions
        k = dirs.shape[0]
        step = rho * dirs
        pts = np.vstack([self.origin + step, self.origin - step])
        self.counter.add(2 * k)
        vals = np.asarray(self.integrand.func(pts), dtype=float).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise DomainError(
                f"integrand '{self.integrand.label}' returned non-finite values at radius {rho:.6g}")
        return vals, k

    def radial(self, rho: float) -> np.ndarray:
        vals, k = self._pair(rho)
        pair = vals[:k] + vals[k:]
        scale = rho ** self.n
        return scale * np.array([self.rule.high @ pair, self.rule.low @ pair])

    def noise(self, rho: float) -> float:
        """Rounding level of F(rho): the pair sum cancels terms of size |f|, each known to eps (1 + scale/rho)"""
        vals, k = self._pair(rho)
        size = float(np.abs(self.rule.high) @ (np.abs(vals[:k]) + np.abs(vals[k:])))
        return 16.0 * _EPS * (1.0 + self.scale / rho) * rho ** self.n * size

    def in_log(self, u: float) -> np.ndarray:
        return self.radial(float(np.exp(u)))


def _segment(problem: _RadialProblem, rho_a: float, rho_b: float, breaks: Sequence[float],
             cfg: QuadConfig, workers: Any) -> Tuple[np.ndarray, float, int]:
    u_a, u_b = np.log(rho_a), np.log(rho_b)
    pts = sorted({float(np.log(b)) for b in breaks if rho_a < b < rho_b})
    floor = problem.noise(rho_a) * (u_b - u_a)
    res, err, info = integrate.quad_vec(problem.in_log, u_a, u_b,
                                        epsabs=max(cfg.abs_tol / 4.0, 4.0 * floor), epsrel=cfg.rel_tol / 4.0,
                                        norm="max", points=pts or None, full_output=True,
                                        workers=workers, limit=4000)
    if info.status == 1:
        raise ConvergenceError(
            f"radial quadrature hit its subdivision limit on [{rho_a:.3g}, {rho_b:.3g}]",
            partial=PVResult(value=float(res[0]), error_estimate=float(err),
                             evaluations=problem.counter.count, truncation_radius=rho_b))
    if info.status == 2:
        logger.debug(f"roundoff reported on [{rho_a:.3g}, {rho_b:.3g}], err={err:.3g}")
    return np.asarray(res, dtype=float), float(err) + floor, int(info.intervals.shape[0])


def _core_remainder(shells: Sequence[float], bulk: float, cfg: QuadConfig) -> Tuple[float, float, Dict[str, Any]]:
    j1, j2, j3 = shells
    floor = max(10.0 * cfg.abs_tol, cfg.rel_tol * abs(bulk))
    q = j1 / j2 if j2 != 0.0 else np.nan
    q_prev = j2 / j3 if j3 != 0.0 else np.nan
    diag = {"shell_ratio": float(q) if np.isfinite(q) else None,
            "shell_ratio_prev": float(q_prev) if np.isfinite(q_prev) else None}
    if np.isfinite(q) and abs(q) < 1.0:
        remainder = j1 * q / (1.0 - q)
        if np.isfinite(q_prev) and abs(q_prev) < 1.0:
            error = abs(remainder - j1 * q_prev / (1.0 - q_prev))
        else:
            error = abs(remainder)
        return remainder, error, diag
    if max(abs(j1), abs(j2)) <= floor:
        diag["core_noise"] = True
        return 0.0, 2.0 * max(abs(j1), abs(j2)), diag
    raise ConvergenceError(f"principal value does not settle: inner shell ratio {q:.4g}")


def _tail_estimate(problem: _RadialProblem, radius: float, kappa: float) -> Tuple[float, float]:
    f_t = float(problem.radial(radius)[0])
    if f_t == 0.0:
        return 0.0, 0.0
    tail = f_t / kappa
    f_half = float(problem.radial(0.5 * radius)[0])
    if f_half != 0.0 and np.sign(f_half) == np.sign(f_t):
        local = np.log(f_half / f_t) / np.log(2.0)
        if local > 0.0:
            return tail, abs(tail - f_t / local)
    return tail, abs(tail)


def _tail_settled(tail: float, tail_err: float, body: float, cfg: QuadConfig) -> bool:
    target = max(cfg.abs_tol, cfg.rel_tol * abs(body))
    return abs(tail) < cfg.abs_tol / 10.0 or tail_err <= target / 10.0


def _run(integrand: Integrand, x0: np.ndarray, cfg: QuadConfig) -> PVResult:
    n = x0.shape[0]
    axis = None
    singular = [np.atleast_1d(np.asarray(p, dtype=float)) for p in integrand.singular_points]
    breaks = [float(b) for b in integrand.radial_breakpoints if b > 0]
    for point in singular:
        offset = point - x0
        dist = float(np.linalg.norm(offset))
        if dist > 0:
            breaks.append(dist)
            if axis is None:
                axis = offset / dist
    rule = angular_rule(n, cfg.angular_panels, cfg.angular_nodes, axis)
    counter = _Counter(cfg.max_evaluations)
    problem = _RadialProblem(integrand, x0, rule, counter)

    support = integrand.support_radius
    kappa = integrand.decay_exponent
    if support is None and kappa is None:
        raise DomainError(f"integrand '{integrand.label}' has neither finite support nor a registered decay exponent")
    if kappa is not None and kappa <= 0:
        raise DomainError(f"decay exponent must be positive, got {kappa}")

    core_lo = cfg.excision_start
    outer = float(support) if support is not None else cfg.tail_radius
    if outer <= 8.0 * core_lo:
        outer = 16.0 * core_lo

    parts: Dict[str, Any] = {}
    try:
        with _worker_map(cfg.threads) as workers:
            shells, shell_err = [], 0.0
            for k in range(3):
                res, err, _ = _segment(problem, core_lo * 2 ** k, core_lo * 2 ** (k + 1), breaks, cfg, workers)
                shells.append(float(res[0]))
                shell_err += err + abs(res[0] - res[1])
            res, radial_err, intervals = _segment(problem, 8.0 * core_lo, outer, breaks, cfg, workers)
            bulk = float(res[0]) + sum(shells)
            angular_err = float(abs(res[0] - res[1]))
            parts.update(bulk=bulk, intervals=intervals)

            remainder, core_err, core_diag = _core_remainder(shells, bulk, cfg)
            parts.update(core_remainder=remainder, core_error=core_err, **core_diag)

            tail, tail_err = 0.0, 0.0
            if support is None:
                tail, tail_err = _tail_estimate(problem, outer, kappa)
                while not _tail_settled(tail, tail_err, bulk + remainder, cfg) and outer < cfg.max_tail_radius:
                    new_outer = min(8.0 * outer, cfg.max_tail_radius)
                    res, err, more = _segment(problem, outer, new_outer, breaks, cfg, workers)
                    bulk += float(res[0])
                    radial_err += err
                    angular_err += float(abs(res[0] - res[1]))
                    intervals += more
                    outer = new_outer
                    tail, tail_err = _tail_estimate(problem, outer, kappa)
                    logger.debug(f"tail radius grown to {outer:.3g}: tail={tail:.3e} err={tail_err:.3e}")
                if not _tail_settled(tail, tail_err, bulk + remainder, cfg):
                    logger.warning(
                        f"tail of '{integrand.label}' not settled at radius {outer:.3g}; "
                        f"tail={tail:.3e} +- {tail_err:.3e}")
                parts.update(tail=tail, tail_error=tail_err, bulk=bulk, intervals=intervals)
    except _BudgetExceeded:
        partial = PVResult(value=float(parts.get("bulk", 0.0)), error_estimate=1e300,
                           evaluations=counter.count, truncation_radius=outer, diagnostics=parts)
        raise ConvergenceError(
            f"evaluation budget of {cfg.max_evaluations} exhausted for '{integrand.label}'", partial=partial)
    except ConvergenceError as exc:
        if exc.partial is None:
            exc.partial = PVResult(value=float(parts.get("bulk", 0.0)), error_estimate=1e300,
                                   evaluations=counter.count, truncation_radius=outer, diagnostics=parts)
        raise

    value = bulk + remainder + tail
    magnitude = abs(bulk) + abs(remainder) + abs(tail) + sum(abs(v) for v in shells)
    floor = 50.0 * _EPS * magnitude
    error = radial_err + angular_err + shell_err + core_err + tail_err + floor
    parts.update(radial_error=radial_err, angular_error=angular_err, shells=shells)
    return PVResult(value=value, error_estimate=error, evaluations=counter.count,
                    truncation_radius=outer, diagnostics=parts)


def pv_integrate_1d(f: IntegrandLike, x0: float, cfg: Optional[QuadConfig] = None,
                    domain: Optional[Tuple[float, float]] = None, **registration: Any) -> PVResult:
    """P.V. integral of f over ``domain`` (default the real line) about x0.

    Registration keywords: decay_exponent, support_radius, singular_points,
    radial_breakpoints, label.
    """
    cfg = cfg or QuadConfig()
    integrand = as_integrand(f, **registration)
    x0 = float(x0)
    lo, hi = domain if domain is not None else (-np.inf, np.inf)
    if not lo < x0 < hi:
        raise DomainError(f"singular point {x0} is not inside the domain ({lo}, {hi})")
    raw = integrand.func

    def on_line(points: np.ndarray) -> np.ndarray:
        t = points[:, 0]
        inside = (t > lo) & (t < hi)
        out = np.zeros_like(t)
        if inside.any():
            out[inside] = np.asarray(raw(t[inside]), dtype=float)
        return out

    breaks = list(integrand.radial_breakpoints)
    support = integrand.support_radius
    finite_ends = [abs(e - x0) for e in (lo, hi) if np.isfinite(e)]
    breaks.extend(finite_ends)
    if len(finite_ends) == 2:
        support = max(finite_ends) if support is None else min(support, max(finite_ends))
    wrapped = Integrand(func=on_line, decay_exponent=integrand.decay_exponent, support_radius=support,
                        singular_points=[np.atleast_1d(p) for p in integrand.singular_points],
                        radial_breakpoints=breaks, label=integrand.label)
    return _run(wrapped, np.array([x0]), cfg)


def pv_integrate_nd(f: IntegrandLike, x0: Sequence[float], cfg: Optional[QuadConfig] = None,
                    **registration: Any) -> PVResult:
    """P.V. integral over R^n about x0 with antipodal pairing y <-> 2 x0 - y.

    Supported for n <= 3; the tail needs either ``support_radius`` or
    ``decay_exponent``.
    """
    cfg = cfg or QuadConfig()
    integrand = as_integrand(f, **registration)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not np.all(np.isfinite(x0)):
        raise DomainError("singular point must be finite")
    return _run(integrand, x0, cfg)
