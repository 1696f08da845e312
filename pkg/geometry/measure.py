"""Monte-Carlo measures: window volumes and the fractional s-perimeter"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field

from geometry.sampling import (orthant_signs, outer_radii, sample_in_set, shell_radii,
                               uniform_in_orthant, window_volume)
from geometry.sets import GeomSetBase
from kernel_quadrature.engine import PVResult, QuadConfig
from kernel_quadrature.kernel import FracParams
from kernel_quadrature.sphere import sphere_area
from utils.errors import DomainError
from utils.logger import logger
from utils.parallel import ordered_map
from utils.rng import spawn_streams, stream, uniform_directions

# number of dyadic shells resolved below the container diameter
_PERIMETER_SHELLS = 12


class VolumeEstimate(BaseModel):
    value: float = Field(..., ge=0, description="estimate of |set within window|")
    std_error: float = Field(..., ge=0, description="window_volume * sqrt(p (1 - p) / samples)")
    samples: int = Field(..., ge=1)
    seed: int


def mc_volume(geom: GeomSetBase, window: GeomSetBase, samples: int, seed: int,
              threads: int = 1) -> VolumeEstimate:
    """Stratified estimate of |geom within window| over the 2^N orthants of the window.

    Each orthant gets its own Philox stream spawned from ``seed``, so the result
    does not depend on ``threads``.
    """
    if samples <= 0:
        raise DomainError("mc_volume needs at least one sample")
    volume = window_volume(window)
    dim = window.ambient_dim
    signs = orthant_signs(dim)
    strata = signs.shape[0]
    base, extra = divmod(samples, strata)
    counts = [base + (1 if k < extra else 0) for k in range(strata)]
    streams = spawn_streams(seed, strata)

    def stratum(k: int) -> Tuple[int, int]:
        if counts[k] == 0:
            return 0, 0
        pts = uniform_in_orthant(window, signs[k], streams[k], counts[k])
        return int(np.count_nonzero(geom.contains(pts))), counts[k]

    hits = ordered_map(stratum, range(strata), threads)
    # stratum estimate weighted by its share of the window
    fractions = [h / c for h, c in hits if c > 0]
    p = float(np.sum(fractions)) / strata if len(fractions) == strata else \
        float(sum(h for h, _ in hits)) / samples
    std = volume * np.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return VolumeEstimate(value=volume * p, std_error=float(std), samples=samples, seed=seed)


def _perimeter_shell(geom: GeomSetBase, container: GeomSetBase, params: FracParams,
                     cfg: QuadConfig, index: int, inner: float) -> Tuple[float, float]:
    """Mean and variance of one shell; index -1 is the outer shell [inner, inf)"""
    rng = stream(cfg.seed, 7, index + 1)
    count = cfg.samples
    x, volume = sample_in_set(container, rng, count)
    dim = params.n + 1
    if index < 0:
        rho, weight = outer_radii(rng, count, inner, params.s)
    else:
        rho, weight = shell_radii(rng, count, inner, params.s)
    omega = uniform_directions(rng, count, dim)
    inside_x = geom.contains(x)
    total = np.zeros(count)
    for sign in (1.0, -1.0):
        y = x + sign * rho[:, None] * omega
        jump = inside_x != geom.contains(y)
        w = np.where(container.contains(y), 0.5, 1.0)
        total += w * jump
    # average of the antithetic pair; full-sphere measure and the x-volume
    values = volume * sphere_area(dim) * weight * 0.5 * total
    return float(values.mean()), float(values.var(ddof=1) / count)


def fractional_perimeter(geom: GeomSetBase, container: GeomSetBase, params: FracParams,
                         cfg: QuadConfig) -> PVResult:
    """Per_s(geom; container) = 1/2 double integral over Q(container) of |chi(x) - chi(y)| |x - y|^{-N-s}.

    Written as int_{x in container} int_y w(y) |chi(x) - chi(y)| K, w = 1/2 inside
    the container and 1 outside, and estimated on dyadic radial shells with
    antithetic directions. The part below the smallest shell follows the
    rho^{1-s} law of a finite-perimeter interface.
    """
    box = container.bounding_box()
    if box is None:
        raise DomainError("fractional perimeter needs a bounded container")
    if geom.is_empty:
        return PVResult(value=0.0, error_estimate=0.0, evaluations=0,
                        truncation_radius=float(np.linalg.norm(box[1] - box[0])) or 1.0,
                        diagnostics={"empty": True})
    diameter = float(np.linalg.norm(box[1] - box[0]))
    smallest = diameter * 2.0 ** (-_PERIMETER_SHELLS)
    inners = [smallest * 2.0 ** k for k in range(_PERIMETER_SHELLS)]
    jobs = [(-1, diameter)] + list(enumerate(inners))
    logger.debug(f"perimeter: {len(jobs)} shells down to {smallest:.3g}")

    results = ordered_map(
        lambda job: _perimeter_shell(geom, container, params, cfg, job[0], job[1]),
        jobs, cfg.threads)
    means = [m for m, _ in results]
    variances = [v for _, v in results]

    q = 2.0 ** (-(1.0 - params.s))
    shell_means = means[1:]
    normalized = [shell_means[k] * q ** k for k in range(3)]
    j_bar = float(np.mean(normalized))
    remainder = j_bar * q / (1.0 - q)
    spread = float(np.std(normalized)) * q / (1.0 - q)
    sigma = float(np.sqrt(sum(variances)))
    core_sigma = float(np.sqrt(variances[1])) * q / (1.0 - q)
    value = float(sum(means)) + remainder
    error = 2.0 * sigma + spread + 2.0 * core_sigma
    evaluations = len(jobs) * cfg.samples * 4
    return PVResult(value=value, error_estimate=error, evaluations=evaluations,
                    truncation_radius=diameter,
                    diagnostics={"shells": shell_means, "outer": means[0], "core_remainder": remainder,
                                 "sigma": sigma, "seed": cfg.seed})
