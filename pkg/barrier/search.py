"""Smallest radius beyond which the n = 1 barrier is a strict supersolution"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from barrier.constants import beta_constant
from barrier.profile import BarrierMethod, barrier_curvature
from barrier.spec import BarrierSpec
from kernel_quadrature.engine import QuadConfig
from utils.errors import DomainError, SearchFailureError
from utils.logger import logger
from utils.parallel import ordered_map

GRID_RATIO = 1.25
SEARCH_CAP = 1e6


class RadiusCertificate(BaseModel):
    r: float
    value: float
    error: float = Field(..., ge=0)
    positive: bool = Field(..., description="value - 3 error > 0")


class SupersolutionRadius(BaseModel):
    s: float
    alpha: float
    radius: float = Field(..., ge=1.0)
    beta: float
    beta_error: float = Field(..., ge=0)
    grid_ratio: float
    cap: float
    certificates: List[RadiusCertificate]


def radius_grid(ratio: float = GRID_RATIO, cap: float = SEARCH_CAP) -> np.ndarray:
    """1, ratio, ratio^2, ... up to cap"""
    count = int(np.floor(np.log(cap) / np.log(ratio) + 1e-9)) + 1
    return ratio ** np.arange(count)


def supersolution_radius(s: float, alpha: float, cfg: Optional[QuadConfig] = None, n: int = 1,
                         ratio: float = GRID_RATIO, cap: float = SEARCH_CAP,
                         method: BarrierMethod = "decomposed") -> SupersolutionRadius:
    """Smallest grid radius R >= 1 with H(r) > 3 err(r) for every grid radius r >= R.

    Positivity rests on the leading term 2 beta r^(alpha-1-s), so beta itself
    must be certified positive first.
    """
    if n != 1:
        raise DomainError("the supersolution radius is only defined for n = 1")
    if not 0.0 < alpha <= s < 1.0:
        raise DomainError(f"need 0 < alpha <= s < 1, got s={s}, alpha={alpha}")
    cfg = cfg or QuadConfig()
    beta = beta_constant(1, s, alpha, cfg)
    if not beta.value > 3.0 * beta.error_estimate:
        raise SearchFailureError(
            f"beta = {beta.value:.3e} +- {beta.error_estimate:.1e} is not certified positive; "
            f"no strict supersolution radius exists for s={s}, alpha={alpha}")
    spec = BarrierSpec(n=1, s=s, alpha=alpha, eps=1.0, beta=beta.value)

    def certify(r: float) -> RadiusCertificate:
        h = barrier_curvature(spec, r, cfg, method=method)
        return RadiusCertificate(r=r, value=h.value, error=h.error_estimate,
                                 positive=h.value - 3.0 * h.error_estimate > 0.0)

    certificates = ordered_map(certify, [float(r) for r in radius_grid(ratio, cap)], cfg.threads)
    start = len(certificates)
    while start > 0 and certificates[start - 1].positive:
        start -= 1
    if start == len(certificates):
        raise SearchFailureError(f"no positive barrier curvature up to r = {cap:g} for s={s}, alpha={alpha}",
                                 certificates=certificates)
    radius = certificates[start].r
    logger.info(f"supersolution radius for s={s}, alpha={alpha}: R = {radius:.6g}")
    return SupersolutionRadius(s=s, alpha=alpha, radius=radius, beta=beta.value,
                               beta_error=beta.error_estimate, grid_ratio=ratio, cap=cap,
                               certificates=certificates[start:])
