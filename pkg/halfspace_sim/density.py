"""Monte-Carlo density ratios |E within B_rho(q)| / rho^N at a boundary point"""
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from curvature.evaluator import curvature_ball
from curvature.viscosity import straddles_boundary
from geometry.measure import mc_volume
from geometry.sets import Ball, GeomSetBase
from kernel_quadrature.kernel import FracParams
from kernel_quadrature.sphere import ball_volume
from utils.errors import DomainError
from utils.logger import logger
from utils.rng import derive_seed, stream

DensityMode = Literal["both-sides", "complement-only"]

DENSITY_TAG = 41


class DensityRow(BaseModel):
    rho: float = Field(..., gt=0)
    interior: Optional[float] = Field(None, description="|E within B_rho(q)| / rho^N")
    exterior: float = Field(..., description="|B_rho(q) minus E| / rho^N")
    sigma: float = Field(..., ge=0, description="standard error of either ratio")
    below_rho0: Optional[bool] = Field(None, description="rho <= rho0 in the touched-ball variant")


class DensityReport(BaseModel):
    """Density ratios per scale; the minima are empirical density constants"""
    q: List[float]
    mode: DensityMode
    rows: List[DensityRow]
    unit_ball_volume: float
    min_interior: Optional[float] = None
    min_exterior: float
    samples: int
    seed: int
    gamma: Optional[float] = Field(None, description="half the curvature of the unit ball")
    rho0: Optional[float] = Field(None, description="scale below which the touched-ball bounds apply")
    ceiling_ok: Optional[bool] = Field(None, description="interior <= 3/4 |B_1| + 3 sigma for rho <= rho0")
    floor_ok: Optional[bool] = Field(None, description="exterior >= 1/4 |B_1| - 3 sigma for rho <= rho0")


def touched_ball_scale(params: FracParams, radius: float = 1.0) -> tuple:
    """(gamma, rho0) for an interior touching ball of the given radius"""
    gamma = 0.5 * curvature_ball(params, 1.0).value
    unit = ball_volume(params.n + 1)
    rho0 = min((unit / (4.0 * gamma)) ** (1.0 / params.s), 1.0) * radius
    return gamma, rho0


def _check_touching_ball(q: np.ndarray, ball: Ball) -> None:
    gap = abs(float(np.linalg.norm(q - np.asarray(ball.center))) - ball.radius)
    if gap > 1e-9 * max(1.0, ball.radius):
        raise DomainError(f"q is {gap:.2e} away from the touching ball's sphere")


def density_check(E: GeomSetBase, q, rho_grid: Sequence[float], mode: DensityMode = "both-sides",
                  samples: int = 4096, seed: int = 0, threads: int = 1,
                  touched_ball: Optional[Ball] = None, params: Optional[FracParams] = None) -> DensityReport:
    """Interior and exterior volume ratios of E in balls about q for each rho.

    With ``touched_ball`` (a ball inside E whose sphere passes through q) and
    ``params``, rows with rho <= rho0 are also checked against the 3/4 ceiling
    on the interior ratio and the 1/4 floor on the exterior ratio.
    """
    if mode not in ("both-sides", "complement-only"):
        raise DomainError(f"unknown density mode '{mode}'")
    q = np.asarray(q, dtype=float)
    radii = np.asarray(rho_grid, dtype=float)
    if radii.size == 0 or np.any(radii <= 0.0):
        raise DomainError("density radii must be positive")
    if not straddles_boundary(E, q, stream(seed, DENSITY_TAG)):
        raise DomainError(f"q = {q.tolist()} is not on the boundary of the set")
    dim = q.shape[0]
    unit = ball_volume(dim)

    gamma = rho0 = None
    if touched_ball is not None:
        if params is None:
            raise DomainError("the touched-ball variant needs (n, s)")
        if params.n + 1 != dim:
            raise DomainError(f"params describe R^{params.n + 1}, point lives in R^{dim}")
        _check_touching_ball(q, touched_ball)
        gamma, rho0 = touched_ball_scale(params, touched_ball.radius)

    rows = []
    for k, rho in enumerate(radii):
        window = Ball(center=q.tolist(), radius=float(rho))
        est = mc_volume(E, window, samples, derive_seed(seed, DENSITY_TAG, k), threads)
        scale = rho ** dim
        inner = est.value / scale
        rows.append(DensityRow(rho=float(rho), interior=inner if mode == "both-sides" else None,
                               exterior=unit - inner, sigma=est.std_error / scale,
                               below_rho0=None if rho0 is None else bool(rho <= rho0)))
    logger.info(f"density at {np.round(q, 6).tolist()}: {len(rows)} scales, {samples} samples each")

    report = DensityReport(q=q.tolist(), mode=mode, rows=rows, unit_ball_volume=unit,
                           min_interior=min(r.interior for r in rows) if mode == "both-sides" else None,
                           min_exterior=min(r.exterior for r in rows), samples=samples, seed=seed,
                           gamma=gamma, rho0=rho0)
    if rho0 is not None:
        local = [r for r in rows if r.below_rho0]
        if not local:
            logger.warning(f"no density radius at or below rho0 = {rho0:.4e}")
        # the ceiling is a statement about E itself, so it is checked in both modes
        report.ceiling_ok = all(unit - r.exterior <= 0.75 * unit + 3.0 * r.sigma for r in local)
        report.floor_ok = all(r.exterior >= 0.25 * unit - 3.0 * r.sigma for r in local)
    return report
