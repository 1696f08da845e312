"""Touching test behind the viscosity notion of H_{s,E} >= 0 / <= 0 at a point"""
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from curvature.evaluator import evaluate_curvature
from curvature.models import CurvatureResult
from geometry.farfield import FarField
from geometry.sampling import sample_in_set
from geometry.sets import Ball, GeomSetBase, snap_to_boundary
from kernel_quadrature.engine import QuadConfig
from kernel_quadrature.kernel import FracParams
from utils.errors import DomainError
from utils.logger import logger
from utils.rng import stream, uniform_directions

TouchVerdict = Literal["consistent", "violated", "not-touching"]


class TouchReport(BaseModel):
    """One test set F against E at x; no claim is made about other test sets"""
    side: Literal["inner", "outer"]
    on_boundary: bool
    violations: int = Field(..., ge=0, description="samples of F outside E (inner) or of E outside F (outer)")
    samples: int = Field(..., ge=1)
    curvature: Optional[CurvatureResult] = None
    verdict: TouchVerdict


def straddles_boundary(geom: GeomSetBase, x: np.ndarray, rng: np.random.Generator, count: int = 256) -> bool:
    """Both E and its complement show up in a tiny ball about x"""
    h = 1e-6 * max(1.0, float(np.linalg.norm(x)))
    dirs = uniform_directions(rng, count, x.shape[0])
    inside = geom.contains(x + h * dirs)
    return bool(inside.any() and (~inside).any())


def touching_test(E: GeomSetBase, F: GeomSetBase, x, params: FracParams, cfg: Optional[QuadConfig] = None,
                  side: Literal["inner", "outer"] = "inner", radius: float = 1.0,
                  samples: Optional[int] = None, far_field: Optional[FarField] = None) -> TouchReport:
    """Check F inside E (or E inside F) near x on samples and report H_{s,F}(x).

    ``inner``: E has H >= 0 at x in the viscosity sense only if H_{s,F}(x) >= 0
    for every such F; a single F with H_{s,F}(x) clearly negative is a violation.
    """
    cfg = cfg or QuadConfig()
    if side not in ("inner", "outer"):
        raise DomainError(f"side must be 'inner' or 'outer', got {side!r}")
    point, _ = snap_to_boundary(F, np.asarray(x, dtype=float))
    rng = stream(cfg.seed, 17)
    count = samples or cfg.samples
    on_boundary = straddles_boundary(E, point, rng)
    pts, _ = sample_in_set(Ball(center=point.tolist(), radius=radius), rng, count)
    in_e = E.contains(pts)
    in_f = F.contains(pts)
    violations = int(np.sum(in_f & ~in_e)) if side == "inner" else int(np.sum(in_e & ~in_f))
    if not on_boundary or violations:
        logger.info(f"touching test at {point.tolist()}: boundary={on_boundary} violations={violations}")
        return TouchReport(side=side, on_boundary=on_boundary, violations=violations, samples=count,
                           verdict="not-touching")

    result = evaluate_curvature(F, point, params, cfg, far_field)
    slack = 3.0 * result.error_estimate
    ok = result.value >= -slack if side == "inner" else result.value <= slack
    return TouchReport(side=side, on_boundary=True, violations=0, samples=count, curvature=result,
                       verdict="consistent" if ok else "violated")
