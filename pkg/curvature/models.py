"""Result records shared by the curvature evaluators"""
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from kernel_quadrature.engine import PVResult

CurvatureMethod = Literal["graph-formula", "radial", "indicator-PV"]


class CurvatureResult(BaseModel):
    """H_{s,E}(x) with an absolute error bar and the provenance of the evaluation"""
    value: float = Field(..., description="fractional s-mean curvature")
    error_estimate: float = Field(..., ge=0, description="absolute error estimate")
    method: CurvatureMethod = Field(..., description="evaluation path")
    point: List[float] = Field(..., description="boundary point the value refers to")
    evaluations: int = Field(0, ge=0, description="integrand evaluations or samples used")
    seed: Optional[int] = Field(None, description="seed of sampled paths")
    config: Dict[str, Any] = Field(default_factory=dict, description="quadrature settings used")
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_pv(cls, result: PVResult, factor: float, method: CurvatureMethod, point,
                config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None) -> "CurvatureResult":
        """Scale a principal value into a curvature record"""
        return cls(value=factor * result.value, error_estimate=abs(factor) * result.error_estimate,
                   method=method, point=[float(c) for c in np.asarray(point).ravel()],
                   evaluations=result.evaluations, seed=seed, config=config or {},
                   diagnostics=dict(result.diagnostics))

    def negated(self) -> "CurvatureResult":
        return self.model_copy(update={"value": -self.value})

    def rescaled(self, factor: float, point) -> "CurvatureResult":
        """value * factor at a relocated point"""
        return self.model_copy(update={"value": factor * self.value,
                                       "error_estimate": abs(factor) * self.error_estimate,
                                       "point": [float(c) for c in np.asarray(point).ravel()]})

    def agrees_with(self, other: "CurvatureResult", factor: float = 3.0) -> bool:
        """|a - b| within ``factor`` times the combined error bars"""
        slack = factor * (self.error_estimate + other.error_estimate)
        return abs(self.value - other.value) <= slack
