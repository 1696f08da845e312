"""BarrierSpec: the rescaled barrier F_eps = {x_N < eps^(1-alpha) |x'|^alpha}"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from kernel_quadrature.kernel import FracParams


class BarrierSpec(BaseModel):
    """Parameters (n, s, alpha, eps) of the barrier; beta is filled in once computed"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="boundary dimension")
    s: float = Field(..., description="fractional order in (0, 1)")
    alpha: float = Field(..., description="growth exponent in (0, 1)")
    eps: float = Field(1.0, gt=0, description="scale factor; F_eps = eps * F")
    beta: Optional[float] = Field(None, description="beta_{n,s,alpha} when already known")

    @field_validator("s", "alpha")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not (0.0 < value < 1.0):
            raise ValueError(f"value must lie in (0, 1), got {value}")
        return float(value)

    @property
    def params(self) -> FracParams:
        return FracParams(n=self.n, s=self.s)

    @property
    def coefficient(self) -> float:
        """eps^(1-alpha)"""
        return float(self.eps ** (1.0 - self.alpha))

    @property
    def admissible_radius(self) -> float:
        """Smallest |x'| at which the profile formula is used: 2^(-1/(2 alpha)) eps"""
        return float(2.0 ** (-1.0 / (2.0 * self.alpha)) * self.eps)

    @property
    def tail_exponent(self) -> float:
        """kappa = 1 + s - alpha of the graph integrand"""
        return 1.0 + self.s - self.alpha

    def height(self, xp: np.ndarray) -> np.ndarray:
        """eps^(1-alpha) |x'|^alpha for points x' of shape (m, n)"""
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        return self.coefficient * np.linalg.norm(xp, axis=1) ** self.alpha

    def boundary_point(self, r: float, direction: Optional[np.ndarray] = None) -> np.ndarray:
        """Point of the boundary with |x'| = r along ``direction`` (default e_1)"""
        d = np.zeros(self.n) if direction is None else np.asarray(direction, dtype=float)
        if direction is None:
            d[0] = 1.0
        d = d / np.linalg.norm(d)
        return np.concatenate([r * d, [self.coefficient * r ** self.alpha]])

    def rescaled(self, eps: float) -> "BarrierSpec":
        return self.model_copy(update={"eps": float(eps)})

    def with_beta(self, beta: float) -> "BarrierSpec":
        return self.model_copy(update={"beta": float(beta)})
