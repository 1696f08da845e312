"""Far-field registration: what a set looks like outside a ball B_radius(center).

Outside that ball the set is sandwiched, inner subset E subset outer, with
each bound empty, full or a half-space. The curvature integrand beyond
R = radius + |x - center| is monotone in E, so the two bounds give an
interval; its midpoint is used and its half-width is the error.
"""
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import integrate, special

from kernel_quadrature.kernel import FracParams
from kernel_quadrature.sphere import sphere_area
from utils.errors import DomainError


class FarFieldBound(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["empty", "full", "halfspace"]
    normal: Optional[List[float]] = Field(None, description="unit normal of {y . normal < offset}")
    offset: float = 0.0

    @field_validator("normal")
    @classmethod
    def _normalize(cls, value):
        if value is None:
            return value
        norm = float(np.linalg.norm(value))
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("half-space normal must be a finite non-zero vector")
        return [float(c) / norm for c in value]

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "halfspace" and not self.normal:
            raise ValueError("half-space bound needs a normal")
        return self

    def complement(self) -> "FarFieldBound":
        if self.kind == "empty":
            return FarFieldBound(kind="full")
        if self.kind == "full":
            return FarFieldBound(kind="empty")
        return FarFieldBound(kind="halfspace", normal=[-c for c in self.normal], offset=-self.offset)

    def translated(self, v: np.ndarray) -> "FarFieldBound":
        if self.kind != "halfspace":
            return self
        return FarFieldBound(kind="halfspace", normal=self.normal,
                             offset=self.offset + float(np.dot(self.normal, v)))

    def scaled(self, factor: float) -> "FarFieldBound":
        if self.kind != "halfspace":
            return self
        return FarFieldBound(kind="halfspace", normal=self.normal, offset=self.offset * factor)

    def contribution(self, x: np.ndarray, radius: float, params: FracParams) -> float:
        """int over |y - x| > radius of (chi_{E^c} - chi_E)(y) |y - x|^{-N-s} with E this bound"""
        dim = params.n + 1
        shell = sphere_area(dim) * radius ** (-params.s) / params.s
        if self.kind == "empty":
            return shell
        if self.kind == "full":
            return -shell
        d = self.offset - float(np.dot(self.normal, x))
        if d == 0.0:
            return 0.0
        return -float(np.sign(d)) * slab_integral(abs(d), radius, params)


def slab_integral(width: float, radius: float, params: FracParams) -> float:
    """int over {|w| > radius, |w . nu| < width} of |w|^{-N-s} dw"""
    dim = params.n + 1
    s = params.s
    b = 0.5 * (dim - 1)

    def shell(rho: float) -> float:
        z = min(1.0, width / rho)
        return rho ** (-1.0 - s) * special.betainc(0.5, b, z * z)

    total = 0.0
    if width > radius:
        # betainc(.., 1) = 1 on [radius, width]
        total += (radius ** (-s) - width ** (-s)) / s
        start = width
    else:
        start = radius
    tail, _ = integrate.quad(shell, start, np.inf, epsabs=1e-14, epsrel=1e-11, limit=200)
    return sphere_area(dim) * (total + tail)


class FarField(BaseModel):
    """inner subset E subset outer outside B_radius(center)"""
    model_config = ConfigDict(frozen=True)

    center: List[float] = Field(..., min_length=2)
    radius: float = Field(..., gt=0)
    inner: FarFieldBound
    outer: FarFieldBound

    @classmethod
    def bounded(cls, center, radius: float) -> "FarField":
        """The set lies inside B_radius(center)"""
        empty = FarFieldBound(kind="empty")
        return cls(center=[float(c) for c in center], radius=radius, inner=empty, outer=empty)

    @classmethod
    def cobounded(cls, center, radius: float) -> "FarField":
        full = FarFieldBound(kind="full")
        return cls(center=[float(c) for c in center], radius=radius, inner=full, outer=full)

    @classmethod
    def halfspace(cls, normal, offset: float, center, radius: float) -> "FarField":
        """Outside the ball the set coincides with {y . normal < offset}"""
        bound = FarFieldBound(kind="halfspace", normal=list(normal), offset=offset)
        return cls(center=[float(c) for c in center], radius=radius, inner=bound, outer=bound)

    @classmethod
    def between(cls, inner: FarFieldBound, outer: FarFieldBound, center, radius: float) -> "FarField":
        return cls(center=[float(c) for c in center], radius=radius, inner=inner, outer=outer)

    def outer_radius(self, x: np.ndarray) -> float:
        """Radius about x beyond which this registration applies"""
        return self.radius + float(np.linalg.norm(np.asarray(x) - np.asarray(self.center)))

    def contribution(self, x: np.ndarray, params: FracParams) -> Tuple[float, float, float]:
        """(value, error, radius) of the far part of the curvature at x"""
        if len(self.center) != params.n + 1:
            raise DomainError(f"far-field registration lives in R^{len(self.center)}, expected R^{params.n + 1}")
        radius = self.outer_radius(x)
        low = self.outer.contribution(x, radius, params)
        high = self.inner.contribution(x, radius, params)
        return 0.5 * (low + high), 0.5 * abs(high - low), radius

    def complement(self) -> "FarField":
        return FarField(center=self.center, radius=self.radius,
                        inner=self.outer.complement(), outer=self.inner.complement())

    def translated(self, v) -> "FarField":
        v = np.asarray(v, dtype=float)
        return FarField(center=list(np.asarray(self.center) + v), radius=self.radius,
                        inner=self.inner.translated(v), outer=self.outer.translated(v))

    def scaled(self, factor: float) -> "FarField":
        return FarField(center=list(np.asarray(self.center) * factor), radius=self.radius * factor,
                        inner=self.inner.scaled(factor), outer=self.outer.scaled(factor))
