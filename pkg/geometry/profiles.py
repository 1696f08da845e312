"""Height profiles u: R^n -> R for subgraphs {x_N < u(x')}.

Every profile reports a growth exponent gamma (|u(y')| <~ |y'|^gamma at
infinity); graph curvature uses it to register the decay of its integrand.
"""
from typing import Annotated, Any, Callable, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def _points(xp: np.ndarray, n: int) -> np.ndarray:
    xp = np.asarray(xp, dtype=float)
    if xp.ndim == 1:
        xp = xp.reshape(1, -1) if xp.shape[0] == n else xp.reshape(-1, 1)
    return xp


class ProfileBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    def value(self, xp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, xp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def increment(self, xp: np.ndarray, h: np.ndarray) -> np.ndarray:
        """u(x' + h) - u(x') for one x' and offsets h of shape (m, n)"""
        xp = np.asarray(xp, dtype=float).reshape(1, -1)
        return self.value(xp + h) - self.value(xp)[0]

    @property
    def exact_increment(self) -> bool:
        """True when ``increment`` keeps full relative precision as h -> 0"""
        return False

    @property
    def growth(self) -> Optional[float]:
        return None

    def singular_points(self) -> List[np.ndarray]:
        """Points where u fails to be smooth"""
        return []

    def value_bounds(self) -> Optional[tuple]:
        """(inf u, sup u) when u is bounded"""
        return None


class ConstantProfile(ProfileBase):
    kind: Literal["constant"] = "constant"
    level: float = Field(0.0, description="constant height")

    def value(self, xp):
        xp = np.atleast_2d(np.asarray(xp, dtype=float))
        return np.full(xp.shape[0], self.level)

    def gradient(self, xp):
        return np.zeros_like(np.atleast_2d(np.asarray(xp, dtype=float)))

    def increment(self, xp, h):
        return np.zeros(np.atleast_2d(h).shape[0])

    @property
    def exact_increment(self):
        return True

    @property
    def growth(self):
        return 0.0

    def value_bounds(self):
        return (self.level, self.level)


class AffineProfile(ProfileBase):
    kind: Literal["affine"] = "affine"
    slope: List[float] = Field(..., min_length=1, description="constant gradient")
    intercept: float = Field(0.0, description="value at the origin")

    def value(self, xp):
        xp = _points(xp, len(self.slope))
        return xp @ np.asarray(self.slope) + self.intercept

    def gradient(self, xp):
        xp = _points(xp, len(self.slope))
        return np.tile(np.asarray(self.slope), (xp.shape[0], 1))

    def increment(self, xp, h):
        return np.atleast_2d(h) @ np.asarray(self.slope)

    @property
    def exact_increment(self):
        return True

    @property
    def growth(self):
        return 1.0


class PowerProfile(ProfileBase):
    """u = k |x' - c|^alpha"""
    kind: Literal["power"] = "power"
    coefficient: float = Field(1.0, description="k")
    exponent: float = Field(..., gt=0, description="alpha")
    center: List[float] = Field(..., min_length=1, description="c")

    def value(self, xp):
        xp = _points(xp, len(self.center))
        return self.coefficient * np.linalg.norm(xp - np.asarray(self.center), axis=1) ** self.exponent

    def gradient(self, xp):
        xp = _points(xp, len(self.center))
        d = xp - np.asarray(self.center)
        r = np.linalg.norm(d, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(r > 0, self.coefficient * self.exponent * r ** (self.exponent - 2.0), 0.0)
        return factor[:, None] * d

    @property
    def growth(self):
        return self.exponent

    def increment(self, xp, h):
        d = np.asarray(xp, dtype=float).reshape(-1) - np.asarray(self.center)
        r2 = float(d @ d)
        if r2 == 0.0:
            return super().increment(xp, h)
        h = np.atleast_2d(h)
        growth = (2.0 * (h @ d) + np.sum(h * h, axis=1)) / r2
        with np.errstate(divide="ignore"):
            return self.coefficient * r2 ** (0.5 * self.exponent) * np.expm1(0.5 * self.exponent * np.log1p(growth))

    @property
    def exact_increment(self):
        return True

    def singular_points(self):
        return [np.asarray(self.center, dtype=float)]


class BumpProfile(ProfileBase):
    """Smooth compactly supported bump: u = base + h exp(1 - 1/(1 - |x'-c|^2/R^2)) on |x'-c| < R"""
    kind: Literal["bump"] = "bump"
    height: float = Field(..., description="h")
    radius: float = Field(..., gt=0, description="R")
    center: List[float] = Field(..., min_length=1, description="c")
    base: float = Field(0.0, description="level outside the support")

    def _q(self, xp):
        xp = _points(xp, len(self.center))
        d = xp - np.asarray(self.center)
        return d, np.sum(d * d, axis=1) / self.radius ** 2

    def value(self, xp):
        _, q = self._q(xp)
        out = np.full(q.shape, self.base)
        inside = q < 1.0
        out[inside] += self.height * np.exp(1.0 - 1.0 / (1.0 - q[inside]))
        return out

    def gradient(self, xp):
        d, q = self._q(xp)
        out = np.zeros_like(d)
        inside = q < 1.0
        if inside.any():
            qi = q[inside]
            bump = self.height * np.exp(1.0 - 1.0 / (1.0 - qi))
            # d/dx exp(1 - 1/(1-q)) = -exp(.) / (1-q)^2 * dq/dx, dq/dx = 2 d / R^2
            factor = -bump / (1.0 - qi) ** 2 * 2.0 / self.radius ** 2
            out[inside] = factor[:, None] * d[inside]
        return out

    def increment(self, xp, h):
        d, q0 = self._q(np.asarray(xp, dtype=float).reshape(1, -1))
        h = np.atleast_2d(h)
        q0 = float(q0[0])
        dq = (2.0 * (h @ d[0]) + np.sum(h * h, axis=1)) / self.radius ** 2
        q1 = q0 + dq
        if q0 >= 1.0:
            return self.value(np.asarray(xp, dtype=float).reshape(1, -1) + h) - self.base
        out = np.empty(h.shape[0])
        both = q1 < 1.0
        # exp(1 - 1/(1-q1)) - exp(1 - 1/(1-q0)) with the exponent difference formed from dq
        top = self.height * np.exp(1.0 - 1.0 / (1.0 - q0))
        out[both] = top * np.expm1(-dq[both] / ((1.0 - q1[both]) * (1.0 - q0)))
        out[~both] = -top
        return out

    @property
    def exact_increment(self):
        return True

    @property
    def growth(self):
        return 0.0

    def value_bounds(self):
        return (min(self.base, self.base + self.height), max(self.base, self.base + self.height))


class DecayProfile(ProfileBase):
    """u = -depth (1 + |x'|^2)^(-gamma/2), a dent that flattens toward height 0"""
    kind: Literal["decay"] = "decay"
    depth: float = Field(..., gt=0, description="depth of the dent at the origin")
    gamma: float = Field(..., gt=0, description="decay rate")
    dim: int = Field(1, ge=1, description="n")

    def value(self, xp):
        xp = _points(xp, self.dim)
        r2 = np.sum(xp * xp, axis=1)
        return -self.depth * (1.0 + r2) ** (-0.5 * self.gamma)

    def gradient(self, xp):
        xp = _points(xp, self.dim)
        r2 = np.sum(xp * xp, axis=1)
        factor = self.depth * self.gamma * (1.0 + r2) ** (-0.5 * self.gamma - 1.0)
        return factor[:, None] * xp

    def increment(self, xp, h):
        x = np.asarray(xp, dtype=float).reshape(-1)
        h = np.atleast_2d(h)
        a = 1.0 + float(x @ x)
        growth = (2.0 * (h @ x) + np.sum(h * h, axis=1)) / a
        return -self.depth * a ** (-0.5 * self.gamma) * np.expm1(-0.5 * self.gamma * np.log1p(growth))

    @property
    def exact_increment(self):
        return True

    @property
    def growth(self):
        return 0.0

    def value_bounds(self):
        return (-self.depth, 0.0)


class CallableProfile(ProfileBase):
    """Runtime-only profile wrapping Python callables; not serializable"""
    kind: Literal["callable"] = "callable"
    func: Any = Field(..., exclude=True, description="u, vectorized over (m, n) points")
    grad: Optional[Any] = Field(None, exclude=True, description="gradient of u")
    growth_exponent: Optional[float] = Field(None, description="gamma, required for curvature")
    singular: List[List[float]] = Field(default_factory=list, description="non-smooth points")
    dim: int = Field(1, ge=1, description="n")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def value(self, xp):
        return np.asarray(self.func(_points(xp, self.dim)), dtype=float).reshape(-1)

    def gradient(self, xp):
        xp = _points(xp, self.dim)
        if self.grad is not None:
            return np.asarray(self.grad(xp), dtype=float).reshape(xp.shape)
        h = 1e-6 * np.maximum(1.0, np.abs(xp))
        out = np.empty_like(xp)
        for i in range(xp.shape[1]):
            step = np.zeros_like(xp)
            step[:, i] = h[:, i]
            out[:, i] = (self.value(xp + step) - self.value(xp - step)) / (2.0 * h[:, i])
        return out

    @property
    def growth(self):
        return self.growth_exponent

    def singular_points(self):
        return [np.asarray(p, dtype=float) for p in self.singular]


Profile = Annotated[
    Union[ConstantProfile, AffineProfile, PowerProfile, BumpProfile, DecayProfile, CallableProfile],
    Field(discriminator="kind"),
]


def callable_profile(func: Callable[[np.ndarray], np.ndarray], grad: Optional[Callable] = None,
                     growth: Optional[float] = None, dim: int = 1) -> CallableProfile:
    return CallableProfile(func=func, grad=grad, growth_exponent=growth, dim=dim)
