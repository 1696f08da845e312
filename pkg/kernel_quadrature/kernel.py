"""Kernel G_s(t) = int_0^t (1+tau^2)^(-(n+1+s)/2) dtau and its companion G~_s(t) = G_s(t) - t.

After tau = tan(theta) the integral becomes int_0^{arctan t} cos^{n-1+s}(theta) dtheta,
which is a regularized incomplete beta function. Every routine works on |t| and
reapplies the sign, so oddness holds bit for bit.
"""
from functools import lru_cache
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import integrate, special

from utils.errors import DomainError

ArrayLike = Union[float, np.ndarray]

# |t| below this uses the series for G~; the ratio of consecutive terms is < t^2 (k+j)/(j+1)
_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 80


class FracParams(BaseModel):
    """Ambient dimension is n+1, fractional order s"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="boundary dimension; sets live in R^{n+1}")
    s: float = Field(..., description="fractional order, strictly between 0 and 1")

    @field_validator("s")
    @classmethod
    def _check_s(cls, value: float) -> float:
        if not (0.0 < value < 1.0) or not np.isfinite(value):
            raise ValueError(f"s must lie in (0, 1), got {value}")
        return float(value)

    @property
    def kernel_exponent(self) -> float:
        """n+1+s"""
        return self.n + 1 + self.s

    @property
    def half_exponent(self) -> float:
        return 0.5 * (self.n + 1 + self.s)


@lru_cache(maxsize=256)
def _beta_half(n: int, s: float) -> float:
    return float(special.beta(0.5, 0.5 * (n + s)))


def G_infinity(params: FracParams) -> float:
    """G_s(+inf) = (1/2) B(1/2, (n+s)/2)"""
    return 0.5 * _beta_half(params.n, params.s)


def _check_real(t: np.ndarray, allow_infinite: bool) -> None:
    if np.isnan(t).any():
        raise DomainError("G_s is undefined at NaN")
    if not allow_infinite and np.isinf(t).any():
        raise DomainError("G~_s needs a finite argument")


def _g_abs_beta(params: FracParams, a: np.ndarray) -> np.ndarray:
    b = 0.5 * (params.n + params.s)
    half_beta = G_infinity(params)
    out = np.empty_like(a)
    small = a <= 1.0
    if small.any():
        x = a[small] ** 2 / (1.0 + a[small] ** 2)
        out[small] = half_beta * special.betainc(0.5, b, x)
    large = ~small
    if large.any():
        # complement form keeps precision as t -> inf
        with np.errstate(divide="ignore", over="ignore"):
            y = 1.0 / (1.0 + a[large] ** 2)
        out[large] = half_beta - half_beta * special.betainc(b, 0.5, y)
    return out


def _g_abs_quad(params: FracParams, a: np.ndarray) -> np.ndarray:
    power = params.n - 1 + params.s
    out = np.empty_like(a)
    for idx, value in np.ndenumerate(a):
        upper = float(np.arctan(value))
        out[idx], _ = integrate.quad(lambda th: np.cos(th) ** power, 0.0, upper,
                                     epsabs=1e-15, epsrel=1e-13, limit=200)
    return out


def eval_G(params: FracParams, t: ArrayLike, method: str = "beta") -> ArrayLike:
    """G_s(t), vectorized; +-inf map to +-G_infinity.

    ``method="quad"`` integrates the angular form adaptively and serves as an oracle.
    """
    arr = np.asarray(t, dtype=float)
    _check_real(arr, allow_infinite=True)
    a = np.abs(np.atleast_1d(arr))
    if method == "beta":
        mag = _g_abs_beta(params, a)
    elif method == "quad":
        mag = _g_abs_quad(params, a)
    else:
        raise DomainError(f"unknown G_s method '{method}'")
    out = np.sign(np.atleast_1d(arr)) * mag
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _g_tilde_series(params: FracParams, a: np.ndarray) -> np.ndarray:
    # sum_{j>=1} (-1)^j (k)_j / j! * a^{2j+1} / (2j+1)
    k = params.half_exponent
    a2 = a * a
    coeff = np.ones_like(a)
    power = a.copy()
    total = np.zeros_like(a)
    for j in range(1, _SERIES_TERMS + 1):
        coeff = coeff * (-(k + j - 1) / j)
        power = power * a2
        term = coeff * power / (2 * j + 1)
        total = total + term
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def eval_G_tilde(params: FracParams, t: ArrayLike) -> ArrayLike:
    """G~_s(t) = G_s(t) - t, odd, with a cancellation-free series near zero"""
    arr = np.asarray(t, dtype=float)
    _check_real(arr, allow_infinite=False)
    a = np.abs(np.atleast_1d(arr))
    mag = np.empty_like(a)
    near = a < _SERIES_CUTOFF
    if near.any():
        mag[near] = _g_tilde_series(params, a[near])
    far = ~near
    if far.any():
        mag[far] = _g_abs_beta(params, a[far]) - a[far]
    out = np.sign(np.atleast_1d(arr)) * mag
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def g_tilde_lipschitz_bound(params: FracParams, a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """((n+2)/2) max(a^2, b^2) |a - b|, an upper bound for |G~(a) - G~(b)|"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (params.n + 2) * np.maximum(a * a, b * b) * np.abs(a - b)
