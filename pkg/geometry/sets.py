"""Symbolic set descriptions in R^N (N = n + 1).

All primitives are open sets (strict inequalities). Sets combine through
the boolean operators ``|``, ``&``, ``-`` and ``~`` and through
``translated``/``scaled``; membership is decided by structural recursion
on vectorized point arrays of shape (m, N).
"""
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from barrier.spec import BarrierSpec
from geometry.profiles import PowerProfile, Profile
from kernel_quadrature.sphere import ball_volume
from utils.errors import DomainError
from utils.logger import logger

Box3 = Tuple[np.ndarray, np.ndarray]

# bisection steps for the arc minimizer of the ice-cream-cone gap
_ARC_BISECTIONS = 80


@dataclass(frozen=True)
class BoundaryProjection:
    """Signed offset (negative inside), outward unit normal and nearby boundary point"""
    offset: float
    normal: np.ndarray
    point: np.ndarray


def _as_points(x) -> Tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


def _unit(v: np.ndarray, fallback: int = 0) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        out = np.zeros_like(v)
        out[fallback] = 1.0
        return out
    return v / norm


class GeomSetBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    # membership ------------------------------------------------------------
    def contains(self, x) -> Union[bool, np.ndarray]:
        """Membership of one point (N,) or many points (m, N)"""
        pts, single = _as_points(x)
        inside = np.asarray(self._contains(pts), dtype=bool)
        return bool(inside[0]) if single else inside

    def _contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # metric data -----------------------------------------------------------
    @property
    def ambient_dim(self) -> Optional[int]:
        return None

    @property
    def is_empty(self) -> bool:
        return False

    def bounding_box(self) -> Optional[Box3]:
        """Axis-aligned box containing the set, None when unbounded"""
        return None

    def distance_lower_bound(self, x) -> float:
        """A lower bound for dist(x, set); 0 when nothing better is known"""
        return 0.0

    def boundary_projection(self, x) -> Optional[BoundaryProjection]:
        return None

    def exact_volume(self) -> Optional[float]:
        return None

    # algebra ---------------------------------------------------------------
    def __or__(self, other: "GeomSet") -> "UnionSet":
        return UnionSet(left=self, right=other)

    def __and__(self, other: "GeomSet") -> "IntersectionSet":
        return IntersectionSet(left=self, right=other)

    def __sub__(self, other: "GeomSet") -> "DifferenceSet":
        return DifferenceSet(left=self, right=other)

    def __invert__(self) -> "ComplementSet":
        return ComplementSet(inner=self)

    def translated(self, vector) -> "Translate":
        return Translate(inner=self, vector=[float(v) for v in np.ravel(vector)])

    def scaled(self, factor: float) -> "Scale":
        return Scale(inner=self, factor=float(factor))


# primitives ------------------------------------------------------------------

class HalfSpace(GeomSetBase):
    """{x : x . normal < offset}"""
    kind: Literal["halfspace"] = "halfspace"
    normal: List[float] = Field(..., min_length=1, description="outward unit normal")
    offset: float = Field(0.0, description="level c of the boundary hyperplane x . normal = c")

    @field_validator("normal")
    @classmethod
    def _normalize(cls, value: List[float]) -> List[float]:
        v = np.asarray(value, dtype=float)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("half-space normal must be a finite non-zero vector")
        return [float(c) for c in v / norm]

    @classmethod
    def lower(cls, dim: int, level: float = 0.0) -> "HalfSpace":
        """{x_N < level}"""
        normal = [0.0] * dim
        normal[-1] = 1.0
        return cls(normal=normal, offset=level)

    @property
    def ambient_dim(self):
        return len(self.normal)

    def _contains(self, pts):
        return pts @ np.asarray(self.normal) < self.offset

    def distance_lower_bound(self, x):
        return max(0.0, float(np.dot(x, self.normal)) - self.offset)

    def boundary_projection(self, x):
        nu = np.asarray(self.normal)
        off = float(np.dot(x, nu)) - self.offset
        return BoundaryProjection(off, nu, np.asarray(x, dtype=float) - off * nu)


class Ball(GeomSetBase):
    kind: Literal["ball"] = "ball"
    center: List[float] = Field(..., min_length=1)
    radius: float = Field(..., gt=0)

    @property
    def ambient_dim(self):
        return len(self.center)

    def _contains(self, pts):
        return np.linalg.norm(pts - np.asarray(self.center), axis=1) < self.radius

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def distance_lower_bound(self, x):
        return max(0.0, float(np.linalg.norm(np.asarray(x) - self.center)) - self.radius)

    def boundary_projection(self, x):
        c = np.asarray(self.center)
        d = np.asarray(x, dtype=float) - c
        dist = float(np.linalg.norm(d))
        if dist == 0.0:
            return None
        nu = d / dist
        return BoundaryProjection(dist - self.radius, nu, c + self.radius * nu)

    def exact_volume(self):
        return ball_volume(len(self.center)) * self.radius ** len(self.center)


class Box(GeomSetBase):
    """Open box prod (lo_i, hi_i)"""
    kind: Literal["box"] = "box"
    lo: List[float] = Field(..., min_length=1)
    hi: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check(self):
        if len(self.lo) != len(self.hi) or not np.all(np.asarray(self.lo) < np.asarray(self.hi)):
            raise ValueError("box needs lo < hi componentwise")
        return self

    @property
    def ambient_dim(self):
        return len(self.lo)

    def _contains(self, pts):
        return np.all((pts > np.asarray(self.lo)) & (pts < np.asarray(self.hi)), axis=1)

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def distance_lower_bound(self, x):
        x = np.asarray(x, dtype=float)
        gap = np.maximum(np.maximum(np.asarray(self.lo) - x, 0.0), x - np.asarray(self.hi))
        return float(np.linalg.norm(gap))

    def boundary_projection(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        below, above = lo - x, x - hi
        # signed distance to each face, larger is farther outside
        faces = np.concatenate([below, above])
        k = int(np.argmax(faces))
        axis = k % x.shape[0]
        sign = -1.0 if k < x.shape[0] else 1.0
        nu = np.zeros_like(x)
        nu[axis] = sign
        point = x.copy()
        point[axis] = lo[axis] if sign < 0 else hi[axis]
        outside = np.maximum(np.maximum(below, above), 0.0)
        offset = float(np.linalg.norm(outside)) if np.any(outside > 0) else float(faces[k])
        return BoundaryProjection(offset, nu, point)

    def exact_volume(self):
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


class Subgraph(GeomSetBase):
    """{x : x_N < u(x')}"""
    kind: Literal["subgraph"] = "subgraph"
    profile: Profile
    n: int = Field(..., ge=1, description="dimension of x'")

    @property
    def ambient_dim(self):
        return self.n + 1

    def _contains(self, pts):
        return pts[:, -1] < self.profile.value(pts[:, :-1])

    def distance_lower_bound(self, x):
        bounds = self.profile.value_bounds()
        if bounds is None:
            return 0.0
        return max(0.0, float(np.asarray(x)[-1]) - bounds[1])

    def boundary_projection(self, x):
        x = np.asarray(x, dtype=float)
        xp = x[:-1].reshape(1, -1)
        u = float(self.profile.value(xp)[0])
        g = self.profile.gradient(xp)[0]
        denom = float(np.sqrt(1.0 + g @ g))
        nu = np.concatenate([-g, [1.0]]) / denom
        return BoundaryProjection((x[-1] - u) / denom, nu, np.concatenate([x[:-1], [u]]))


class BarrierSet(GeomSetBase):
    """F_eps = {x_N < eps^(1-alpha) |x'|^alpha}"""
    kind: Literal["barrier"] = "barrier"
    spec: BarrierSpec

    @property
    def ambient_dim(self):
        return self.spec.n + 1

    def as_subgraph(self) -> Subgraph:
        profile = PowerProfile(coefficient=self.spec.coefficient, exponent=self.spec.alpha,
                               center=[0.0] * self.spec.n)
        return Subgraph(profile=profile, n=self.spec.n)

    def _contains(self, pts):
        return pts[:, -1] < self.spec.height(pts[:, :-1])

    def boundary_projection(self, x):
        if np.linalg.norm(np.asarray(x)[:-1]) == 0.0:
            return None
        return self.as_subgraph().boundary_projection(x)


class Cone(GeomSetBase):
    """apex + {x_N < -slope |x'|} (opening -1) or apex + {x_N > slope |x'|} (opening +1)"""
    kind: Literal["cone"] = "cone"
    slope: float = Field(..., gt=0)
    apex: List[float] = Field(..., min_length=2)
    opening: Literal[-1, 1] = -1

    @property
    def ambient_dim(self):
        return len(self.apex)

    def _local(self, pts):
        w = pts - np.asarray(self.apex)
        h = w[:, -1] * (-self.opening)
        return w, np.linalg.norm(w[:, :-1], axis=1), h

    def _contains(self, pts):
        _, r, h = self._local(pts)
        return h < -self.slope * r

    def _offset(self, r: float, h: float) -> float:
        ell = self.slope
        length = np.sqrt(1.0 + ell * ell)
        if (r - ell * h) / length < 0.0:
            return float(np.hypot(r, h))
        return float((ell * r + h) / length)

    def distance_lower_bound(self, x):
        _, r, h = self._local(np.atleast_2d(x))
        if h[0] < -self.slope * r[0]:
            return 0.0
        return max(0.0, self._offset(float(r[0]), float(h[0])))

    def boundary_projection(self, x):
        w, r, h = self._local(np.atleast_2d(x))
        w, r, h = w[0], float(r[0]), float(h[0])
        ell = self.slope
        length = np.sqrt(1.0 + ell * ell)
        radial = _unit(w[:-1])
        flip = -self.opening
        nu = np.concatenate([ell * radial, [flip * 1.0]]) / length
        offset = (ell * r + h) / length
        t = (r - ell * h) / length
        if t <= 0.0:
            return None
        # foot of the perpendicular on the meridian ray
        foot_r, foot_h = t / length, -ell * t / length
        point = np.asarray(self.apex) + np.concatenate([foot_r * radial, [flip * foot_h]])
        return BoundaryProjection(float(offset), nu, point)


class TruncatedCone(GeomSetBase):
    """(cone with apex p) intersected with B_radius(p)"""
    kind: Literal["truncated_cone"] = "truncated_cone"
    slope: float = Field(..., gt=0)
    apex: List[float] = Field(..., min_length=2)
    radius: float = Field(..., gt=0)
    opening: Literal[-1, 1] = -1

    def as_boolean(self) -> "IntersectionSet":
        return IntersectionSet(left=Cone(slope=self.slope, apex=self.apex, opening=self.opening),
                               right=Ball(center=self.apex, radius=self.radius))

    @property
    def ambient_dim(self):
        return len(self.apex)

    def _contains(self, pts):
        return self.as_boolean()._contains(pts)

    def bounding_box(self):
        c = np.asarray(self.apex)
        return c - self.radius, c + self.radius

    def distance_lower_bound(self, x):
        return self.as_boolean().distance_lower_bound(x)

    def boundary_projection(self, x):
        return self.as_boolean().boundary_projection(x)


class IceCreamCone(GeomSetBase):
    """Union of balls B_{(p - z)_N / 4}(z) over z in (downward cone of slope ell, apex p) within B_r(p).

    With w = y - p split into rho = |w'| and h = w_N, and a centre written as
    z = (sigma e, -t) with e the direction of w', the point is covered iff
    g(sigma, t) = (sigma - rho)^2 + (h + t)^2 - t^2 / 16 is negative somewhere
    on the sector sigma >= 0, t >= ell sigma, sigma^2 + t^2 <= r^2. g is a
    convex quadratic, so its minimum over the sector is the smallest value
    among the free minimizer and the minimizers restricted to each side:
    the axis, the cone wall and the arc.
    """
    kind: Literal["ice_cream_cone"] = "ice_cream_cone"
    slope: float = Field(..., gt=0)
    apex: List[float] = Field(..., min_length=2)
    radius: float = Field(..., gt=0)

    @property
    def ambient_dim(self):
        return len(self.apex)

    def _gap(self, rho, h, sigma, t, feasible):
        g = (sigma - rho) ** 2 + (h + t) ** 2 - t * t / 16.0
        return np.where(feasible, g, np.inf)

    def _arc_point(self, rho, h):
        # sigma = rho / (1 + lam), t = -h / (15/16 + lam); the radius shrinks monotonically in lam
        r = self.radius
        lo = np.zeros_like(rho)
        hi = np.maximum(rho, np.abs(h)) / r * 2.0 + 1.0
        for _ in range(_ARC_BISECTIONS):
            lam = 0.5 * (lo + hi)
            outside = (rho / (1.0 + lam)) ** 2 + (h / (15.0 / 16.0 + lam)) ** 2 > r * r
            lo = np.where(outside, lam, lo)
            hi = np.where(outside, hi, lam)
        lam = 0.5 * (lo + hi)
        return rho / (1.0 + lam), -h / (15.0 / 16.0 + lam)

    def minimum_gap(self, pts) -> np.ndarray:
        """min of g over the sector; negative exactly on the set"""
        pts, _ = _as_points(pts)
        w = pts - np.asarray(self.apex)
        rho = np.linalg.norm(w[:, :-1], axis=1)
        h = w[:, -1]
        r, ell = self.radius, self.slope
        rim = r / np.sqrt(1.0 + ell * ell)
        candidates = []
        # free minimizer
        t0 = -16.0 * h / 15.0
        candidates.append(self._gap(rho, h, rho, t0, (t0 >= ell * rho) & (rho * rho + t0 * t0 <= r * r)))
        # axis sigma = 0
        t_axis = np.clip(t0, 0.0, r)
        candidates.append(self._gap(rho, h, 0.0, t_axis, True))
        # wall t = ell sigma
        s_wall = np.clip((rho - h * ell) / (1.0 + 15.0 * ell * ell / 16.0), 0.0, rim)
        candidates.append(self._gap(rho, h, s_wall, ell * s_wall, True))
        # arc, only needed when the free minimizer leaves the disc
        s_arc, t_arc = self._arc_point(rho, h)
        candidates.append(self._gap(rho, h, s_arc, t_arc, (t_arc >= ell * s_arc) & (h < 0.0)))
        return np.min(np.vstack(candidates), axis=0)

    def _contains(self, pts):
        return self.minimum_gap(pts) < 0.0

    def bounding_box(self):
        c = np.asarray(self.apex)
        return c - 2.0 * self.radius, c + 2.0 * self.radius

    def distance_lower_bound(self, x):
        return max(0.0, float(np.linalg.norm(np.asarray(x) - self.apex)) - 1.25 * self.radius)


class EmptySet(GeomSetBase):
    kind: Literal["empty"] = "empty"

    @property
    def is_empty(self):
        return True

    def _contains(self, pts):
        return np.zeros(pts.shape[0], dtype=bool)

    def distance_lower_bound(self, x):
        return float("inf")

    def exact_volume(self):
        return 0.0


class FullSpace(GeomSetBase):
    kind: Literal["full"] = "full"

    def _contains(self, pts):
        return np.ones(pts.shape[0], dtype=bool)


# combinators -----------------------------------------------------------------

def _closest(*candidates: Optional[BoundaryProjection]) -> Optional[BoundaryProjection]:
    found = [c for c in candidates if c is not None]
    if not found:
        return None
    return min(found, key=lambda c: abs(c.offset))


def _negate(proj: Optional[BoundaryProjection]) -> Optional[BoundaryProjection]:
    if proj is None:
        return None
    return BoundaryProjection(-proj.offset, -proj.normal, proj.point)


class ComplementSet(GeomSetBase):
    kind: Literal["complement"] = "complement"
    inner: "GeomSet"

    @property
    def ambient_dim(self):
        return self.inner.ambient_dim

    def _contains(self, pts):
        return ~self.inner._contains(pts)

    def boundary_projection(self, x):
        return _negate(self.inner.boundary_projection(x))


class UnionSet(GeomSetBase):
    kind: Literal["union"] = "union"
    left: "GeomSet"
    right: "GeomSet"

    @property
    def ambient_dim(self):
        return self.left.ambient_dim or self.right.ambient_dim

    @property
    def is_empty(self):
        return self.left.is_empty and self.right.is_empty

    def _contains(self, pts):
        return self.left._contains(pts) | self.right._contains(pts)

    def bounding_box(self):
        boxes = [self.left.bounding_box(), self.right.bounding_box()]
        if self.left.is_empty:
            return boxes[1]
        if self.right.is_empty:
            return boxes[0]
        if boxes[0] is None or boxes[1] is None:
            return None
        return np.minimum(boxes[0][0], boxes[1][0]), np.maximum(boxes[0][1], boxes[1][1])

    def distance_lower_bound(self, x):
        return min(self.left.distance_lower_bound(x), self.right.distance_lower_bound(x))

    def boundary_projection(self, x):
        return _closest(self.left.boundary_projection(x), self.right.boundary_projection(x))

    def exact_volume(self):
        if self.right.is_empty:
            return self.left.exact_volume()
        if self.left.is_empty:
            return self.right.exact_volume()
        return None


class IntersectionSet(GeomSetBase):
    kind: Literal["intersection"] = "intersection"
    left: "GeomSet"
    right: "GeomSet"

    @property
    def ambient_dim(self):
        return self.left.ambient_dim or self.right.ambient_dim

    @property
    def is_empty(self):
        return self.left.is_empty or self.right.is_empty

    def _contains(self, pts):
        return self.left._contains(pts) & self.right._contains(pts)

    def bounding_box(self):
        boxes = [b for b in (self.left.bounding_box(), self.right.bounding_box()) if b is not None]
        if not boxes:
            return None
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        return lo, np.maximum(hi, lo)

    def distance_lower_bound(self, x):
        return max(self.left.distance_lower_bound(x), self.right.distance_lower_bound(x))

    def boundary_projection(self, x):
        return _closest(self.left.boundary_projection(x), self.right.boundary_projection(x))


class DifferenceSet(GeomSetBase):
    """left minus right"""
    kind: Literal["difference"] = "difference"
    left: "GeomSet"
    right: "GeomSet"

    @property
    def ambient_dim(self):
        return self.left.ambient_dim or self.right.ambient_dim

    @property
    def is_empty(self):
        return self.left.is_empty

    def _contains(self, pts):
        return self.left._contains(pts) & ~self.right._contains(pts)

    def bounding_box(self):
        return self.left.bounding_box()

    def distance_lower_bound(self, x):
        return self.left.distance_lower_bound(x)

    def boundary_projection(self, x):
        return _closest(self.left.boundary_projection(x), _negate(self.right.boundary_projection(x)))

    def exact_volume(self):
        if self.right.is_empty:
            return self.left.exact_volume()
        return None


class Translate(GeomSetBase):
    kind: Literal["translate"] = "translate"
    inner: "GeomSet"
    vector: List[float] = Field(..., min_length=1)

    @property
    def ambient_dim(self):
        return self.inner.ambient_dim or len(self.vector)

    @property
    def is_empty(self):
        return self.inner.is_empty

    def _contains(self, pts):
        return self.inner._contains(pts - np.asarray(self.vector))

    def bounding_box(self):
        box = self.inner.bounding_box()
        if box is None:
            return None
        v = np.asarray(self.vector)
        return box[0] + v, box[1] + v

    def distance_lower_bound(self, x):
        return self.inner.distance_lower_bound(np.asarray(x) - np.asarray(self.vector))

    def boundary_projection(self, x):
        proj = self.inner.boundary_projection(np.asarray(x, dtype=float) - np.asarray(self.vector))
        if proj is None:
            return None
        return BoundaryProjection(proj.offset, proj.normal, proj.point + np.asarray(self.vector))

    def exact_volume(self):
        return self.inner.exact_volume()


class Scale(GeomSetBase):
    """factor * inner (dilation about the origin)"""
    kind: Literal["scale"] = "scale"
    inner: "GeomSet"
    factor: float = Field(..., gt=0)

    @property
    def ambient_dim(self):
        return self.inner.ambient_dim

    @property
    def is_empty(self):
        return self.inner.is_empty

    def _contains(self, pts):
        return self.inner._contains(pts / self.factor)

    def bounding_box(self):
        box = self.inner.bounding_box()
        if box is None:
            return None
        return box[0] * self.factor, box[1] * self.factor

    def distance_lower_bound(self, x):
        return self.factor * self.inner.distance_lower_bound(np.asarray(x) / self.factor)

    def boundary_projection(self, x):
        proj = self.inner.boundary_projection(np.asarray(x, dtype=float) / self.factor)
        if proj is None:
            return None
        return BoundaryProjection(proj.offset * self.factor, proj.normal, proj.point * self.factor)

    def exact_volume(self):
        vol = self.inner.exact_volume()
        dim = self.ambient_dim
        if vol is None or dim is None:
            return None
        return vol * self.factor ** dim


GeomSet = Annotated[
    Union[HalfSpace, Ball, Box, Subgraph, BarrierSet, Cone, TruncatedCone, IceCreamCone,
          EmptySet, FullSpace, ComplementSet, UnionSet, IntersectionSet, DifferenceSet,
          Translate, Scale],
    Field(discriminator="kind"),
]

for _model in (ComplementSet, UnionSet, IntersectionSet, DifferenceSet, Translate, Scale):
    _model.model_rebuild()


def snap_to_boundary(geom: GeomSetBase, x, rel_tol: float = 1e-9) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Project x onto the symbolic boundary when it is within rel_tol * max(1, |x|).

    Returns the boundary point and the outward normal (None when the set has no
    projection; the point is then taken as given).
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("evaluation point must be finite")
    proj = geom.boundary_projection(x)
    if proj is None:
        logger.debug(f"no boundary projection for {type(geom).__name__}; using the point as given")
        return x, None
    limit = rel_tol * max(1.0, float(np.linalg.norm(x)))
    if abs(proj.offset) > limit:
        raise DomainError(f"point lies {abs(proj.offset):.3e} away from the boundary (tolerance {limit:.1e})")
    return np.asarray(proj.point, dtype=float), np.asarray(proj.normal, dtype=float)
