"""Candidate sets below the hyperplane {x_N = 0} and their upper-envelope boundary samples"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from geometry.farfield import FarField
from geometry.sampling import uniform_in_box
from geometry.serialization import CylinderSpec
from geometry.sets import GeomSetBase, Translate
from utils.errors import DomainError, GeometryViolationError
from utils.logger import logger
from utils.rng import stream


@dataclass
class BoundarySamples:
    """Top boundary points of a lower set, one per column, with outward normals"""
    points: np.ndarray
    normals: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    def shifted(self, height: float) -> "BoundarySamples":
        shift = np.zeros(self.points.shape[1])
        shift[-1] = height
        return BoundarySamples(points=self.points + shift, normals=self.normals)

    @property
    def highest(self) -> float:
        return float(self.points[:, -1].max()) if len(self) else -np.inf


@dataclass
class UpperEnvelopeSampler:
    """Samples sup{x_N : (x', x_N) in E} on a grid of columns |x'_i| <= horizon.

    Each column is scanned downward from ``top`` in steps of ``step`` until the
    first point of E, then the crossing is refined by bisection. Features
    thinner than ``step`` can be missed. Normals come from finite differences
    of the sampled envelope.
    """
    horizon: float = 50.0
    resolution: float = 0.25
    top: float = 0.0
    floor: float = -10.0
    step: float = 0.05
    bisection_steps: int = 40

    def columns(self, n: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
        axis = np.arange(-self.horizon, self.horizon + 0.5 * self.resolution, self.resolution)
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1), tuple([axis.size] * n)

    def sample(self, geom: GeomSetBase, n: int) -> BoundarySamples:
        if self.step <= 0 or self.floor >= self.top:
            raise DomainError("sampler needs step > 0 and floor < top")
        cols, shape = self.columns(n)
        m = cols.shape[0]
        levels = np.arange(self.top, self.floor - 1e-12, -self.step)
        hit_level = np.full(m, -1, dtype=int)
        pending = np.ones(m, dtype=bool)
        for k, z in enumerate(levels):
            idx = np.nonzero(pending)[0]
            if idx.size == 0:
                break
            pts = np.column_stack([cols[idx], np.full(idx.size, z)])
            inside = geom.contains(pts)
            hit_level[idx[inside]] = k
            pending[idx[inside]] = False
        if np.any(hit_level == 0):
            logger.warning(f"{int(np.sum(hit_level == 0))} columns are already inside the set at the top level")

        heights = np.full(m, np.nan)
        found = hit_level > 0
        lo = levels[hit_level[found]]
        hi = levels[hit_level[found] - 1]
        sub = cols[found]
        for _ in range(self.bisection_steps):
            mid = 0.5 * (lo + hi)
            inside = geom.contains(np.column_stack([sub, mid]))
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        heights[found] = lo
        at_top = hit_level == 0
        heights[at_top] = self.top

        grid = heights.reshape(shape)
        grads = np.gradient(grid, self.resolution) if n > 1 else [np.gradient(grid, self.resolution)]
        grad = np.stack([g.ravel() for g in grads], axis=1)
        # columns next to an empty column get a flat normal
        grad[~np.all(np.isfinite(grad), axis=1)] = 0.0
        keep = np.isfinite(heights)
        normals = np.column_stack([-grad[keep], np.ones(int(keep.sum()))])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        points = np.column_stack([cols[keep], heights[keep]])
        logger.debug(f"upper envelope: {points.shape[0]} of {m} columns hit the set")
        return BoundarySamples(points=points, normals=normals)


@dataclass
class ContainmentReport:
    gap: float
    above_hyperplane: int
    in_cylinder: int
    samples: int


@dataclass
class CandidateSet:
    """E inside {x_N < 0}, avoiding the cylinder B'_radius x [-depth, 0]"""
    base: GeomSetBase
    n: int
    sampler: UpperEnvelopeSampler = field(default_factory=UpperEnvelopeSampler)
    far_field: Optional[FarField] = None
    cylinder: CylinderSpec = field(default_factory=CylinderSpec)
    label: str = "candidate"
    _samples: Optional[BoundarySamples] = field(default=None, init=False, repr=False)

    def shifted(self, height: float) -> GeomSetBase:
        """E + height e_N"""
        vector = [0.0] * self.n + [float(height)]
        return Translate(inner=self.base, vector=vector)

    def boundary_samples(self) -> BoundarySamples:
        if self._samples is None:
            self._samples = self.sampler.sample(self.base, self.n)
        return self._samples

    def verify(self, samples: int = 20000, seed: int = 0) -> ContainmentReport:
        """Sample the upper half-space window and the excluded cylinder for points of E"""
        rng = stream(seed, 23)
        dim = self.n + 1
        h = self.sampler.horizon
        upper = uniform_in_box(np.r_[np.full(self.n, -h), 0.0], np.r_[np.full(self.n, h), h], rng, samples)
        above = int(np.count_nonzero(self.base.contains(upper)))
        r, d = self.cylinder.radius, self.cylinder.depth
        box = uniform_in_box(np.r_[np.full(self.n, -r), -d], np.r_[np.full(self.n, r), 0.0], rng, samples)
        in_disc = np.linalg.norm(box[:, : dim - 1], axis=1) < r
        cyl = int(np.count_nonzero(self.base.contains(box[in_disc])))
        report = ContainmentReport(gap=-self.boundary_samples().highest, above_hyperplane=above,
                                   in_cylinder=cyl, samples=samples)
        if above or cyl:
            raise GeometryViolationError(
                f"{self.label}: {above} samples above the hyperplane, {cyl} inside the excluded cylinder")
        return report
