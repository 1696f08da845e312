"""Grid-scale normalization of indicator rasters.

A set and any modification of it on a null set are the same object, so grid
representatives are first cleaned by a 3^N majority vote and then classified
by local density: interior when at least 15/16 of the neighbourhood is in the
set, exterior when at most 1/16 is, boundary when the density stays
intermediate at every tested scale. The finest scale is 3 cells; no claim
is made about scales below the grid.
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy import ndimage

from geometry.sets import GeomSetBase

INTERIOR = 1
BOUNDARY = 0
EXTERIOR = -1

INTERIOR_DENSITY = 15.0 / 16.0
EXTERIOR_DENSITY = 1.0 / 16.0


@dataclass
class ClassifiedGrid:
    labels: np.ndarray
    lo: np.ndarray
    resolution: float
    scales: Tuple[int, ...] = (3, 5)
    cleaned: np.ndarray = field(default=None, repr=False)

    def centers(self, mask: np.ndarray) -> np.ndarray:
        """Cell centres of the cells selected by ``mask``, shape (m, N)"""
        idx = np.argwhere(mask)
        return self.lo + (idx + 0.5) * self.resolution

    def boundary_centers(self) -> np.ndarray:
        return self.centers(self.labels == BOUNDARY)

    def counts(self) -> dict:
        return {"interior": int(np.sum(self.labels == INTERIOR)),
                "boundary": int(np.sum(self.labels == BOUNDARY)),
                "exterior": int(np.sum(self.labels == EXTERIOR))}


def rasterize(geom: GeomSetBase, lo: Sequence[float], hi: Sequence[float], resolution: float) -> Tuple[np.ndarray, np.ndarray]:
    """Indicator of ``geom`` sampled at cell centres of a uniform grid"""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    shape = tuple(int(np.ceil(v)) for v in (hi - lo) / resolution)
    axes = [lo[i] + (np.arange(shape[i]) + 0.5) * resolution for i in range(lo.shape[0])]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    grid = np.asarray(geom.contains(pts), dtype=bool).reshape(shape)
    return grid, lo


def normalize_representative(grid: np.ndarray, resolution: float, lo: Sequence[float] = None,
                             scales: Tuple[int, ...] = (3, 5)) -> ClassifiedGrid:
    """Classify cells of a boolean raster into interior / exterior / boundary"""
    grid = np.asarray(grid, dtype=bool)
    lo = np.zeros(grid.ndim) if lo is None else np.asarray(lo, dtype=float)
    indicator = grid.astype(float)
    vote = ndimage.uniform_filter(indicator, size=3, mode="nearest")
    cleaned = vote > 0.5
    base = cleaned.astype(float)
    densities = [ndimage.uniform_filter(base, size=k, mode="nearest") for k in scales]

    labels = np.full(grid.shape, BOUNDARY, dtype=np.int8)
    undecided = np.ones(grid.shape, dtype=bool)
    for density in densities:
        interior = undecided & (density >= INTERIOR_DENSITY)
        exterior = undecided & (density <= EXTERIOR_DENSITY)
        labels[interior] = INTERIOR
        labels[exterior] = EXTERIOR
        undecided &= ~(interior | exterior)
    return ClassifiedGrid(labels=labels, lo=lo, resolution=float(resolution), scales=tuple(scales),
                          cleaned=cleaned)
