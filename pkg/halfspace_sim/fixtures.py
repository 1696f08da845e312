"""Candidate sets used by the slide and density checks"""
from dataclasses import dataclass

import numpy as np

from geometry.farfield import FarField, FarFieldBound
from geometry.profiles import DecayProfile
from geometry.sets import Ball, GeomSetBase, HalfSpace, Subgraph
from halfspace_sim.candidate import CandidateSet, UpperEnvelopeSampler
from utils.errors import DomainError

# dent of the decaying fixtures: u(x') = -5 / sqrt(1 + |x'|^2) stays below -2 on |x'| <= 2
DENT_DEPTH = 5.0
DENT_DECAY = 1.0
NOTCH = (-1.5, -1.2)


def _default_sampler(n: int, floor: float) -> UpperEnvelopeSampler:
    if n == 1:
        return UpperEnvelopeSampler(horizon=100.0, resolution=0.05, floor=floor, step=0.02)
    if n == 2:
        return UpperEnvelopeSampler(horizon=40.0, resolution=0.5, floor=floor, step=0.05)
    raise DomainError("built-in candidates cover n = 1 and n = 2")


def _e_n(dim: int) -> list:
    v = [0.0] * dim
    v[-1] = 1.0
    return v


def _lower(dim: int, level: float) -> FarFieldBound:
    return FarFieldBound(kind="halfspace", normal=_e_n(dim), offset=level)


def halfspace_fixture(n: int, depth: float = 2.5) -> CandidateSet:
    """{x_N < -depth}: the flat case, for which every eps_j vanishes once 1/j < depth"""
    if depth <= 2.0:
        raise DomainError("the half-space must clear the excluded cylinder (depth > 2)")
    dim = n + 1
    base = HalfSpace.lower(dim, -depth)
    far = FarField.halfspace(_e_n(dim), -depth, [0.0] * dim, 1.0)
    return CandidateSet(base=base, n=n, sampler=_default_sampler(n, -depth - 2.0), far_field=far,
                        label=f"halfspace(depth={depth})")


def notched_fixture(n: int, far_radius: float = 1.0e3) -> CandidateSet:
    """Subgraph of -5 (1 + |x'|^2)^(-1/2) with the slab NOTCH removed.

    The notch only bites where the dent has risen above its top, so the cone
    below a far touching point crosses an exterior slab.
    """
    dim = n + 1
    dent = Subgraph(profile=DecayProfile(depth=DENT_DEPTH, gamma=DENT_DECAY, dim=n), n=n)
    lo, hi = NOTCH
    slab = HalfSpace.lower(dim, hi) - HalfSpace.lower(dim, lo)
    base = dent - slab
    # outside B_R(0) every point with |x'| <= R' = sqrt(R^2 - depth^2) sits above 0 or below -depth
    r_flat = np.sqrt(max(far_radius ** 2 - DENT_DEPTH ** 2, 0.0))
    level = min(lo, -DENT_DEPTH * (1.0 + r_flat ** 2) ** (-0.5 * DENT_DECAY))
    far = FarField.between(_lower(dim, level), _lower(dim, 0.0), [0.0] * dim, far_radius)
    return CandidateSet(base=base, n=n, sampler=_default_sampler(n, -DENT_DEPTH - 1.0), far_field=far,
                        label="notched-dent")


def sheet_fixture(n: int, thickness: float = 0.3) -> CandidateSet:
    """Thin sheet {u - thickness < x_N < u} under the same power-law dent u.

    Its curvature is far from zero, so the slide manufactures the contradiction.
    """
    if thickness <= 0:
        raise DomainError("sheet thickness must be positive")
    dim = n + 1
    top = Subgraph(profile=DecayProfile(depth=DENT_DEPTH, gamma=DENT_DECAY, dim=n), n=n)
    shift = [0.0] * n + [-thickness]
    base = top - top.translated(shift)
    far = FarField.between(FarFieldBound(kind="empty"), _lower(dim, 0.0), [0.0] * dim, 1.0)
    return CandidateSet(base=base, n=n, sampler=_default_sampler(n, -DENT_DEPTH - 1.0), far_field=far,
                        label=f"sheet(thickness={thickness})")


@dataclass
class TouchedBallFixture:
    set: GeomSetBase
    q: np.ndarray
    ball: Ball


def touched_ball_fixture(n: int, radius: float = 1.0) -> TouchedBallFixture:
    """E = B_radius(radius e_N), touched from inside by itself at the origin"""
    dim = n + 1
    center = [0.0] * n + [float(radius)]
    ball = Ball(center=center, radius=radius)
    return TouchedBallFixture(set=ball, q=np.zeros(dim), ball=ball)
