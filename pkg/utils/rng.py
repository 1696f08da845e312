"""Counter-based random streams keyed by (seed, stream ids)"""
from typing import Sequence

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent Philox generator for ``seed`` and integer ``keys``.

    Identical keys give identical draws regardless of thread scheduling, which is
    what makes parallel sampling reproducible.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def spawn_streams(seed: int, count: int, *keys: int) -> Sequence[np.random.Generator]:
    """``count`` child generators derived by SeedSequence spawning"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    children = np.random.SeedSequence(entropy).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def uniform_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform unit vectors in R^dim, shape (count, dim)"""
    v = rng.standard_normal((count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return v / norms


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 32-bit child seed for ``seed`` and integer ``keys``"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
