import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from kernel_quadrature.engine import QuadConfig  # noqa: E402
from kernel_quadrature.kernel import FracParams  # noqa: E402


@pytest.fixture
def cfg():
    """Deterministic single-threaded settings small enough for unit tests"""
    return QuadConfig(rel_tol=1e-7, abs_tol=1e-10, samples=4096, seed=20240601, threads=1)


@pytest.fixture
def line_params():
    return FracParams(n=1, s=0.5)


@pytest.fixture
def plane_params():
    return FracParams(n=2, s=0.5)
