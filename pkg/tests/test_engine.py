import math

import numpy as np
import pytest
from pydantic import ValidationError

from kernel_quadrature.engine import Integrand, PVResult, QuadConfig, pv_integrate_1d, pv_integrate_nd
from utils.errors import ConvergenceError, DomainError


def test_config_rejects_inverted_radii():
    with pytest.raises(ValidationError):
        QuadConfig(excision_start=10.0, tail_radius=1.0)


def test_overrides_skip_missing_values(cfg):
    updated = cfg.with_overrides(rel_tol=1e-4, seed=None)
    assert updated.rel_tol == 1e-4
    assert updated.seed == cfg.seed


def test_cauchy_principal_value_on_interval(cfg):
    # P.V. int_{-1}^{2} dt / t = log 2
    result = pv_integrate_1d(lambda t: 1.0 / t, 0.0, cfg, domain=(-1.0, 2.0))
    assert abs(result.value - math.log(2.0)) < 1e-8
    assert result.error_estimate < 1e-6


def test_odd_kernel_on_the_line_vanishes(cfg):
    result = pv_integrate_1d(lambda t: np.sign(t) * np.abs(t) ** -1.5, 0.0, cfg, decay_exponent=0.5)
    assert abs(result.value) < 1e-10


def test_singular_point_outside_domain_is_rejected(cfg):
    with pytest.raises(DomainError):
        pv_integrate_1d(lambda t: 1.0 / t, 3.0, cfg, domain=(-1.0, 2.0))


def test_gaussian_in_the_plane(cfg):
    def gaussian(y):
        return np.exp(-np.sum(y * y, axis=1))

    result = pv_integrate_nd(gaussian, [0.3, -0.2], cfg, decay_exponent=4.0)
    assert math.isclose(result.value, math.pi, rel_tol=1e-6)


def test_dipole_principal_value_in_three_dimensions(cfg):
    # y_1 / |y|^4 is odd about the origin
    def dipole(y):
        r = np.linalg.norm(y, axis=1)
        return y[:, 0] / r ** 4 * np.exp(-r)

    result = pv_integrate_nd(dipole, [0.0, 0.0, 0.0], cfg, decay_exponent=3.0)
    assert abs(result.value) < 1e-9


def test_tail_needs_a_registration(cfg):
    with pytest.raises(DomainError):
        pv_integrate_nd(lambda y: np.ones(y.shape[0]), [0.0, 0.0], cfg)


def test_non_finite_integrand_is_a_domain_error(cfg):
    integrand = Integrand(func=lambda y: np.full(y.shape[0], np.nan), support_radius=1.0, label="nan")
    with pytest.raises(DomainError):
        pv_integrate_nd(integrand, [0.0, 0.0], cfg)


def test_budget_exhaustion_carries_partial_result():
    tight = QuadConfig(max_evaluations=50, seed=1)
    with pytest.raises(ConvergenceError) as info:
        pv_integrate_nd(lambda y: np.exp(-np.sum(y * y, axis=1)), [0.0, 0.0], tight, decay_exponent=2.0)
    assert isinstance(info.value.partial, PVResult)


def test_linear_combination_adds_errors():
    a = PVResult(value=1.0, error_estimate=0.1, evaluations=3, truncation_radius=2.0)
    b = PVResult(value=2.0, error_estimate=0.2, evaluations=5, truncation_radius=4.0)
    combined = PVResult.linear_combination([(2.0, a), (-1.0, b)])
    assert combined.value == 0.0
    assert math.isclose(combined.error_estimate, 0.4)
    assert combined.evaluations == 8
    assert combined.truncation_radius == 4.0


def _weak_singularity(h):
    r = np.linalg.norm(h, axis=1)
    return r ** -1.5 * np.exp(-r)


def _odd_singularity(h):
    r = np.linalg.norm(h, axis=1)
    return h[:, 0] * r ** -3.5 * np.exp(-r)


def test_error_estimate_covers_the_true_error(cfg):
    # int_{R^2} |y|^{-3/2} e^{-|y|} dy = 2 pi Gamma(1/2)
    weak = pv_integrate_nd(_weak_singularity, [0.0, 0.0], cfg, decay_exponent=4.0)
    exact = 2.0 * math.pi * math.sqrt(math.pi)
    assert abs(weak.value - exact) <= weak.error_estimate
    assert weak.error_estimate < 1e-4 * exact

    gaussian = pv_integrate_nd(lambda y: np.exp(-np.sum(y * y, axis=1)), [0.1, 0.2, -0.3], cfg, decay_exponent=4.0)
    assert abs(gaussian.value - math.pi ** 1.5) <= gaussian.error_estimate


def test_principal_value_is_linear(cfg):
    def bump(y):
        return np.exp(-np.sum((y - [0.7, -0.4]) ** 2, axis=1))

    f = pv_integrate_nd(lambda y: _weak_singularity(y) + _odd_singularity(y), [0.0, 0.0], cfg, decay_exponent=4.0)
    g = pv_integrate_nd(bump, [0.0, 0.0], cfg, decay_exponent=4.0)
    mixed = pv_integrate_nd(lambda y: 2.0 * (_weak_singularity(y) + _odd_singularity(y)) - 3.0 * bump(y),
                            [0.0, 0.0], cfg, decay_exponent=4.0)
    expected = 2.0 * f.value - 3.0 * g.value
    assert abs(mixed.value - expected) <= mixed.error_estimate + 2.0 * f.error_estimate + 3.0 * g.error_estimate


def test_local_integrand_is_evaluated_at_offsets(cfg):
    far = [3.0e4, -1.0e4]
    seen = []

    def weak(h):
        seen.append(np.max(np.abs(h)))
        return _weak_singularity(h)

    local = pv_integrate_nd(Integrand(func=weak, decay_exponent=4.0, local=True, label="weak"), far, cfg)
    assert max(seen) < 1.0e4
    assert abs(local.value - 2.0 * math.pi * math.sqrt(math.pi)) <= local.error_estimate


def test_local_odd_integrand_cancels_exactly_far_from_the_origin(cfg):
    odd = Integrand(func=_odd_singularity, decay_exponent=4.0, local=True, label="odd")
    result = pv_integrate_nd(odd, [3.0e4, -1.0e4], cfg)
    assert result.value == 0.0
    assert result.error_estimate < 1e-9
