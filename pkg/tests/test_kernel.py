import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import special

from kernel_quadrature.kernel import (FracParams, G_infinity, eval_G, eval_G_tilde,
                                      g_tilde_lipschitz_bound)
from kernel_quadrature.sphere import angular_rule, ball_volume, sphere_area
from utils.errors import DomainError


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, float("nan")])
def test_params_reject_order_outside_unit_interval(s):
    with pytest.raises(ValidationError):
        FracParams(n=1, s=s)


def test_g_infinity_is_half_beta(line_params):
    expected = 0.5 * special.beta(0.5, 0.75)
    assert math.isclose(G_infinity(line_params), expected, rel_tol=1e-14)
    assert eval_G(line_params, np.inf) == G_infinity(line_params)
    assert eval_G(line_params, -np.inf) == -G_infinity(line_params)


@pytest.mark.parametrize("n,s", [(1, 0.3), (2, 0.5), (3, 0.9)])
def test_g_is_odd_bit_for_bit(n, s):
    params = FracParams(n=n, s=s)
    t = np.linspace(0.0, 40.0, 401)
    assert np.array_equal(eval_G(params, -t), -eval_G(params, t))
    assert np.array_equal(eval_G_tilde(params, -t), -eval_G_tilde(params, t))


@pytest.mark.parametrize("n,s", [(1, 0.5), (2, 0.2), (3, 0.8)])
def test_beta_form_matches_angular_quadrature(n, s):
    params = FracParams(n=n, s=s)
    t = np.array([1e-3, 0.1, 0.7, 1.0, 3.0, 50.0])
    assert np.allclose(eval_G(params, t), eval_G(params, t, method="quad"), rtol=1e-10, atol=1e-14)


def test_g_near_zero_is_identity(plane_params):
    t = 1e-6
    assert math.isclose(eval_G(plane_params, t), t, rel_tol=1e-9)


def test_g_tilde_series_is_continuous_at_cutoff(line_params):
    below = eval_G_tilde(line_params, np.nextafter(0.5, 0.0))
    at = eval_G_tilde(line_params, 0.5)
    assert abs(below - at) < 1e-12


def test_g_tilde_small_argument_leading_terms(line_params):
    k = line_params.half_exponent
    t = 1e-3
    expected = -k * t ** 3 / 3.0 + 0.5 * k * (k + 1.0) * t ** 5 / 5.0
    assert math.isclose(eval_G_tilde(line_params, t), expected, rel_tol=1e-9)


def test_g_tilde_keeps_shape_and_scalars(plane_params):
    grid = np.linspace(-2.0, 2.0, 12).reshape(3, 4)
    assert eval_G_tilde(plane_params, grid).shape == (3, 4)
    assert isinstance(eval_G_tilde(plane_params, 0.25), float)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lipschitz_bound_holds_on_random_pairs(n, s):
    params = FracParams(n=n, s=s)
    rng = np.random.default_rng(17)
    a, b = rng.uniform(-10.0, 10.0, size=(2, 100_000))
    lhs = np.abs(eval_G_tilde(params, a) - eval_G_tilde(params, b))
    rhs = g_tilde_lipschitz_bound(params, a, b)
    assert np.all(lhs <= rhs * (1.0 + 1e-9) + 1e-14)


def test_undefined_arguments_raise(line_params):
    with pytest.raises(DomainError):
        eval_G(line_params, np.nan)
    with pytest.raises(DomainError):
        eval_G_tilde(line_params, np.inf)
    with pytest.raises(DomainError):
        eval_G(line_params, 1.0, method="simpson")


def test_sphere_and_ball_measures():
    assert math.isclose(sphere_area(1), 2.0)
    assert math.isclose(sphere_area(2), 2.0 * math.pi)
    assert math.isclose(sphere_area(3), 4.0 * math.pi)
    assert math.isclose(ball_volume(2), math.pi)
    assert math.isclose(ball_volume(3), 4.0 * math.pi / 3.0)


@pytest.mark.parametrize("n", [2, 3])
def test_angular_rule_integrates_constants(n):
    rule = angular_rule(n)
    # each weight covers an antipodal pair, so the pair sum of 1 + 1 is counted once per pair
    assert math.isclose(2.0 * float(rule.high.sum()), sphere_area(n), rel_tol=1e-10)
    assert np.allclose(np.linalg.norm(rule.directions, axis=1), 1.0)
