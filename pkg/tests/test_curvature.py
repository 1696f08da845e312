import math

import numpy as np
import pytest
from scipy import special

from curvature.checks import ball_excision_exact, excision_contribution, excision_order_fit, scaling_translation_check
from curvature.correction import correction_integral
from curvature.evaluator import curvature_ball, curvature_indicator, curvature_subgraph, evaluate_curvature
from curvature.viscosity import touching_test
from geometry.farfield import FarField, FarFieldBound
from geometry.profiles import AffineProfile, BumpProfile, ConstantProfile, DecayProfile, PowerProfile, callable_profile
from geometry.sets import Ball, HalfSpace, Subgraph
from kernel_quadrature.kernel import FracParams
from utils.errors import DomainError


def test_flat_graph_has_zero_curvature(line_params, cfg):
    result = curvature_subgraph(ConstantProfile(level=0.0), [0.0], line_params, cfg)
    assert result.value == 0.0
    assert result.method == "graph-formula"


@pytest.mark.parametrize("slope", [[0.7], [-2.0]])
def test_affine_graph_is_flat(slope, line_params, cfg):
    result = curvature_subgraph(AffineProfile(slope=slope, intercept=0.2), [0.3], line_params, cfg)
    assert abs(result.value) < 1e-6


@pytest.mark.parametrize("normal", [[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
def test_halfspace_indicator_is_exactly_flat(normal, line_params, cfg):
    result = curvature_indicator(HalfSpace(normal=normal, offset=0.0), [0.0, 0.0], line_params, cfg)
    assert result.value == 0.0


def test_ball_closed_form_on_the_line(line_params):
    expected = 2.0 ** -0.5 / 0.5 * 2.0 * special.beta(0.5, 0.25)
    assert math.isclose(curvature_ball(line_params, 1.0).value, expected, rel_tol=1e-14)


@pytest.mark.parametrize("n,s", [(1, 0.3), (2, 0.5), (3, 0.8)])
def test_ball_scaling_and_complement(n, s):
    params = FracParams(n=n, s=s)
    unit = curvature_ball(params, 1.0).value
    assert unit > 0.0
    assert math.isclose(curvature_ball(params, 4.0).value, 4.0 ** -s * unit, rel_tol=1e-14)
    assert curvature_ball(params, 1.0, inside=False).value == -unit


def test_dispatch_strips_translations_and_dilations(plane_params, cfg):
    ball = Ball(center=[0.0, 0.0, 0.0], radius=1.0)
    moved = ball.translated([1.0, -1.0, 2.0])
    value = evaluate_curvature(moved, [1.0, -1.0, 3.0], plane_params, cfg).value
    assert math.isclose(value, curvature_ball(plane_params, 1.0).value, rel_tol=1e-14)
    grown = evaluate_curvature(ball.scaled(3.0), [0.0, 0.0, 3.0], plane_params, cfg).value
    assert math.isclose(grown, curvature_ball(plane_params, 3.0).value, rel_tol=1e-12)
    outside = evaluate_curvature(~ball, [0.0, 0.0, 1.0], plane_params, cfg).value
    assert outside == -curvature_ball(plane_params, 1.0).value


def test_curvature_rejects_off_boundary_point(line_params, cfg):
    with pytest.raises(DomainError):
        evaluate_curvature(Ball(center=[0.0, 0.0], radius=1.0), [0.0, 0.5], line_params, cfg)


def test_graph_formula_needs_bounded_growth(line_params, cfg):
    steep = PowerProfile(coefficient=1.0, exponent=1.5, center=[0.0])
    with pytest.raises(DomainError):
        curvature_subgraph(steep, [1.0], line_params, cfg)
    cusp = PowerProfile(coefficient=1.0, exponent=0.5, center=[0.0])
    with pytest.raises(DomainError):
        curvature_subgraph(cusp, [0.0], line_params, cfg)


def test_subtracting_the_linear_part_leaves_the_value(line_params, cfg):
    dent = DecayProfile(depth=1.0, gamma=1.0, dim=1)
    plain = curvature_subgraph(dent, [0.7], line_params, cfg)
    reduced = curvature_subgraph(dent, [0.7], line_params, cfg, subtract_linear=True)
    assert abs(plain.value - reduced.value) <= 3.0 * (plain.error_estimate + reduced.error_estimate) + 1e-6


def test_excision_contribution_of_ball_matches_closed_form(line_params, cfg):
    ball = Ball(center=[0.0, 1.0], radius=1.0)
    exact = ball_excision_exact(line_params, 0.2)
    sampled = excision_contribution(ball, [0.0, 0.0], 0.2, line_params, cfg)
    assert exact > 0.0
    assert abs(sampled.value - exact) <= 4.0 * sampled.error_estimate + 0.05 * exact


@pytest.mark.slow
def test_excision_order_is_one_minus_s(line_params, cfg):
    ball = Ball(center=[0.0, 1.0], radius=1.0)
    fit = excision_order_fit(ball, [0.0, 0.0], [0.05, 0.1, 0.2, 0.4], line_params, cfg)
    assert abs(fit.slope - fit.expected) < 0.1


def test_ball_correction_agrees_with_box_sampling(line_params, cfg):
    region = Ball(center=[0.4, -2.0], radius=0.5)
    exact = correction_integral(region, [0.0, 0.0], line_params, cfg)
    sampled = correction_integral(region | region, [0.0, 0.0], line_params, cfg)
    assert exact.diagnostics["method"] == "ball-caps"
    assert sampled.diagnostics["method"] == "box-sampling"
    assert abs(exact.value - sampled.value) <= 3.0 * sampled.error_estimate + 10.0 * exact.error_estimate


def test_correction_is_singular_at_the_region(line_params, cfg):
    with pytest.raises(DomainError):
        correction_integral(Ball(center=[0.0, -0.5], radius=0.5), [0.0, 0.0], line_params, cfg)


@pytest.mark.slow
def test_removing_a_ball_adds_twice_the_correction(line_params, cfg):
    F = HalfSpace.lower(2, 0.0)
    D = Ball(center=[0.3, -1.5], radius=0.4)
    far = FarField.halfspace([0.0, 1.0], 0.0, [0.0, 0.0], 4.0)
    lhs = curvature_indicator(F - D, [0.0, 0.0], line_params, cfg, far)
    rhs = correction_integral(D, [0.0, 0.0], line_params, cfg)
    assert abs(lhs.value - 2.0 * rhs.value) <= 3.0 * (lhs.error_estimate + 2.0 * rhs.error_estimate)


@pytest.mark.slow
def test_graph_and_indicator_paths_agree(line_params, cfg):
    dent = Subgraph(profile=DecayProfile(depth=1.0, gamma=1.0, dim=1), n=1)
    xp = 0.5
    point = [xp, float(dent.profile.value(np.array([[xp]]))[0])]
    graph = evaluate_curvature(dent, point, line_params, cfg)
    lower = FarFieldBound(kind="halfspace", normal=[0.0, 1.0], offset=-1.0)
    upper = FarFieldBound(kind="halfspace", normal=[0.0, 1.0], offset=0.0)
    far = FarField.between(lower, upper, [0.0, 0.0], 50.0)
    sampled = curvature_indicator(dent, point, line_params, cfg, far)
    assert graph.agrees_with(sampled, factor=4.0)


def test_scaling_identity_on_ball(plane_params, cfg):
    report = scaling_translation_check(Ball(center=[0.0, 0.0, 0.0], radius=1.0), [0.0, 0.0, 1.0], plane_params,
                                       cfg, factor=2.0, vector=[1.0, 2.0, 3.0])
    assert report.passed


def test_inner_touching_ball_is_consistent(line_params, cfg):
    E = HalfSpace.lower(2, 0.0)
    F = Ball(center=[0.0, -1.0], radius=1.0)
    report = touching_test(E, F, [0.0, 0.0], line_params, cfg, side="inner")
    assert report.verdict == "consistent"
    assert report.curvature.value > 0.0


def test_outer_test_set_is_consistent(line_params, cfg):
    E = HalfSpace.lower(2, 0.0)
    F = ~Ball(center=[0.0, 1.0], radius=1.0)
    report = touching_test(E, F, [0.0, 0.0], line_params, cfg, side="outer")
    assert report.verdict == "consistent"
    assert report.curvature.value < 0.0


def test_test_set_sticking_out_is_not_touching(line_params, cfg):
    E = HalfSpace.lower(2, 0.0)
    F = Ball(center=[0.0, 1.0], radius=1.0)
    report = touching_test(E, F, [0.0, 0.0], line_params, cfg, side="inner")
    assert report.verdict == "not-touching"
    assert report.violations > 0


def _dilated_profile(kind: str, lam: float):
    """Profile of lam * E written out in plain coordinates"""
    if kind == "power":
        # lam * {x_N < |x'|^(1/2)} = {x_N < lam^(1/2) |x'|^(1/2)}
        return PowerProfile(coefficient=lam ** 0.5, exponent=0.5, center=[0.0])
    return BumpProfile(height=-lam, radius=2.0 * lam, center=[0.0], base=0.0)


@pytest.mark.parametrize("kind,xp", [("power", 1.0), ("bump", 0.8)])
def test_graph_curvature_scales_like_lambda_to_minus_s(kind, xp, line_params, cfg):
    lams = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    values = []
    for lam in lams:
        result = curvature_subgraph(_dilated_profile(kind, lam), [lam * xp], line_params, cfg)
        assert result.error_estimate < 1e-3 * abs(result.value)
        values.append(result.value)
    values = np.array(values)
    assert np.all(np.sign(values) == np.sign(values[0]))
    slope = np.polyfit(np.log(lams), np.log(np.abs(values)), 1)[0]
    assert abs(slope + line_params.s) < 0.02


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_indicator_curvature_is_invariant_under_rigid_motions(line_params, cfg):
    centres = np.array([[0.0, 0.0], [2.5, 0.3]])
    radii = [1.0, 0.6]
    x = np.array([math.cos(2.0), math.sin(2.0)])

    def pair(rotation, shift):
        moved = rotation @ centres.T
        pieces = [Ball(center=(moved[:, k] + shift).tolist(), radius=r) for k, r in enumerate(radii)]
        return pieces[0] | pieces[1], rotation @ x + shift

    base_set, base_x = pair(np.eye(2), np.zeros(2))
    base = curvature_indicator(base_set, base_x, line_params, cfg)
    for theta, shift in [(0.7, [3.0, -1.0]), (-2.2, [-10.0, 4.0])]:
        moved_set, moved_x = pair(_rotation(theta), np.asarray(shift))
        moved = curvature_indicator(moved_set, moved_x, line_params, cfg)
        assert base.agrees_with(moved, factor=4.0)
    mirror = np.diag([1.0, -1.0])
    mirrored = curvature_indicator(*pair(mirror, np.zeros(2)), line_params, cfg)
    assert base.agrees_with(mirrored, factor=4.0)


@pytest.mark.parametrize("profile,xp", [
    (PowerProfile(coefficient=2.0, exponent=0.7, center=[0.5, -0.2]), [1.5, 1.0]),
    (BumpProfile(height=1.5, radius=2.0, center=[0.0, 0.0]), [0.4, -0.9]),
    (DecayProfile(depth=3.0, gamma=1.3, dim=2), [2.0, -1.0]),
    (AffineProfile(slope=[0.3, -1.2], intercept=4.0), [7.0, 2.0]),
])
def test_profile_increments_match_value_differences(profile, xp):
    h = np.random.default_rng(6).normal(scale=0.3, size=(200, 2))
    xp = np.asarray(xp)
    direct = profile.value(xp + h) - profile.value(xp[None, :])[0]
    assert profile.exact_increment
    assert np.allclose(profile.increment(xp, h), direct, rtol=1e-10, atol=1e-13)


def test_exact_increments_resolve_tiny_offsets():
    dent = DecayProfile(depth=5.0, gamma=1.0, dim=1)
    h = np.array([[1e-10]])
    # du = depth * gamma * x / (1 + x^2)^(3/2) * h at x = 2
    expected = 5.0 * 2.0 / 5.0 ** 1.5 * 1e-10
    assert math.isclose(float(dent.increment([2.0], h)[0]), expected, rel_tol=1e-8)
    assert not callable_profile(lambda xp: xp[:, 0] ** 2, growth=0.0).exact_increment
