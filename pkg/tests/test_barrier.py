import math

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from barrier.constants import beta_constant, beta_sweep, one_minus_power
from barrier.export import certificates_csv, profile_csv
from barrier.profile import barrier_curvature, barrier_residual, decay_fit, envelope_check
from barrier.search import radius_grid, supersolution_radius
from barrier.spec import BarrierSpec
from curvature.evaluator import evaluate_curvature
from geometry.sets import BarrierSet
from utils.errors import DomainError
from utils.io import read_csv


def test_spec_rejects_exponents_outside_unit_interval():
    with pytest.raises(ValidationError):
        BarrierSpec(n=1, s=0.5, alpha=1.0)
    with pytest.raises(ValidationError):
        BarrierSpec(n=1, s=0.5, alpha=0.5, eps=0.0)


def test_spec_geometry():
    spec = BarrierSpec(n=2, s=0.5, alpha=0.5, eps=4.0)
    assert math.isclose(spec.coefficient, 2.0)
    assert math.isclose(spec.admissible_radius, 2.0)
    point = spec.boundary_point(9.0)
    assert np.allclose(point, [9.0, 0.0, 6.0])
    assert math.isclose(float(spec.height(np.array([[0.0, 9.0]]))[0]), 6.0)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.9])
def test_beta_vanishes_on_the_diagonal(s):
    assert beta_constant(1, s, s).value == 0.0


@pytest.mark.parametrize("s,alpha,sign", [(0.5, 0.2, 1), (0.5, 0.8, -1), (0.3, 0.1, 1), (0.7, 0.95, -1)])
def test_beta_sign_follows_s_minus_alpha(s, alpha, sign):
    beta = beta_constant(1, s, alpha)
    assert abs(beta.value) > 3.0 * beta.error_estimate
    assert np.sign(beta.value) == sign


def test_beta_is_continuous_across_the_diagonal():
    left = beta_constant(1, 0.5, 0.5 - 1e-4).value
    right = beta_constant(1, 0.5, 0.5 + 1e-4).value
    assert 0.0 < left < 1e-2
    assert -1e-2 < right < 0.0


def test_beta_domain_errors():
    with pytest.raises(DomainError):
        beta_constant(1, 1.2, 0.5)
    with pytest.raises(DomainError):
        beta_constant(2, 0.5, 1.1)


@pytest.mark.slow
def test_beta_sign_in_the_plane(cfg):
    beta = beta_constant(2, 0.5, 0.2, cfg)
    assert beta.value > 3.0 * beta.error_estimate


def test_beta_sweep_table(cfg):
    frame = beta_sweep([0.3, 0.7], [0.1, 0.3, 0.9], cfg=cfg)
    assert list(frame.columns[:3]) == ["n", "s", "alpha"]
    assert len(frame) == 6
    assert frame["agrees"].all()
    diagonal = frame[(frame["s"] == 0.3) & (frame["alpha"] == 0.3)]
    assert diagonal["expected_sign"].iloc[0] == 0


def test_barrier_radius_floor(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.5)
    with pytest.raises(DomainError):
        barrier_curvature(spec, 0.1, cfg)


def test_barrier_curvature_scales_with_eps(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    base = barrier_curvature(spec, 10.0, cfg)
    scaled = barrier_curvature(spec.rescaled(2.0), 20.0, cfg)
    assert math.isclose(scaled.value, 2.0 ** -0.5 * base.value, rel_tol=1e-12)


def test_direct_and_decomposed_paths_agree(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    direct = barrier_curvature(spec, 20.0, cfg)
    decomposed = barrier_curvature(spec, 20.0, cfg, method="decomposed")
    assert direct.agrees_with(decomposed)


def test_residual_is_lower_order(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    full = barrier_curvature(spec, 200.0, cfg)
    residual = barrier_residual(spec, 200.0, cfg)
    assert abs(residual.value) < 0.1 * abs(full.value)
    # below the diagonal the leading term makes the barrier a strict supersolution far out
    assert full.value > 3.0 * full.error_estimate


def test_barrier_set_dispatches_to_profile(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    via_set = evaluate_curvature(BarrierSet(spec=spec), spec.boundary_point(10.0), spec.params, cfg)
    direct = barrier_curvature(spec, 10.0, cfg)
    assert math.isclose(via_set.value, direct.value, rel_tol=1e-12)


def test_barrier_set_rejects_mismatched_order(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    other = BarrierSpec(n=1, s=0.7, alpha=0.3).params
    with pytest.raises(DomainError):
        evaluate_curvature(BarrierSet(spec=spec), spec.boundary_point(10.0), other, cfg)


@pytest.mark.slow
def test_decay_fit_recovers_power_law(cfg, tmp_path):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    profile = decay_fit(spec, np.geomspace(30.0, 3000.0, 5), cfg)
    # five radii only, so wider than the 0.05 of a full profile run
    assert abs(profile.fitted_exponent - profile.expected_exponent) < 0.1
    assert profile.envelope_constant > 0.0
    path = tmp_path / "profile.csv"
    path.write_text(profile_csv(profile))
    frame = read_csv(path)
    assert list(frame.columns) == ["r", "H", "err", "residual"]
    assert len(frame) == 5

    report = envelope_check(spec.rescaled(0.5), [15.0, 150.0], profile.envelope_constant, cfg)
    assert report.passed


def test_decay_fit_needs_two_decades(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    with pytest.raises(DomainError):
        decay_fit(spec, [10.0, 50.0], cfg)


def test_radius_grid_is_geometric():
    grid = radius_grid(2.0, 1000.0)
    assert grid[0] == 1.0
    assert grid[-1] == 512.0
    assert np.allclose(grid[1:] / grid[:-1], 2.0)


@pytest.mark.slow
def test_supersolution_radius_below_the_diagonal(cfg):
    result = supersolution_radius(0.5, 0.3, cfg, cap=1e3)
    assert result.radius >= 1.0
    assert all(c.positive for c in result.certificates)
    assert result.certificates[0].r == result.radius
    text = certificates_csv(result)
    assert "supersolution" in text


def test_supersolution_radius_preconditions(cfg):
    with pytest.raises(DomainError):
        supersolution_radius(0.5, 0.7, cfg)
    with pytest.raises(DomainError):
        supersolution_radius(0.5, 0.3, cfg, n=2)


def test_sweep_frame_is_plain_pandas(cfg):
    frame = beta_sweep([0.5], [0.25], cfg=cfg)
    assert isinstance(frame, pd.DataFrame)
    assert bool(frame["resolved"].iloc[0])


def test_one_minus_power_keeps_small_offsets():
    h = np.array([[0.3, -0.4], [-1.0, 0.0], [1e-9, 2e-9]])
    values = one_minus_power(h, 0.5)
    assert math.isclose(values[0], 1.0 - math.hypot(1.3, -0.4) ** 0.5, rel_tol=1e-12)
    assert values[1] == 1.0
    # 1 - (1 + 2 h_1)^(alpha/2) ~ -alpha h_1, which the direct form rounds away
    assert math.isclose(values[2], -0.5e-9, rel_tol=1e-6)


@pytest.mark.parametrize("s,alpha", [(0.5, 0.5), (0.5, 0.25), (0.7, 0.4), (0.7, 0.3), (0.5, 0.3)])
@pytest.mark.parametrize("r", [2.0, 10.0, 50.0])
def test_barrier_curvature_converges_on_the_line(s, alpha, r, cfg):
    spec = BarrierSpec(n=1, s=s, alpha=alpha)
    direct = barrier_curvature(spec, r, cfg)
    decomposed = barrier_curvature(spec, r, cfg, method="decomposed")
    assert direct.error_estimate < 1e-6 * max(1.0, abs(direct.value))
    assert direct.agrees_with(decomposed)


@pytest.mark.slow
@pytest.mark.parametrize("s,alpha", [(0.5, 0.5), (0.3, 0.6)])
def test_beta_converges_in_the_plane(s, alpha, cfg):
    beta = beta_constant(2, s, alpha, cfg)
    assert np.isfinite(beta.value)
    assert abs(beta.value) > 3.0 * beta.error_estimate


@pytest.mark.slow
@pytest.mark.parametrize("n,s,alpha", [(2, 0.5, 0.5), (2, 0.3, 0.6), (1, 0.7, 0.4)])
def test_decay_law_over_two_decades(n, s, alpha, cfg):
    profile = decay_fit(BarrierSpec(n=n, s=s, alpha=alpha), np.geomspace(10.0, 1000.0, 7), cfg)
    assert abs(profile.fitted_exponent - profile.expected_exponent) < 0.05
    assert profile.residual_exponent <= profile.expected_residual_exponent + 0.1


@pytest.mark.slow
@pytest.mark.parametrize("s,alpha", [(0.5, 0.25), (0.7, 0.3)])
def test_supersolution_radius_is_certified(s, alpha, cfg):
    result = supersolution_radius(s, alpha, cfg)
    assert math.isfinite(result.radius) and result.radius >= 1.0
    assert result.certificates
    assert all(c.value - 3.0 * c.error > 0.0 for c in result.certificates)
