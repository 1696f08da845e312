import json
import math

import numpy as np
import pytest

from barrier.profile import barrier_curvature
from barrier.spec import BarrierSpec
from geometry.sets import Ball, HalfSpace
from halfspace_sim.candidate import BoundarySamples, CandidateSet
from halfspace_sim.density import density_check, touched_ball_scale
from halfspace_sim.fixtures import halfspace_fixture, notched_fixture, sheet_fixture, touched_ball_fixture
from halfspace_sim.sliding import cone_inclusion_test, ell_schedule, epsilon_infimum, touching_points
from halfspace_sim.trace import TRACE_SCHEMA, run_slide
from halfspace_sim.witness import repaired_supersolution_check, witness_region
from utils.errors import DomainError, GeometryViolationError, SamplingResolutionError


def test_epsilon_infimum_of_a_single_sample():
    # 0.5 = eps^(1/2) * 2^(1/2)  =>  eps = (0.5 / sqrt 2)^2
    assert math.isclose(epsilon_infimum(np.array([[2.0, 0.5]]), 0.5), 0.125, rel_tol=1e-14)


def test_epsilon_infimum_ignores_points_below_the_hyperplane():
    assert epsilon_infimum(np.array([[0.0, -1.0], [5.0, -0.1]]), 0.3) == 0.0


def test_epsilon_infimum_flags_the_cylinder():
    with pytest.raises(GeometryViolationError):
        epsilon_infimum(np.array([[0.5, 0.1], [3.0, 0.2]]), 0.5, cutoff=1.0)
    with pytest.raises(GeometryViolationError):
        epsilon_infimum(np.array([[0.0, 0.1]]), 0.5)
    with pytest.raises(DomainError):
        epsilon_infimum(np.array([[1.0, 0.1]]), 1.0)


def test_touching_points_are_ordered_by_gap():
    samples = np.array([[9.0, 3.0 + 1e-10], [1.0, 5.0], [4.0, 2.0]])
    found = touching_points(samples, 1.0, 0.5, tol=1e-8)
    assert found.tolist() == [[4.0, 2.0], [9.0, 3.0 + 1e-10]]


def test_touching_points_need_a_resolved_contact():
    with pytest.raises(SamplingResolutionError):
        touching_points(np.array([[4.0, 1.0]]), 1.0, 0.5, tol=1e-8)
    with pytest.raises(DomainError):
        touching_points(np.array([[4.0, 1.0]]), 0.0, 0.5, tol=1e-8)


def test_ell_schedule():
    assert math.isclose(ell_schedule(10_000, 1.0e4, 2, 0.5), 0.56233, rel_tol=1e-4)
    assert math.isclose(ell_schedule(1, 0.0, 1, 0.5), 2.0 ** (-0.5 / 6.0))
    with pytest.raises(DomainError):
        ell_schedule(0, 1.0, 1, 0.5)


def test_cone_inside_the_set_is_graph_type():
    test = cone_inclusion_test(HalfSpace.lower(2, 0.0), [3.0, -0.5], 0.5, 512, seed=1)
    assert test.case_tag == "graph-type"
    assert test.outside == 0


def test_cone_missing_the_set_is_empty():
    test = cone_inclusion_test(HalfSpace.lower(2, -100.0), [3.0, 0.0], 0.5, 512, seed=1)
    assert test.case_tag == "cone-empty"
    assert test.inside == 0


def test_cone_crossing_the_boundary_locates_it():
    test = cone_inclusion_test(HalfSpace.lower(2, -1.0), [3.0, 0.0], 0.5, 2048, seed=2)
    assert test.case_tag == "cone-hits-boundary"
    assert not test.indeterminate
    assert abs(test.q[-1] + 1.0) < 1e-6


def test_cone_slope_must_be_a_fraction():
    with pytest.raises(DomainError):
        cone_inclusion_test(HalfSpace.lower(2, 0.0), [3.0, 0.0], 1.5, 16, seed=0)


def test_empty_cone_witness_is_a_certified_ball():
    witness = witness_region("cone-empty", [3.0, 0.0], 0.5, HalfSpace.lower(2, -100.0), samples=1024)
    assert witness.center == [3.0, -1.5]
    assert witness.radius == 0.375
    assert not witness.minus_candidate
    assert witness.distance > 0.0 and witness.cone_margin < 0.0
    assert math.isclose(witness.volume.value, math.pi * 0.375 ** 2)


def test_boundary_hit_witness_needs_q():
    with pytest.raises(DomainError):
        witness_region("cone-hits-boundary", [3.0, 0.0], 0.5, HalfSpace.lower(2, -1.0))
    with pytest.raises(DomainError):
        witness_region("sideways", [3.0, 0.0], 0.5, HalfSpace.lower(2, -1.0))


def test_repair_adds_twice_the_correction(cfg):
    spec = BarrierSpec(n=1, s=0.5, alpha=0.3)
    p = spec.boundary_point(200.0)
    D = Ball(center=(p - [0.0, 100.0]).tolist(), radius=25.0)
    plain = repaired_supersolution_check(spec, None, p, cfg)
    repaired = repaired_supersolution_check(spec, D, p, cfg)
    assert plain.correction is None
    assert math.isclose(plain.value, barrier_curvature(spec, 200.0, cfg).value, rel_tol=1e-12)
    assert math.isclose(repaired.value, plain.value + 2.0 * repaired.correction.value, rel_tol=1e-12)
    assert repaired.correction.value > 0.0
    assert repaired.verdict == "positive"
    assert repaired.scaled_correction > 0.0


def test_density_of_a_halfspace_is_one_half():
    report = density_check(HalfSpace.lower(2, 0.0), [0.0, 0.0], [0.5, 1.0, 2.0], samples=2000, seed=4)
    for row in report.rows:
        # quadrant stratification splits the disc exactly
        assert math.isclose(row.interior, 0.5 * math.pi, rel_tol=1e-12)
        assert math.isclose(row.exterior, 0.5 * math.pi, rel_tol=1e-12)
    assert report.gamma is None and report.ceiling_ok is None


def test_density_complement_only_mode():
    report = density_check(HalfSpace.lower(2, 0.0), [0.0, 0.0], [1.0], mode="complement-only", samples=400)
    assert report.rows[0].interior is None
    assert report.min_interior is None


def test_density_rejects_bad_inputs():
    lower = HalfSpace.lower(2, 0.0)
    with pytest.raises(DomainError):
        density_check(lower, [0.0, -1.0], [1.0])
    with pytest.raises(DomainError):
        density_check(lower, [0.0, 0.0], [0.0])
    with pytest.raises(DomainError):
        density_check(lower, [0.0, 0.0], [1.0], mode="sideways")


def test_touched_ball_density_bounds(line_params):
    fixture = touched_ball_fixture(1)
    gamma, rho0 = touched_ball_scale(line_params, 1.0)
    assert gamma > 0.0 and 0.0 < rho0 <= 1.0
    report = density_check(fixture.set, fixture.q, [0.25 * rho0, 0.5 * rho0, rho0], samples=4000, seed=9,
                           touched_ball=fixture.ball, params=line_params)
    assert all(row.below_rho0 for row in report.rows)
    assert report.ceiling_ok and report.floor_ok


def test_touched_ball_must_pass_through_q(line_params):
    with pytest.raises(DomainError):
        density_check(HalfSpace.lower(2, 0.0), [0.0, 0.0], [0.1],
                      touched_ball=Ball(center=[0.0, -2.0], radius=1.0), params=line_params)


def test_fixture_validation():
    with pytest.raises(DomainError):
        halfspace_fixture(1, depth=1.5)
    with pytest.raises(DomainError):
        sheet_fixture(1, thickness=0.0)
    with pytest.raises(DomainError):
        halfspace_fixture(3)


def test_candidate_verify():
    report = halfspace_fixture(1).verify(samples=2000)
    assert math.isclose(report.gap, 2.5, abs_tol=1e-6)
    above = CandidateSet(base=HalfSpace.lower(2, 1.0), n=1)
    with pytest.raises(GeometryViolationError):
        above.verify(samples=2000)


def test_slide_over_a_halfspace_stops_at_once(line_params, cfg):
    trace = run_slide(halfspace_fixture(1), 0.5, 5, line_params, cfg)
    assert trace.summary.verdict == "half-space"
    assert trace.summary.half_space_from == 1
    assert trace.summary.steps == 1
    assert json.loads(trace.summary_json())["schema"] == TRACE_SCHEMA


def test_slide_rejects_mismatched_dimension(plane_params, cfg):
    with pytest.raises(DomainError):
        run_slide(halfspace_fixture(1), 0.5, 2, plane_params, cfg, verify=False)


@pytest.mark.slow
def test_notched_slide_repairs_the_barrier(line_params, cfg):
    trace = run_slide(notched_fixture(1), 0.5, 3, line_params, cfg)
    summary = trace.summary
    assert summary.eps_bound_held
    assert summary.altitude_held
    assert summary.lambda_hat_held
    assert not summary.failed_steps
    assert any(s.case_tag == "cone-hits-boundary" for s in trace.states)
    assert summary.repaired_positive
    assert summary.verdict == "contradiction"
    assert len(trace.to_jsonl().splitlines()) == summary.steps


@pytest.mark.slow
def test_sheet_slide_hits_the_underside_every_step(line_params, cfg):
    trace = run_slide(sheet_fixture(1), 0.5, 2, line_params, cfg)
    summary = trace.summary
    assert summary.steps == 2
    assert not summary.failed_steps
    assert [s.case_tag for s in trace.states] == ["cone-hits-boundary"] * 2
    assert summary.repaired_positive == [1, 2]
    assert summary.verdict == "contradiction"


def test_epsilon_infimum_shrinks_as_the_lift_shrinks():
    rng = np.random.default_rng(11)
    x = rng.uniform(1.0, 80.0, 400) * rng.choice([-1.0, 1.0], 400)
    pts = np.column_stack([x, -rng.uniform(0.0, 3.0, 400)])
    samples = BoundarySamples(points=pts, normals=np.tile([0.0, 1.0], (400, 1)))
    for alpha in (0.3, 0.5, 0.8):
        eps = [epsilon_infimum(samples.shifted(1.0 / j), alpha, cutoff=1.0) for j in range(1, 9)]
        assert all(a >= b for a, b in zip(eps, eps[1:]))
        assert all(e <= j ** (-1.0 / (1.0 - alpha)) * (1.0 + 1e-12) for j, e in enumerate(eps, start=1))


def test_cone_strata_catch_a_thin_notch_near_the_apex():
    candidate = notched_fixture(1)
    lifted = candidate.boundary_samples().shifted(1.0)
    eps = epsilon_infimum(lifted, 0.5, cutoff=1.0)
    p = touching_points(lifted, eps, 0.5, tol=1e-8)[0]
    ell = ell_schedule(1, float(np.linalg.norm(p)), 1, 0.5)
    test = cone_inclusion_test(candidate.shifted(1.0), p, ell, 2048, seed=3)
    assert test.case_tag == "cone-hits-boundary"
    assert not test.indeterminate
    # the notch bottom -1.5 lifted by 1
    assert abs(test.q[-1] + 0.5) < 1e-6
    assert p[-1] - test.q[-1] >= ell * abs(p[0] - test.q[0])


def test_boundary_hit_witness_is_a_half_ball_on_the_crossing():
    E = HalfSpace.lower(2, -1.0)
    witness = witness_region("cone-hits-boundary", [3.0, 0.0], 0.5, E, q=[3.0, -1.0], samples=8000, seed=5)
    assert witness.center == [3.0, -1.0]
    assert witness.radius == 0.5
    assert witness.minus_candidate
    assert math.isclose(witness.distance, 0.5)
    assert witness.cone_margin < -1.0 / 8.0
    assert abs(witness.volume.value - math.pi / 8.0) < 4.0 * witness.volume.std_error + 1e-3
    assert not witness.region.contains(np.array([[3.0, -1.2]]))[0]
    assert witness.region.contains(np.array([[3.0, -0.8]]))[0]


def test_boundary_hit_witness_needs_a_drop():
    with pytest.raises(GeometryViolationError):
        witness_region("cone-hits-boundary", [3.0, 0.0], 0.5, HalfSpace.lower(2, 0.0), q=[3.0, 0.0])
