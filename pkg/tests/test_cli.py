import json
import math

import pytest

import config
from cli import suites
from cli.manifest import MANIFEST_SCHEMA, manifest_path
from curvature.evaluator import curvature_ball
from kernel_quadrature.kernel import FracParams
from main import main
from utils.io import read_csv


@pytest.mark.parametrize("argv", [[], ["curvature"], ["--bogus"], ["beta", "--s-values", "x,y"],
                                  ["curvature", "--shape", "cube"]])
def test_usage_errors_exit_with_one(argv):
    assert main(argv) == 1


def test_parameter_validation_exits_with_one():
    assert main(["curvature", "--shape", "ball", "--s", "1.5"]) == 1


def test_ball_curvature_on_stdout(capsys):
    assert main(["curvature", "--shape", "ball", "--n", "1", "--s", "0.5", "--radius", "2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    expected = curvature_ball(FracParams(n=1, s=0.5), 2.0).value
    assert math.isclose(payload["value"], expected, rel_tol=1e-14)


def test_off_boundary_point_is_a_domain_error():
    assert main(["curvature", "--shape", "halfspace", "--point", "0,1"]) == 2


def test_out_writes_a_manifest(tmp_path):
    out = tmp_path / "ball.json"
    assert main(["curvature", "--shape", "ball", "--seed", "7", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["method"]
    manifest = json.loads(manifest_path(out).read_text())
    assert manifest["schema"] == MANIFEST_SCHEMA
    assert manifest["exit_code"] == 0
    assert manifest["seed"] == 7
    assert manifest["outputs"] == [str(out)]


def test_failed_run_still_writes_a_manifest(tmp_path):
    out = tmp_path / "check.json"
    assert main(["check", "--suite", "no-such-suite", "--out", str(out)]) == 2
    assert json.loads(manifest_path(out).read_text())["exit_code"] == 2
    assert not out.exists()


def test_check_suite_passes(capsys):
    assert main(["check", "--suite", "oddness"]) == 0
    results = json.loads(capsys.readouterr().out)
    assert [r["name"] for r in results] == ["oddness"]
    assert results[0]["passed"]


def test_density_of_halfspace_fixture(tmp_path):
    out = tmp_path / "density.csv"
    assert main(["density", "--fixture", "halfspace", "--rho-grid", "0.5,1", "--samples", "400",
                 "--out", str(out)]) == 0
    frame = read_csv(out)
    assert list(frame["rho"]) == [0.5, 1.0]
    assert all(abs(v - 0.5 * math.pi) < 1e-9 for v in frame["interior"])
    summary = json.loads(out.with_name(out.name + ".summary.json").read_text())
    assert summary["mode"] == "both-sides"


def test_beta_sweep_csv(tmp_path):
    out = tmp_path / "beta.csv"
    assert main(["beta", "--s-values", "0.5", "--alpha-values", "0.25,0.5", "--out", str(out)]) == 0
    frame = read_csv(out)
    assert len(frame) == 2
    assert list(frame["expected_sign"]) == [1, 0]
    assert frame["agrees"].all()


def test_slide_over_halfspace_fixture(tmp_path):
    out = tmp_path / "slide.jsonl"
    assert main(["slide", "--fixture", "halfspace", "--j-max", "3", "--out", str(out)]) == 0
    summary = json.loads(out.with_name(out.name + ".summary.json").read_text())
    assert summary["verdict"] == "half-space"


def test_curvature_of_a_bundled_document(capsys):
    doc = str(config.DATA_DIR / "bump_graph.json")
    assert main(["curvature", "--set", doc]) == 2
    assert main(["curvature", "--set", doc, "--point", "2,0"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "graph-formula"


def test_barrier_beta_only_on_the_diagonal(capsys):
    assert main(["barrier", "--s", "0.5", "--alpha", "0.5", "--beta-only"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] == 0.0
    assert payload["alpha"] == 0.5


@pytest.mark.parametrize("argv", [
    ["curvature", "--shape", "ball", "--radius", "1", "--s", "0.5", "--n", "1"],
    ["barrier", "--s", "0.5", "--alpha", "0.5", "--beta-only"],
])
def test_short_s_flag_reaches_the_subcommand(argv, capsys):
    assert main(argv) == 0
    assert "ambiguous" not in capsys.readouterr().err


def test_global_flags_need_their_full_names():
    assert main(["--se", "3", "curvature", "--shape", "ball"]) == 1


def test_comparison_suite_defaults_to_the_configured_count(monkeypatch, cfg):
    monkeypatch.setattr(config, "COMPARISON_FIXTURES", 3)
    result = suites.comparison(cfg)
    assert result.cases == 3
    assert len(result.details) == 3


@pytest.mark.slow
def test_comparison_identity_on_fifty_fixtures(cfg):
    result = suites.comparison(cfg)
    assert result.cases == 50
    assert result.failures <= 2
    assert result.passed
