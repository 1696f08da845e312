"""Subcommand implementations; each returns an exit status and leaves error mapping to main"""
import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from barrier.constants import beta_constant, beta_sweep
from barrier.export import certificates_csv, profile_csv, profile_json, sweep_csv
from barrier.profile import decay_fit
from barrier.search import SEARCH_CAP, supersolution_radius
from barrier.spec import BarrierSpec
from cli.suites import run_suites
from curvature.evaluator import curvature_indicator, evaluate_curvature
from geometry.measure import fractional_perimeter
from geometry.serialization import CylinderSpec, load_document
from geometry.sets import Ball, BarrierSet, HalfSpace
from halfspace_sim.candidate import CandidateSet, UpperEnvelopeSampler
from halfspace_sim.density import density_check
from halfspace_sim.fixtures import halfspace_fixture, notched_fixture, sheet_fixture, touched_ball_fixture
from halfspace_sim.trace import run_slide
from kernel_quadrature.engine import QuadConfig
from kernel_quadrature.kernel import FracParams
from utils.errors import DomainError
from utils.io import atomic_write_text, dumps, render_csv
from utils.logger import logger


@dataclasses.dataclass
class CommandContext:
    args: argparse.Namespace
    cfg: QuadConfig
    outputs: List[str] = dataclasses.field(default_factory=list)

    @property
    def out(self) -> Optional[Path]:
        return Path(self.args.out) if getattr(self.args, "out", None) else None

    def emit(self, text: str) -> None:
        """Primary data output: --out, else stdout"""
        if self.out is None:
            sys.stdout.write(text)
            return
        self.outputs.append(str(atomic_write_text(self.out, text)))

    def emit_summary(self, text: str) -> None:
        """Secondary JSON output: <out>.summary.json, else stdout after the data"""
        if self.out is None:
            sys.stdout.write(text)
            return
        target = self.out.with_name(self.out.name + ".summary.json")
        self.outputs.append(str(atomic_write_text(target, text)))


def resolve_config(args: argparse.Namespace) -> QuadConfig:
    return QuadConfig().with_overrides(rel_tol=getattr(args, "tol", None), threads=getattr(args, "threads", None),
                                       seed=getattr(args, "seed", None), samples=getattr(args, "samples", None))


def _point(value, dim: int, default: np.ndarray) -> np.ndarray:
    if value is None:
        return default
    if isinstance(value, str):
        return np.zeros(dim)
    x = np.asarray(value, dtype=float)
    if x.shape[0] != dim:
        raise DomainError(f"point has {x.shape[0]} coordinates, expected {dim}")
    return x


def _e_n(dim: int, scale: float = 1.0) -> np.ndarray:
    v = np.zeros(dim)
    v[-1] = scale
    return v


def cmd_curvature(ctx: CommandContext) -> int:
    args = ctx.args
    params = FracParams(n=args.n, s=args.s)
    dim = args.n + 1
    far_field = None
    if args.set:
        doc = load_document(args.set)
        geom, far_field = doc.set, doc.far_field
        if geom.ambient_dim not in (None, dim):
            raise DomainError(f"set lives in R^{geom.ambient_dim}, --n gives R^{dim}")
        if args.point is None:
            raise DomainError("--point is required with --set")
        x = _point(args.point, dim, np.zeros(dim))
    elif args.shape == "halfspace":
        geom = HalfSpace.lower(dim, 0.0)
        x = _point(args.point, dim, np.zeros(dim))
    elif args.shape == "ball":
        geom = Ball(center=[0.0] * dim, radius=args.radius)
        x = _point(args.point, dim, _e_n(dim, args.radius))
    else:
        spec = BarrierSpec(n=args.n, s=args.s, alpha=args.alpha, eps=args.eps)
        geom = BarrierSet(spec=spec)
        x = _point(args.point, dim, spec.boundary_point(args.r))

    if args.method == "indicator":
        result = curvature_indicator(geom, x, params, ctx.cfg, far_field)
    else:
        result = evaluate_curvature(geom, x, params, ctx.cfg, far_field, subtract_linear=args.subtract_linear)
    logger.info(f"H = {result.value:.10g} +- {result.error_estimate:.2g} ({result.method})")
    ctx.emit(result.model_dump_json(indent=2) + "\n")
    return 0


def cmd_barrier(ctx: CommandContext) -> int:
    args = ctx.args
    if args.beta_only:
        beta = beta_constant(args.n, args.s, args.alpha, ctx.cfg)
        ctx.emit(dumps({"n": args.n, "s": args.s, "alpha": args.alpha, **beta.model_dump()}) + "\n")
        return 0
    if args.find_r:
        result = supersolution_radius(args.s, args.alpha, ctx.cfg, n=args.n, cap=args.cap or SEARCH_CAP)
        ctx.emit(certificates_csv(result))
        ctx.emit_summary(result.model_dump_json(exclude={"certificates"}) + "\n")
        return 0
    spec = BarrierSpec(n=args.n, s=args.s, alpha=args.alpha, eps=args.eps)
    profile = decay_fit(spec, args.r_grid, ctx.cfg, method=args.method)
    ctx.emit(profile_csv(profile))
    ctx.emit_summary(profile_json(profile))
    return 0


def cmd_beta(ctx: CommandContext) -> int:
    args = ctx.args
    frame = beta_sweep(args.s_values, args.alpha_values, n=args.n, cfg=ctx.cfg)
    ctx.emit(sweep_csv(frame))
    return 0


def _slide_candidate(args: argparse.Namespace) -> CandidateSet:
    if args.fixture == "halfspace":
        candidate = halfspace_fixture(args.n)
    elif args.fixture == "notched":
        candidate = notched_fixture(args.n)
    elif args.fixture == "sheet":
        candidate = sheet_fixture(args.n)
    else:
        doc = load_document(args.set)
        if doc.far_field is None:
            raise DomainError("candidate document has no far_field registration")
        dim = doc.set.ambient_dim or len(doc.far_field.center)
        candidate = CandidateSet(base=doc.set, n=dim - 1, sampler=UpperEnvelopeSampler(),
                                 far_field=doc.far_field, cylinder=doc.cylinder or CylinderSpec(),
                                 label=Path(args.set).stem)
    overrides = {k: v for k, v in (("horizon", args.horizon), ("resolution", args.resolution)) if v is not None}
    if overrides:
        candidate.sampler = dataclasses.replace(candidate.sampler, **overrides)
    return candidate


def cmd_slide(ctx: CommandContext) -> int:
    args = ctx.args
    candidate = _slide_candidate(args)
    params = FracParams(n=candidate.n, s=args.s)
    trace = run_slide(candidate, args.alpha, args.j_max, params, ctx.cfg,
                      witness_mode=args.witness_mode, cone_samples=args.cone_samples)
    ctx.emit(trace.to_jsonl())
    ctx.emit_summary(trace.summary_json())
    # a contradiction in the trace is a finding, not a failure
    return 0


def cmd_density(ctx: CommandContext) -> int:
    args = ctx.args
    dim = args.n + 1
    ball = None
    if args.fixture == "halfspace":
        E, q = HalfSpace.lower(dim, 0.0), np.zeros(dim)
    elif args.fixture == "touched-ball":
        fixture = touched_ball_fixture(args.n)
        E, q, ball = fixture.set, fixture.q, fixture.ball
    else:
        E = load_document(args.set).set
        if args.point is None:
            raise DomainError("--point is required with --set")
        q = _point(args.point, dim, np.zeros(dim))
    if args.ball is not None:
        if len(args.ball) != dim + 1:
            raise DomainError(f"--ball needs {dim} centre coordinates and a radius")
        ball = Ball(center=args.ball[:-1], radius=args.ball[-1])

    params = FracParams(n=args.n, s=args.s)
    report = density_check(E, q, args.rho_grid, mode=args.mode, samples=ctx.cfg.samples, seed=ctx.cfg.seed,
                           threads=ctx.cfg.threads, touched_ball=ball, params=params if ball else None)
    frame = pd.DataFrame([r.model_dump() for r in report.rows],
                         columns=["rho", "interior", "exterior", "sigma", "below_rho0"])
    meta = {"mode": report.mode, "samples": report.samples, "seed": report.seed,
            "q": ",".join(f"{c:.12g}" for c in report.q)}
    ctx.emit(render_csv(frame, "density", meta))
    ctx.emit_summary(report.model_dump_json(exclude={"rows"}) + "\n")
    return 0


def cmd_perimeter(ctx: CommandContext) -> int:
    args = ctx.args
    dim = args.n + 1
    if args.set:
        geom = load_document(args.set).set
    elif args.shape == "halfspace":
        geom = HalfSpace.lower(dim, 0.0)
    else:
        geom = Ball(center=[0.0] * dim, radius=args.radius)
    container = Ball(center=[0.0] * dim, radius=args.container_radius)
    result = fractional_perimeter(geom, container, FracParams(n=args.n, s=args.s), ctx.cfg)
    ctx.emit(result.model_dump_json(indent=2) + "\n")
    return 0


def cmd_check(ctx: CommandContext) -> int:
    results = run_suites(ctx.args.suite, ctx.cfg)
    ctx.emit(dumps([r.model_dump() for r in results]) + "\n")
    return 0 if all(r.passed for r in results) else 3


COMMANDS: Dict[str, Callable[[CommandContext], int]] = {
    "curvature": cmd_curvature,
    "barrier": cmd_barrier,
    "beta": cmd_beta,
    "slide": cmd_slide,
    "density": cmd_density,
    "perimeter": cmd_perimeter,
    "check": cmd_check,
}
