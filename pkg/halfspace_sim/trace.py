"""run_slide: shift, slide the barrier down to first contact, and check each step's bookkeeping.

For j = 1..j_max the candidate is lifted by 1/j, eps_j is the smallest barrier
scale still containing it, and the contact point p_j drives the cone test,
the witness region and the sign of the repaired barrier. Failures inside a
step are recorded on that step; the trace itself always comes back.
"""
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from barrier.spec import BarrierSpec
from halfspace_sim.candidate import CandidateSet
from halfspace_sim.sliding import (CaseTag, InclusionCheck, cone_inclusion_test, ell_schedule,
                                   epsilon_infimum, flatness_score, lambda_hat_inclusion,
                                   touching_points)
from halfspace_sim.witness import RepairVerdict, WitnessRegion, repaired_supersolution_check, witness_region
from kernel_quadrature.engine import QuadConfig
from kernel_quadrature.kernel import FracParams
from utils.errors import DomainError, FracminError
from utils.io import dumps, render_jsonl
from utils.logger import logger
from utils.parallel import ordered_map
from utils.rng import derive_seed

WitnessMode = Literal["density", "c1"]
SlideVerdict = Literal["half-space", "contradiction", "violation", "inconclusive"]

TRACE_SCHEMA = "slide-trace-v1"
SLIDE_TAG = 43
# cutoff on |x'| for the excluded cylinder of the lifted set
_CYLINDER_CUTOFF = 1.0


class SlideState(BaseModel):
    """One step j of the slide"""
    j: int = Field(..., ge=1)
    eps: Optional[float] = Field(None, ge=0, description="eps_j, absent when containment failed")
    p: Optional[List[float]] = Field(None, description="touching point p_j")
    p_norm: Optional[float] = None
    touching_count: int = Field(0, ge=0)
    ell: Optional[float] = Field(None, description="cone slope ell_j")
    case_tag: Optional[CaseTag] = None
    indeterminate: bool = False
    witness: Optional[WitnessRegion] = None
    repair: Optional[RepairVerdict] = None
    lambda_hat: Optional[InclusionCheck] = None
    flatness: Optional[float] = Field(None, description="report-only oscillation for graph-type steps")
    checks: Dict[str, bool] = Field(default_factory=dict)
    error: Optional[str] = None
    seed: int

    @field_validator("ell")
    @classmethod
    def _ell_range(cls, value):
        if value is not None and not 0.0 < value < 1.0:
            raise ValueError(f"ell must lie in (0, 1), got {value}")
        return value


class SlideSummary(BaseModel):
    label: str
    n: int
    s: float
    alpha: float
    j_max: int
    steps: int
    verdict: SlideVerdict
    half_space_from: Optional[int] = Field(None, description="first j with eps_j = 0")
    eps_bound_held: bool
    altitude_held: bool
    lambda_hat_held: bool
    repaired_positive: List[int] = Field(default_factory=list, description="steps whose repaired barrier is positive")
    failed_steps: List[int] = Field(default_factory=list)
    empirical_c2: Optional[float] = Field(None, description="min over steps of the scaled witness integral")
    trends: Dict[str, List[float]] = Field(default_factory=dict)
    seed: int
    config: Dict = Field(default_factory=dict)


class SlideTrace(BaseModel):
    states: List[SlideState]
    summary: SlideSummary

    def to_jsonl(self) -> str:
        return render_jsonl(s.model_dump(mode="json") for s in self.states)

    def summary_json(self) -> str:
        return dumps({"schema": TRACE_SCHEMA, **self.summary.model_dump(mode="json")}) + "\n"


def _step(candidate: CandidateSet, j: int, eps: float, params: FracParams, alpha: float,
          cfg: QuadConfig, witness_mode: WitnessMode, cone_samples: int, touch_tol: float) -> SlideState:
    seed = derive_seed(cfg.seed, SLIDE_TAG, j)
    state: Dict = {"j": j, "eps": eps, "seed": seed, "checks": {}}
    checks = state["checks"]
    checks["eps_bound"] = eps <= j ** (-1.0 / (1.0 - alpha)) * (1.0 + 1e-12)
    lifted = candidate.boundary_samples().shifted(1.0 / j)
    E_j = candidate.shifted(1.0 / j)
    try:
        touching = touching_points(lifted, eps, alpha, touch_tol)
        p = touching[0]
        p_norm = float(np.linalg.norm(p))
        state.update(p=p.tolist(), p_norm=p_norm, touching_count=int(touching.shape[0]))
        checks["altitude"] = bool(0.0 < p[-1] <= 1.0 / j + 1e-12)

        ell = ell_schedule(j, p_norm, candidate.n, alpha)
        state["ell"] = ell
        lam = lambda_hat_inclusion(p, ell, eps, alpha, cone_samples, seed)
        state["lambda_hat"] = lam
        checks["lambda_hat"] = lam.passed

        cone = cone_inclusion_test(E_j, p, ell, cone_samples, seed)
        state.update(case_tag=cone.case_tag, indeterminate=cone.indeterminate)
        if cone.case_tag == "graph-type":
            flat = flatness_score(lifted, p)
            state["flatness"] = None if np.isnan(flat) else flat
            return SlideState(**state)

        case = "c1" if (witness_mode == "c1" and cone.case_tag == "cone-hits-boundary") else cone.case_tag
        witness = witness_region(case, p, ell, E_j, q=cone.q, samples=cfg.samples, seed=seed)
        state["witness"] = witness
        spec = BarrierSpec(n=params.n, s=params.s, alpha=alpha, eps=eps)
        repair = repaired_supersolution_check(spec, witness, p, cfg)
        state["repair"] = repair
        checks["repaired_positive"] = repair.verdict == "positive"
    except FracminError as exc:
        logger.error(f"slide step j={j}: {type(exc).__name__}: {exc}")
        state["error"] = f"{type(exc).__name__}: {exc}"
    return SlideState(**state)


def _summarize(candidate: CandidateSet, states: List[SlideState], params: FracParams, alpha: float,
               j_max: int, cfg: QuadConfig) -> SlideSummary:
    def held(key: str) -> bool:
        return all(s.checks.get(key, True) for s in states)

    half_space_from = next((s.j for s in states if s.eps == 0.0), None)
    positive = [s.j for s in states if s.checks.get("repaired_positive")]
    failed = [s.j for s in states if s.error]
    scaled = [s.repair.scaled_correction for s in states
              if s.repair is not None and s.repair.scaled_correction is not None]
    with_p = [s for s in states if s.p_norm is not None]
    trends = {
        "j": [float(s.j) for s in with_p],
        "p_norm": [s.p_norm for s in with_p],
        "j_ell": [s.j * s.ell for s in with_p if s.ell is not None],
        "ell_growth": [s.ell ** (params.n + 2) * s.p_norm ** (1.0 - alpha) for s in with_p if s.ell is not None],
    }
    bounds_ok = held("eps_bound") and held("altitude")
    if not bounds_ok or any(s.eps is None for s in states):
        verdict = "violation"
    elif half_space_from is not None and all(s.eps == 0.0 for s in states):
        verdict = "half-space"
    elif positive:
        verdict = "contradiction"
    else:
        verdict = "inconclusive"
    return SlideSummary(label=candidate.label, n=params.n, s=params.s, alpha=alpha, j_max=j_max,
                        steps=len(states), verdict=verdict, half_space_from=half_space_from,
                        eps_bound_held=held("eps_bound"), altitude_held=held("altitude"),
                        lambda_hat_held=held("lambda_hat"), repaired_positive=positive, failed_steps=failed,
                        empirical_c2=min(scaled) if scaled else None, trends=trends, seed=cfg.seed,
                        config=cfg.model_dump())


def run_slide(candidate: CandidateSet, alpha: float, j_max: int, params: FracParams,
              cfg: Optional[QuadConfig] = None, witness_mode: WitnessMode = "density",
              cone_samples: int = 2048, touch_tol: float = 1e-8, verify: bool = True) -> SlideTrace:
    """Replay the slide for j = 1..j_max.

    eps_j is non-increasing in j, so the trace stops at the first j with
    eps_j = 0 (the lifted set already lies below the hyperplane). Steps after
    eps_j run independently on ``cfg.threads`` workers.
    """
    cfg = cfg or QuadConfig()
    if j_max < 1:
        raise DomainError("j_max must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if params.n != candidate.n:
        raise DomainError(f"candidate lives in R^{candidate.n + 1}, params describe n = {params.n}")
    if verify:
        report = candidate.verify(seed=cfg.seed)
        logger.info(f"{candidate.label}: containment verified on {report.samples} samples, gap {report.gap:.3e}")

    samples = candidate.boundary_samples()
    states: List[SlideState] = []
    pending = []
    for j in range(1, j_max + 1):
        try:
            eps = epsilon_infimum(samples.shifted(1.0 / j), alpha, cutoff=_CYLINDER_CUTOFF)
        except FracminError as exc:
            logger.error(f"slide step j={j}: {exc}")
            states.append(SlideState(j=j, error=f"{type(exc).__name__}: {exc}",
                                     seed=derive_seed(cfg.seed, SLIDE_TAG, j)))
            continue
        if eps == 0.0:
            logger.info(f"eps_{j} = 0: the lifted set lies below the hyperplane; stopping")
            states.append(SlideState(j=j, eps=0.0, seed=derive_seed(cfg.seed, SLIDE_TAG, j),
                                     checks={"eps_bound": True}))
            break
        pending.append((j, eps))

    inner = cfg.with_overrides(threads=1) if cfg.threads > 1 else cfg
    stepped = ordered_map(lambda item: _step(candidate, item[0], item[1], params, alpha, inner,
                                             witness_mode, cone_samples, touch_tol),
                          pending, cfg.threads)
    states = sorted(states + stepped, key=lambda s: s.j)
    for s in stepped:
        logger.info(f"j={s.j}: eps={s.eps:.4e} case={s.case_tag} "
                    f"repair={s.repair.verdict if s.repair else None}")
    summary = _summarize(candidate, states, params, alpha, j_max, cfg)
    logger.success(f"slide over {candidate.label}: {summary.verdict} after {summary.steps} steps")
    return SlideTrace(states=states, summary=summary)
