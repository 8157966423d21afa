"""Acceptance suite: numbered criteria, each run at a quick or a full scale.

The quick scale is a smoke run sized for CI; only the full scale carries the
trial counts and budget grids the thresholds were set for.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..core.config import ExperimentConfig
from ..core.exceptions import RateFitError, ValidationError
from ..core.models import IndexedLabel, RateFit
from ..algorithms import (
    BaseLearner,
    CALLearner,
    DHMLearner,
    LearnerResult,
    ModelSelectLearner,
    NestedStructure,
    RunTrace,
    learn_constrained,
)
from ..bounds import BoundConfig, RademacherDraw, hat_bound, rademacher_process, uniform_deviation_violated
from ..disagreement import lemma_checks, theta_analytic, theta_estimate
from ..hypothesis_spaces import Hypothesis, HypothesisClass, UniformSphere, uniform
from ..noise_problems import (
    LabeledStream,
    NoiseProblem,
    problem_from_spec,
)
from ..utils.concurrency import run_parallel_tasks
from ..utils.helpers import derive_trial_seed
from .fitting import fit_rate
from .replay import replay
from .runner import ExperimentResult, run_experiment

logger = logging.getLogger(__name__)

SCALES = ("quick", "full")

# Problems the criteria run on
KAPPA_TWO = {"kind": "tsybakov", "alpha": 1.0, "z_star": 0.5, "marginal": "uniform"}
BOUNDED = {"kind": "bounded", "c_margin": 0.25, "z_star": 0.5, "marginal": "uniform"}
NOISELESS = {"kind": "noiseless", "z_star": 0.5, "marginal": "uniform"}
INTERVAL_BAYES = {"kind": "interval", "a": 0.3, "b": 0.7, "c_margin": 0.25, "marginal": "uniform"}

THRESHOLDS = {"kind": "threshold"}
INTERVALS = {"kind": "interval"}


@dataclass
class CriterionOutcome:
    """PASS/FAIL of one criterion with the measured quantities behind it."""

    criterion: int
    name: str
    passed: bool
    scale: str
    details: Dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    check: Callable[[ExperimentConfig, bool], Tuple[bool, Dict[str, Any]]]


# Shared plumbing

def _experiment(cfg: ExperimentConfig, name: str, problem: Dict[str, Any],
                algorithms: List[Dict[str, Any]], budgets: List[int], trials: int,
                hypothesis_class: Optional[Dict[str, Any]] = None,
                structure: Optional[List[Dict[str, Any]]] = None) -> ExperimentResult:
    """run_experiment on a derived configuration sharing cfg's seeds and knobs."""
    derived = replace(cfg, name=name, problem=problem, algorithms=algorithms, budgets=budgets,
                      trials=trials, hypothesis_class=hypothesis_class or THRESHOLDS,
                      structure=structure or [], write_traces=False)
    return run_experiment(derived)


def _fit(result: ExperimentResult, label: str, model: str,
         details: Dict[str, Any]) -> Optional[RateFit]:
    try:
        fit = fit_rate(result.curves[label], model)
    except RateFitError as e:
        details[f"{label}_fit_error"] = str(e)
        return None
    details[f"{label}_slope"] = fit.slope
    details[f"{label}_r_squared"] = fit.r_squared
    details[f"{label}_interval"] = fit.slope_interval
    return fit


def _learner_trials(cfg: ExperimentConfig, learner: BaseLearner, problem: NoiseProblem, n: int,
                    trials: int) -> List[Tuple[LabeledStream, LearnerResult]]:
    """Runs of one learner on the (n, trial) streams; raising trials are dropped and logged."""
    def task(trial: int) -> Tuple[LabeledStream, LearnerResult]:
        stream = LabeledStream(problem, derive_trial_seed(cfg.base_seed, n, trial), n)
        return stream, learner.run(stream, n)

    outcomes = run_parallel_tasks({t: (lambda t=t: task(t)) for t in range(trials)},
                                  cfg.max_workers)
    runs = []
    for outcome in sorted(outcomes, key=lambda r: r.task_id):
        if outcome.success:
            runs.append(outcome.result)
        else:
            logger.error(f"Trial {outcome.task_id} of {learner.kind} raised: {outcome.exception}")
    return runs


# Criteria

def check_theta(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Closed forms, exact grid estimates and Monte Carlo estimates of theta."""
    samples = 10 ** 6 if full else 10 ** 5
    h_t, h_i = Hypothesis.threshold(0.5), Hypothesis.interval(0.4, 0.6)
    thresholds, intervals = HypothesisClass.thresholds(), HypothesisClass.intervals()

    details: Dict[str, Any] = {
        "analytic_threshold": theta_analytic("threshold", h_t),
        "analytic_interval": theta_analytic("interval", h_i),
        "exact_threshold": theta_estimate(thresholds, h_t, uniform()).value,
        "exact_interval": theta_estimate(intervals, h_i, uniform()).value,
        # radii below ~10^4/samples would be resolved by a handful of pool points
        "mc_threshold": theta_estimate(thresholds, h_t, uniform(), r0=0.01, mc_budget=samples,
                                       seed=cfg.base_seed).value,
        "mc_interval": theta_estimate(intervals, h_i, uniform(), r0=0.01, mc_budget=samples,
                                      seed=cfg.base_seed).value,
    }
    sphere = UniformSphere(3)
    low, high = theta_analytic("halfspace", marginal=sphere)
    details["sphere"] = theta_estimate(HypothesisClass.halfspaces(3), Hypothesis.halfspace([0, 0, 1]),
                                       sphere, r0=0.01, mc_budget=samples,
                                       seed=cfg.base_seed).value
    details["sphere_bracket"] = (low, high)

    passed = (
        details["analytic_threshold"] == 2.0
        and details["analytic_interval"] == 5.0
        and abs(details["exact_threshold"] - 2.0) <= 1e-9
        and abs(details["exact_interval"] - 5.0) <= 1e-9
        and abs(details["mc_threshold"] - 2.0) <= 0.05 * 2.0
        and abs(details["mc_interval"] - 5.0) <= 0.05 * 5.0
        and low <= details["sphere"] <= high
    )
    return passed, details


def check_deviation_coverage(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Fraction of samples where some grid threshold deviates by more than G(m, delta')."""
    trials = 1000 if full else 200
    m, delta_prime = 200, 0.1
    problem = problem_from_spec(KAPPA_TWO)
    grid = HypothesisClass.thresholds().to_grid(512)
    true = problem.true_errors(grid)

    violations = 0
    for t in range(trials):
        rng = np.random.default_rng(derive_trial_seed(cfg.base_seed, m, t))
        x, y = problem.sample(rng, m)
        empirical = np.mean(grid.prediction_matrix(x) != y[None, :], axis=1)
        violations += uniform_deviation_violated(empirical, true, m, delta_prime, 1)

    fraction = violations / trials
    return fraction <= delta_prime, {"trials": trials, "violation_fraction": fraction}


def check_realizable_cal(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """CAL decays exponentially on noiseless thresholds and beats passive ERM at n = 50."""
    trials = 100 if full else 30
    budgets = list(range(10, 61, 5))
    result = _experiment(cfg, "realizable-cal", NOISELESS, [{"kind": "cal"}, {"kind": "passive"}],
                         budgets, trials)
    details: Dict[str, Any] = {"trials": trials}
    fit = _fit(result, "cal", "exponential", details)
    cal_50, passive_50 = result.curves["cal"].median(50), result.curves["passive"].median(50)
    details.update(cal_median_50=cal_50, passive_median_50=passive_50)

    threshold = cfg.acceptance.get("realizable_r_squared", 0.9)
    passed = (fit is not None and fit.slope < 0 and fit.r_squared >= threshold
              and cal_50 <= passive_50 / 3.0)
    return passed, details


def check_kappa_two(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Passive slope near -2/3; the Rademacher-threshold learner at -0.8 or steeper."""
    trials = 100 if full else 20
    budgets = [2 ** k for k in range(6, 14 if full else 11)]
    result = _experiment(cfg, "kappa-two", KAPPA_TWO,
                         [{"kind": "passive"}, {"kind": "dhm", "threshold_kind": "eq4"}],
                         budgets, trials)
    details: Dict[str, Any] = {"trials": trials, "budgets": budgets}
    passive = _fit(result, "passive", "power-law", details)
    active = _fit(result, "dhm-eq4", "power-law", details)
    if passive is None or active is None:
        return False, details

    tolerance = cfg.acceptance.get("passive_slope_tolerance", 0.15)
    slope_max = cfg.acceptance.get("active_slope_max", -0.8)
    passed = (abs(passive.slope + 2.0 / 3.0) <= tolerance
              and active.slope <= slope_max
              and active.excludes(passive.slope))
    return passed, details


def check_bounded_exponential(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """kappa = 1: both active learners fit the exponential model, passive fits n^-1."""
    trials = 50 if full else 10
    budgets = [64, 128, 192, 256, 384, 512] if full else [64, 128, 192, 256]
    result = _experiment(cfg, "bounded-noise", BOUNDED,
                         [{"kind": "a2"}, {"kind": "dhm", "threshold_kind": "eq4"},
                          {"kind": "passive"}], budgets, trials)
    details: Dict[str, Any] = {"trials": trials, "budgets": budgets}
    r2 = cfg.acceptance.get("exponential_r_squared", 0.85)
    fits = [_fit(result, label, "exponential", details) for label in ("a2", "dhm-eq4")]
    passive = _fit(result, "passive", "power-law", details)
    passed = (all(f is not None and f.slope < 0 and f.r_squared >= r2 for f in fits)
              and passive is not None and abs(passive.slope + 1.0) <= 0.2)
    return passed, details


def check_inference_soundness(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Runs whose inferred labels ever contradict the Bayes classifier, per problem."""
    seeds = 100 if full else 20
    n = 128 if full else 64
    delta = 0.05
    details: Dict[str, Any] = {"seeds": seeds, "n": n}
    passed = True
    for name, spec in (("noiseless", NOISELESS), ("bounded", BOUNDED)):
        problem = problem_from_spec(spec)
        learner = DHMLearner(HypothesisClass.thresholds(), delta, "eq4",
                             BoundConfig.from_dict(cfg.bounds), cfg.grid_size, cfg.unlabeled_cap)
        runs = _learner_trials(cfg, learner, problem, n, seeds)
        wrong = 0
        for stream, result in runs:
            inferred = result.all_inferred()
            if not inferred:
                continue
            x = stream.points([p.index for p in inferred])
            y = np.array([p.label for p in inferred])
            wrong += bool(np.any(problem.bayes_label(x) != y))
        fraction = wrong / max(len(runs), 1)
        details[f"{name}_unsound_fraction"] = fraction
        passed = passed and len(runs) == seeds and fraction <= delta
    return passed, details


def check_bound_validity(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """er(ERM) - nu within hat_bound(S, 0.05; empty L) at |S| = 512."""
    trials = 200 if full else 40
    size = 512
    problem = problem_from_spec(BOUNDED)
    C = HypothesisClass.thresholds()
    bounds = BoundConfig.from_dict(cfg.bounds)

    def task(trial: int) -> bool:
        stream = LabeledStream(problem, derive_trial_seed(cfg.base_seed, size, trial), size)
        S = [stream.query(i) for i in range(1, size + 1)]
        h = learn_constrained(C, [], S, stream)
        bound = hat_bound(S, 0.05, [], C, stream, RademacherDraw(bounds.rademacher_seed + trial),
                          bounds)
        return problem.excess_error(h, C) <= bound

    outcomes = run_parallel_tasks({t: (lambda t=t: task(t)) for t in range(trials)},
                                  cfg.max_workers)
    covered = sum(1 for o in outcomes if o.success and o.result)
    fraction = covered / trials
    return fraction >= 0.95, {"trials": trials, "coverage": fraction}


def check_adaptivity(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Model selection over thresholds within intervals tracks the learner run on intervals."""
    trials = 50 if full else 8
    n = 1024 if full else 256
    problem = problem_from_spec(INTERVAL_BAYES)
    bounds = BoundConfig.from_dict(cfg.bounds)
    structure = NestedStructure.from_spec([THRESHOLDS, INTERVALS], grid_size=cfg.grid_size)
    C2 = structure[2]

    selector = ModelSelectLearner(structure, cfg.delta, bounds, cfg.grid_size, cfg.unlabeled_cap)
    direct = DHMLearner(C2, cfg.delta, "eq4", bounds, cfg.grid_size, cfg.unlabeled_cap)

    def medians(runs: List[Tuple[LabeledStream, LearnerResult]]) -> float:
        errors = [problem.excess_error(r.hypothesis, C2) for _, r in runs if r.succeeded]
        return float(np.median(np.maximum(errors, 0.0))) if errors else math.nan

    selected_runs = _learner_trials(cfg, selector, problem, n, trials)
    direct_runs = _learner_trials(cfg, direct, problem, n, trials)
    audit = all(r.extras.get("budget_audit", False) for _, r in selected_runs)
    selected, baseline = medians(selected_runs), medians(direct_runs)

    factor = cfg.acceptance.get("adaptivity_factor", 4.0)
    passed = (audit and len(selected_runs) == trials
              and not math.isnan(selected) and not math.isnan(baseline)
              and selected <= factor * baseline + 1e-12)
    return passed, {"trials": trials, "n": n, "model_select_median": selected,
                    "dhm_median": baseline, "budget_audit": audit}


def hand_cal_trace() -> RunTrace:
    """CAL on C = {h_.25, h_.5, h_.75} with target h_.5 over five fixed points."""
    C = HypothesisClass.finite([Hypothesis.threshold(z) for z in (0.25, 0.5, 0.75)],
                               name="three-thresholds")
    xs = [0.6, 0.1, 0.3, 0.8, 0.45]
    stream = LabeledStream.from_arrays(xs, [1 if x >= 0.5 else -1 for x in xs], 10)
    return CALLearner(C).run(stream, 10).trace


def check_oracles(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Hand-evaluated traces and values, plus byte-identical replay of the CAL trace."""
    trace = hand_cal_trace()
    outcome = replay(RunTrace.loads(trace.dumps()))
    h = trace.result.get("hypothesis") or {}
    cal_ok = (trace.queried_indices() == [1, 3] and trace.result.get("labels_used") == 2
              and h.get("params") == [0.5])

    C = HypothesisClass.finite([Hypothesis.threshold(z) for z in (0.25, 0.5, 0.75)])
    stream = LabeledStream.from_arrays([0.3, 0.6, 0.8], [1, -1, 1], 3)
    learned = learn_constrained(C, [IndexedLabel(1, 1)], [IndexedLabel(2, -1), IndexedLabel(3, 1)],
                                stream)
    learn_ok = learned is not None and float(learned.params[0]) == 0.25

    points = LabeledStream.from_arrays([0.1, 0.5, 0.9], [1, 1, 1], 3)
    f_a, f_b = Hypothesis.threshold(0.25), Hypothesis.threshold(0.75)
    value = rademacher_process(lambda x: np.asarray(f_a.predict(x)) - np.asarray(f_b.predict(x)),
                               [IndexedLabel(i, 1) for i in (1, 2, 3)], points,
                               RademacherDraw(fixed=[1, -1, 1]))
    rademacher_ok = abs(value - (-2.0 / 3.0)) <= 1e-12

    details = {"cal_queries": trace.queried_indices(), "replay_matched": outcome.matched,
               "learn": None if learned is None else learned.describe(), "rademacher": value}
    return cal_ok and outcome.matched and learn_ok and rademacher_ok, details


def check_lemmas(cfg: ExperimentConfig, full: bool) -> Tuple[bool, Dict[str, Any]]:
    """Disagreement-coefficient inequalities; exact masses at quick scale."""
    checks = lemma_checks(samples=10 ** 6 if full else None, seed=cfg.base_seed,
                          grid_size=cfg.grid_size)
    failed = [f"{c.lemma}: {c.fixture}" for c in checks if not c.passed]
    return not failed, {"checks": len(checks), "failed": failed}


ACCEPTANCE_SUITE: Dict[int, Criterion] = {
    c.number: c for c in (
        Criterion(1, "theta analytics", check_theta),
        Criterion(2, "uniform deviation coverage", check_deviation_coverage),
        Criterion(3, "realizable CAL decay", check_realizable_cal),
        Criterion(4, "kappa=2 rate separation", check_kappa_two),
        Criterion(5, "kappa=1 exponential regime", check_bounded_exponential),
        Criterion(6, "label inference soundness", check_inference_soundness),
        Criterion(7, "hat_bound validity", check_bound_validity),
        Criterion(8, "model selection adaptivity", check_adaptivity),
        Criterion(9, "hand-simulation oracles", check_oracles),
        Criterion(10, "disagreement lemmas", check_lemmas),
    )
}


def run_acceptance(criteria: Optional[Iterable[int]] = None, scale: str = "quick",
                   cfg: Optional[ExperimentConfig] = None,
                   on_result: Optional[Callable[[CriterionOutcome], None]] = None
                   ) -> List[CriterionOutcome]:
    """Run the selected criteria (all by default); a raising check counts as FAIL."""
    if scale not in SCALES:
        raise ValidationError(f"unknown scale {scale!r}, expected one of {SCALES}")
    numbers = sorted(criteria) if criteria is not None else sorted(ACCEPTANCE_SUITE)
    unknown = [n for n in numbers if n not in ACCEPTANCE_SUITE]
    if unknown:
        raise ValidationError(f"unknown acceptance criteria: {unknown}")
    cfg = cfg or ExperimentConfig()

    outcomes = []
    for number in numbers:
        criterion = ACCEPTANCE_SUITE[number]
        logger.info(f"Criterion {number} ({criterion.name}) at {scale} scale")
        start = time.perf_counter()
        try:
            passed, details = criterion.check(cfg, scale == "full")
        except Exception as e:
            logger.error(f"Criterion {number} raised: {e}")
            passed, details = False, {"error": str(e)}
        outcome = CriterionOutcome(number, criterion.name, bool(passed), scale, details,
                                   time.perf_counter() - start)
        outcomes.append(outcome)
        if on_result:
            on_result(outcome)
    return outcomes
