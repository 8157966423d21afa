"""Batch runs of learners over a budget grid, one seeded stream per (budget, trial)."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..core.config import ExperimentConfig
from ..core.exceptions import ConfigurationError, ReportError
from ..core.models import LearningCurve, TrialRecord
from ..algorithms import (
    A2Learner,
    BaseLearner,
    CALLearner,
    DHMLearner,
    ModelSelectLearner,
    NestedStructure,
    PassiveERMLearner,
    RunTrace,
)
from ..bounds import BoundConfig
from ..hypothesis_spaces import HypothesisClass
from ..noise_problems import LabeledStream, NoiseProblem, problem_from_spec
from ..utils.concurrency import TaskResult, run_parallel_tasks
from ..utils.helpers import derive_trial_seed, ensure_directory, format_duration

logger = logging.getLogger(__name__)

TrialKey = Tuple[str, int, int]


def learner_label(spec: Dict[str, Any]) -> str:
    """Name of an algorithm spec in reports: its `name`, else kind plus variant."""
    if spec.get("name"):
        return str(spec["name"])
    kind = spec["kind"]
    if kind == "dhm":
        return f"dhm-{spec.get('threshold_kind', 'eq4')}"
    return kind


def create_learner(spec: Dict[str, Any], cfg: ExperimentConfig,
                   C: Optional[HypothesisClass] = None,
                   structure: Optional[NestedStructure] = None) -> BaseLearner:
    """Learner for one algorithm spec; per-spec keys override the experiment defaults."""
    kind = spec.get("kind")
    C = C if C is not None else HypothesisClass.from_spec(spec.get("class", cfg.hypothesis_class))
    delta = float(spec.get("delta", cfg.delta))
    grid_size = int(spec.get("grid_size", cfg.grid_size))
    cap = int(spec.get("unlabeled_cap", cfg.unlabeled_cap))
    bounds = BoundConfig.from_dict({"grid_size": grid_size, **cfg.bounds, **spec.get("bounds", {})})

    if kind == "cal":
        return CALLearner(C, grid_size, cap)
    if kind == "a2":
        return A2Learner(C, delta, spec.get("mass_mode"), int(spec.get("mc_pool", cfg.mc_pool)),
                         int(spec.get("mc_seed", 0)), grid_size, cap)
    if kind == "dhm":
        return DHMLearner(C, delta, spec.get("threshold_kind", "eq4"), bounds, grid_size, cap)
    if kind == "model_select":
        if structure is None:
            if not cfg.structure:
                raise ConfigurationError("model_select needs a nonempty structure")
            structure = NestedStructure.from_spec(cfg.structure, grid_size=grid_size)
        return ModelSelectLearner(structure, delta, bounds, grid_size, cap)
    if kind == "passive":
        return PassiveERMLearner(C, grid_size, cap)
    raise ConfigurationError(f"Unknown algorithm kind: {kind}")


@dataclass
class ExperimentResult:
    """Curves of one experiment, keyed by algorithm label."""

    config: ExperimentConfig
    problem: NoiseProblem
    curves: Dict[str, LearningCurve] = field(default_factory=dict)
    trace_paths: List[Path] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def failures(self) -> List[TrialRecord]:
        return [r for c in self.curves.values() for r in c.failures()]


def run_trial(learner: BaseLearner, label: str, problem: NoiseProblem, n: int, trial: int,
              seed: int) -> Tuple[TrialRecord, RunTrace]:
    """One run on a fresh stream; excess error is er(h) - nu for the learner's class."""
    stream = LabeledStream(problem, seed, n)
    start = time.perf_counter()
    result = learner.run(stream, n)
    wall = time.perf_counter() - start

    excess = math.nan
    if result.succeeded:
        excess = problem.excess_error(result.hypothesis, learner.C)
    record = TrialRecord(label, n, trial, seed, excess, result.labels_used,
                         result.unlabeled_used, wall, result.failure)
    return record, result.trace


def _trace_path(root: Path, key: TrialKey) -> Path:
    label, n, trial = key
    return root / "traces" / f"{label}_n{n}_t{trial}.jsonl"


def run_experiment(cfg: ExperimentConfig,
                   on_trial: Optional[Callable[[TaskResult], None]] = None) -> ExperimentResult:
    """Every (algorithm, budget, trial) cell of the configuration, run concurrently.

    Streams depend only on (base_seed, budget, trial), so all algorithms in
    one cell see the same data; records are assembled by key.
    """
    cfg.validate()
    started = time.perf_counter()
    problem = problem_from_spec(cfg.problem)
    C = HypothesisClass.from_spec(cfg.hypothesis_class)

    learners: Dict[str, BaseLearner] = {}
    for spec in cfg.algorithms:
        label = learner_label(spec)
        if label in learners:
            raise ConfigurationError(f"Duplicate algorithm label: {label}")
        learners[label] = create_learner(spec, cfg, C if "class" not in spec else None)
        # nu is cached on the problem before the worker threads start
        problem.noise_rate(learners[label].C)

    tasks: Dict[TrialKey, Callable[[], Tuple[TrialRecord, RunTrace]]] = {}
    for label, learner in learners.items():
        for n in cfg.budgets:
            for trial in range(cfg.trials):
                seed = derive_trial_seed(cfg.base_seed, n, trial)
                tasks[(label, n, trial)] = (
                    lambda lr=learner, lb=label, n=n, t=trial, s=seed:
                    run_trial(lr, lb, problem, n, t, s)
                )

    logger.info(f"Running {len(tasks)} trials of {len(learners)} algorithms on {problem.name}")
    outcomes = {r.task_id: r for r in run_parallel_tasks(tasks, cfg.max_workers,
                                                         on_complete=on_trial)}

    result = ExperimentResult(cfg, problem)
    kappa = problem.tsybakov.kappa if problem.tsybakov else None
    for label in learners:
        result.curves[label] = LearningCurve(label, problem.name, kappa)

    for key in sorted(outcomes):
        label, n, trial = key
        outcome = outcomes[key]
        if outcome.success:
            record, trace = outcome.result
        else:
            logger.error(f"Trial {key} raised: {outcome.exception}")
            record = TrialRecord(label, n, trial, derive_trial_seed(cfg.base_seed, n, trial),
                                 failure=f"error: {outcome.exception}")
            trace = None
        result.curves[label].add(record)

        if cfg.write_traces and trace is not None:
            path = _trace_path(Path(cfg.output_dir), key)
            try:
                ensure_directory(path.parent)
                result.trace_paths.append(trace.save(path))
            except OSError as e:
                raise ReportError(f"Cannot write trace {path}: {e}", e)

    result.elapsed = time.perf_counter() - started
    logger.info(f"Experiment {cfg.name} finished in {format_duration(result.elapsed)}")
    return result
