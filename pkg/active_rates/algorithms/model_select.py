"""Model selection over a nested structure C_1 within C_2 within ... C_k."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import IndexedLabel
from ..bounds import BoundConfig, RademacherDraw, hat_bound
from ..hypothesis_spaces import DEFAULT_GRID_SIZE, Hypothesis, HypothesisClass, UniformSphere
from ..noise_problems import LabeledStream
from .base import (
    DEFAULT_UNLABELED_CAP,
    BaseLearner,
    LearnerResult,
    learn_constrained,
    mistakes_on,
    working_class,
)
from .dhm import DHMLearner

logger = logging.getLogger(__name__)

CHECK_POINTS = 6


@dataclass
class NestedStructure:
    """Ordered classes with each member set inside the next; d_i and theta_i are tags."""

    classes: List[HypothesisClass]
    thetas: List[Optional[float]] = field(default_factory=list)
    verify: bool = True
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self) -> None:
        if not self.classes:
            raise ValidationError("a nested structure needs at least one class")
        if len({C.dim for C in self.classes}) > 1:
            raise ValidationError("nested classes must share one instance space")
        if not self.thetas:
            self.thetas = [None] * len(self.classes)
        if len(self.thetas) != len(self.classes):
            raise ValidationError("one theta tag per class")
        if self.verify:
            self.verify_nesting()

    @classmethod
    def from_spec(cls, specs: Sequence[Dict[str, Any]], **kwargs: Any) -> NestedStructure:
        return cls([HypothesisClass.from_spec(s) for s in specs], **kwargs)

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, i: int) -> HypothesisClass:
        """C_i for 1-based i."""
        return self.classes[i - 1]

    @property
    def vc_dimensions(self) -> List[int]:
        return [C.vc_dimension for C in self.classes]

    def check_points(self) -> np.ndarray:
        dim = self.classes[0].dim
        if dim == 1:
            return (np.arange(CHECK_POINTS) + 0.5) / CHECK_POINTS
        return UniformSphere(dim).sample(np.random.default_rng(0), CHECK_POINTS)

    def verify_nesting(self) -> None:
        """Check every labeling C_i induces on the check points is induced by C_(i+1)."""
        points = self.check_points()
        for i in range(len(self.classes) - 1):
            inner = self._labelings(self.classes[i], points)
            outer = self._labelings(self.classes[i + 1], points)
            missing = inner - outer
            if missing:
                raise ValidationError(
                    f"{self.classes[i].name} is not nested in {self.classes[i + 1].name}: "
                    f"{len(missing)} labelings missing on the check points"
                )

    def _labelings(self, C: HypothesisClass, points: np.ndarray) -> set:
        rows = C.to_grid(self.grid_size).prediction_matrix(points)
        return {tuple(row) for row in np.unique(rows, axis=0)}

    def to_spec(self) -> List[Dict[str, Any]]:
        return [C.to_spec() for C in self.classes]


@dataclass
class _ClassRun:
    """Output of the DHM run on one C_i."""

    i: int
    L: List[IndexedLabel]
    Q: List[IndexedLabel]
    forced: np.ndarray
    delta: float
    h: Optional[Hypothesis] = None

    @property
    def size(self) -> int:
        return len(self.L) + len(self.Q) + int(self.forced.size)


def class_budgets(n: int, k: int) -> Dict[int, int]:
    """floor(n / (2 i^2)) labels for i from min(floor(sqrt(n/2)), k) down to 1."""
    top = min(math.isqrt(n // 2), k) if n >= 2 else 0
    return {i: n // (2 * i * i) for i in range(top, 0, -1)}


class ModelSelectLearner(BaseLearner):
    """Runs the DHM learner on each class and keeps the smallest class that survives comparison."""

    kind = "model_select"

    def __init__(self, structure: NestedStructure, delta: float = 0.05,
                 bound_config: Optional[BoundConfig] = None, grid_size: int = DEFAULT_GRID_SIZE,
                 unlabeled_cap: int = DEFAULT_UNLABELED_CAP):
        super().__init__(structure.classes[-1], grid_size, unlabeled_cap)
        if not 0.0 < delta < 0.5:
            raise ValidationError(f"delta must be in (0, 1/2), got {delta}")
        self.structure = structure
        self.delta = delta
        self.bound_config = bound_config or BoundConfig(grid_size=grid_size)

    def parameters(self) -> Dict[str, Any]:
        return {"structure": self.structure.to_spec(), "delta": self.delta,
                "grid_size": self.grid_size, "unlabeled_cap": self.unlabeled_cap,
                "bounds": self.bound_config.to_dict()}

    def _accepts(self, run: _ClassRun, later: _ClassRun, stream: LabeledStream,
                 draw: RademacherDraw, values: Dict[str, Any]) -> bool:
        """er(h_in) - er(h_jn) on L_jn U Q_jn within 3/2 hat_bound of C_j."""
        if later.size == 0:
            return True
        gap = (mistakes_on(run.h, later.Q, stream) - mistakes_on(later.h, later.Q, stream)) / later.size
        if gap <= 0.0:
            values[f"gap_{later.i}"] = gap
            return True
        C_j = working_class(self.structure[later.i], self.grid_size)
        bound = 1.5 * hat_bound(later.L + later.Q, later.delta, later.L, C_j, stream, draw,
                                self.bound_config, later.forced)
        values[f"gap_{later.i}"] = gap
        values[f"bound_{later.i}"] = bound
        return gap <= bound

    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        n = stream.budget if n is None else n
        trace = self.new_trace(stream, n)
        draw = RademacherDraw(self.bound_config.rademacher_seed)
        budgets = class_budgets(n, len(self.structure))
        budget_ok = sum(budgets.values()) <= n
        if not budget_ok:
            raise ValidationError(f"class budgets {budgets} exceed the total budget {n}")

        runs: Dict[int, _ClassRun] = {}
        h_hat: Optional[Hypothesis] = None
        accepted: Optional[int] = None
        for i, n_i in budgets.items():
            delta_i = self.delta / (2 * i * i)
            learner = DHMLearner(self.structure[i], delta_i, "eq4", self.bound_config,
                                 self.grid_size, self.unlabeled_cap)
            result = learner.run(stream, n_i)
            run = _ClassRun(i, result.L, result.Q, result.forced_indices, delta_i)

            # members of C_i consistent with L_jn core agree with its forced labels
            constraints = [p for j, r in runs.items() for p in r.L] + run.L
            run.h = learn_constrained(learner.working_class, constraints, run.Q, stream,
                                      self.grid_size)
            runs[i] = run
            trace.record(i, "class-run", budget=n_i, delta=delta_i, queried=len(run.Q),
                         inferred=run.size - len(run.Q),
                         hypothesis=None if run.h is None else run.h.to_dict())
            if run.h is None:
                logger.debug(f"Learn on C_{i} with the pooled constraints is empty")
                continue

            values: Dict[str, Any] = {}
            later = [r for j, r in runs.items() if j > i and r.h is not None]
            if all(self._accepts(run, r, stream, draw, values) for r in later):
                h_hat, accepted = run.h, i
                trace.record(i, "accept", **values)
            else:
                trace.record(i, "reject", **values)

        failure = None if h_hat is not None else "all h_in empty"
        trace.finish(None if h_hat is None else h_hat.to_dict(), stream.labels_used,
                     stream.unlabeled_used, failure, accepted=accepted, budgets=budgets)
        return LearnerResult(h_hat, trace, stream.labels_used, stream.unlabeled_used, failure,
                             extras={"accepted": accepted, "budgets": budgets,
                                     "budget_audit": budget_ok})


def model_select(structure: NestedStructure, stream: LabeledStream, n: Optional[int] = None,
                 delta: float = 0.05, **kwargs) -> LearnerResult:
    """Functional form of `ModelSelectLearner.run`."""
    return ModelSelectLearner(structure, delta, **kwargs).run(stream, n)
