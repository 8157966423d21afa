"""Core data models for Active Rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .exceptions import ValidationError


class EstimationMode(Enum):
    """How a probability mass is obtained."""
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True, order=True)
class IndexedLabel:
    """A (stream index, label) pair; indices are 1-based like X_1, X_2, ..."""

    index: int
    label: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValidationError(f"stream indices start at 1, got {self.index}")
        if self.label not in (-1, 1):
            raise ValidationError(f"labels are -1 or +1, got {self.label}")


@dataclass(frozen=True)
class MassEstimate:
    """Probability of a region, with the standard error of the estimate."""

    value: float
    stderr: float = 0.0
    mode: EstimationMode = EstimationMode.EXACT
    samples: int = 0

    def __post_init__(self) -> None:
        if not -1e-12 <= self.value <= 1.0 + 1e-12:
            raise ValidationError(f"mass {self.value} outside [0, 1]")


@dataclass
class TrialRecord:
    """One (algorithm, budget, trial) outcome of an experiment."""

    algorithm: str
    n: int
    trial: int
    seed: int
    excess_error: float = math.nan
    labels_used: int = 0
    unlabeled_used: int = 0
    wall_time: float = 0.0
    failure: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.failure is None and not math.isnan(self.excess_error)

    def to_row(self) -> Dict[str, Any]:
        """CSV row with the documented column set."""
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "trial": self.trial,
            "excess_error": repr(float(self.excess_error)),
            "labels_used": self.labels_used,
            "unlabeled_used": self.unlabeled_used,
            "seed": self.seed,
        }


# Excess errors below this are numerical noise around zero.
EXCESS_ERROR_TOLERANCE = 1e-9


@dataclass
class LearningCurve:
    """Per-budget excess-error records of one algorithm on one problem."""

    algorithm: str
    problem: str = ""
    kappa: Optional[float] = None
    records: List[TrialRecord] = field(default_factory=list)

    def add(self, record: TrialRecord) -> None:
        if record.succeeded and record.excess_error < -EXCESS_ERROR_TOLERANCE:
            raise ValidationError(
                f"negative excess error {record.excess_error} at n={record.n}"
            )
        self.records.append(record)

    @property
    def budgets(self) -> List[int]:
        return sorted({r.n for r in self.records})

    def sorted_records(self) -> List[TrialRecord]:
        return sorted(self.records, key=lambda r: (r.n, r.trial))

    def errors_at(self, n: int) -> np.ndarray:
        """Successful excess errors at budget n, in trial order."""
        rows = [r for r in self.sorted_records() if r.n == n and r.succeeded]
        return np.array([max(r.excess_error, 0.0) for r in rows], dtype=float)

    def median(self, n: int) -> float:
        errors = self.errors_at(n)
        return float(np.median(errors)) if errors.size else math.nan

    def iqr(self, n: int) -> Tuple[float, float]:
        errors = self.errors_at(n)
        if not errors.size:
            return (math.nan, math.nan)
        lo, hi = np.percentile(errors, [25, 75])
        return (float(lo), float(hi))

    def failures(self) -> List[TrialRecord]:
        return [r for r in self.records if not r.succeeded]

    def is_complete(self, budgets: List[int], trials: int) -> bool:
        keys = {(r.n, r.trial) for r in self.records}
        return all((n, t) in keys for n in budgets for t in range(trials))

    def summary(self) -> List[Dict[str, Any]]:
        rows = []
        for n in self.budgets:
            lo, hi = self.iqr(n)
            labels = [r.labels_used for r in self.records if r.n == n]
            rows.append({
                "n": n,
                "median": self.median(n),
                "q25": lo,
                "q75": hi,
                "mean_labels": float(np.mean(labels)) if labels else 0.0,
                "failures": sum(1 for r in self.records if r.n == n and not r.succeeded),
            })
        return rows


@dataclass(frozen=True)
class RateFit:
    """Least-squares rate fit of median excess error against the budget."""

    model: str  # "power-law" or "exponential"
    slope: float
    intercept: float
    r_squared: float
    fit_range: Tuple[int, int]
    slope_interval: Tuple[float, float]
    n_points: int
    excluded: Tuple[int, ...] = ()

    def excludes(self, value: float) -> bool:
        lo, hi = self.slope_interval
        return not lo <= value <= hi


@dataclass(frozen=True)
class ThetaEstimate:
    """Disagreement coefficient as a sup of P(DIS(B(h,r)))/r over a radius grid."""

    value: float
    r_grid: Tuple[float, ...]
    masses: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    r0: float
    mode: EstimationMode
    argmax_r: float

    @property
    def stderr(self) -> float:
        """Standard error of the ratio at the maximizing radius."""
        i = self.r_grid.index(self.argmax_r)
        return self.stderrs[i] / self.argmax_r


@dataclass(frozen=True)
class LemmaCheck:
    """Pass/fail record of one disagreement-coefficient inequality."""

    lemma: str
    fixture: str
    passed: bool
    lhs: float
    rhs: float
    slack: float
    detail: str = ""
