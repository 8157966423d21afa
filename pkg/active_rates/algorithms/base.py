"""Base learner class, run results and the constrained ERM subroutine."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.models import IndexedLabel
from ..hypothesis_spaces import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    Hypothesis,
    HypothesisClass,
    PointTable,
    Region,
    induced_labelings,
    stream_points,
)
from ..noise_problems import LabeledStream
from .trace import RunTrace

logger = logging.getLogger(__name__)

SCAN_CHUNK = 1024
DEFAULT_UNLABELED_CAP = 1_000_000


@dataclass
class LearnerResult:
    """Classifier returned by a run, with its trace; a failure is a value, never raised."""

    hypothesis: Optional[Hypothesis]
    trace: RunTrace
    labels_used: int = 0
    unlabeled_used: int = 0
    failure: Optional[str] = None
    L: List[IndexedLabel] = field(default_factory=list)
    Q: List[IndexedLabel] = field(default_factory=list)
    forced_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    forced_labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return self.failure is None and self.hypothesis is not None

    @property
    def inferred_count(self) -> int:
        """|L|, counting labels forced by earlier inferences."""
        return len(self.L) + int(self.forced_indices.size)

    def all_inferred(self) -> List[IndexedLabel]:
        """Every (i, y) in L, in index order."""
        forced = [IndexedLabel(int(i), int(y)) for i, y in zip(self.forced_indices, self.forced_labels)]
        return sorted(self.L + forced)


class BaseLearner(ABC):
    """Base class for all learners: a class C, a label budget and a stream."""

    kind: str = ""

    def __init__(self, C: HypothesisClass, grid_size: int = DEFAULT_GRID_SIZE,
                 unlabeled_cap: int = DEFAULT_UNLABELED_CAP):
        self.C = C
        self.grid_size = grid_size
        self.unlabeled_cap = unlabeled_cap
        self.working_class = working_class(C, grid_size)

    @abstractmethod
    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        """Run with label budget n (the stream's budget by default)."""
        pass

    def parameters(self) -> Dict[str, Any]:
        return {"class": self.C.to_spec(), "grid_size": self.grid_size,
                "unlabeled_cap": self.unlabeled_cap}

    def new_trace(self, stream: LabeledStream, n: int) -> RunTrace:
        header: Dict[str, Any] = {"learner": self.parameters(), "budget": n, "seed": stream.seed}
        if stream.problem is not None:
            header["problem"] = stream.problem.to_spec()
        else:
            points, labels = stream.to_arrays()
            header["points"], header["labels"] = points.tolist(), labels.tolist()
        return RunTrace(self.kind, header)


def working_class(C: HypothesisClass, grid_size: int = DEFAULT_GRID_SIZE) -> HypothesisClass:
    """C itself when labelings are exact, else a fixed grid of it."""
    if C.kind is ClassKind.HALFSPACE:
        logger.debug(f"Working with a {grid_size}-member grid of {C.name}")
        return C.to_grid(grid_size)
    if C.kind is ClassKind.UNION:
        parts = tuple(working_class(p, grid_size) for p in C.parts)
        return HypothesisClass.union(*parts)
    return C


def constrained_erm(C: HypothesisClass, L: Iterable[IndexedLabel], Q: Iterable[IndexedLabel],
                    stream: Any, grid_size: int = DEFAULT_GRID_SIZE
                    ) -> Tuple[Optional[Hypothesis], float]:
    """Learn_C(L, Q) and its mistake count on Q; (None, inf) when no member fits L."""
    L, Q = list(L), list(Q)
    if C.kind is ClassKind.UNION:
        best: Tuple[Optional[Hypothesis], float] = (None, float("inf"))
        for part in C.parts:
            h, mistakes = constrained_erm(part, L, Q, stream, grid_size)
            if h is not None and mistakes < best[1]:
                best = (h, mistakes)
        return best

    table = PointTable.build(stream, L, Q)
    labelings = induced_labelings(C, table, grid_size)
    h = labelings.erm_hypothesis()
    if h is None:
        return None, float("inf")
    return h, mistakes_on(h, Q, stream)


def learn_constrained(C: HypothesisClass, L: Iterable[IndexedLabel], Q: Iterable[IndexedLabel],
                      stream: Any, grid_size: int = DEFAULT_GRID_SIZE) -> Optional[Hypothesis]:
    """argmin over h in C with er_L(h) = 0 of er_Q(h); None when no member fits L."""
    return constrained_erm(C, L, Q, stream, grid_size)[0]


def mistakes_on(h: Hypothesis, Q: Sequence[IndexedLabel], stream: Any) -> float:
    if not Q:
        return 0.0
    x = stream_points(stream, [p.index for p in Q])
    y = np.array([p.label for p in Q])
    return float(np.sum(np.atleast_1d(h.predict(x)) != y))


def next_in_region(stream: LabeledStream, region: Region, after: int,
                   limit: int) -> Tuple[Optional[int], int]:
    """First index in (after, limit] whose point lies in the region.

    Returns (index or None, last index examined).
    """
    if stream.length is not None:
        limit = min(limit, stream.length)
    if region.is_empty:
        return None, after
    start = after + 1
    while start <= limit:
        stop = min(start + SCAN_CHUNK - 1, limit)
        inside = np.flatnonzero(region.contains(stream.points(np.arange(start, stop + 1))))
        if inside.size:
            return start + int(inside[0]), start + int(inside[0])
        start = stop + 1
    return None, limit
