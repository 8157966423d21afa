"""Unlabeled stream with a budget-counting label oracle."""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import BudgetExhaustedError, StreamIndexError, ValidationError
from ..core.models import IndexedLabel
from .problems import NoiseProblem

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1024


class LabeledStream:
    """i.i.d. pairs (X_i, Y_i), i = 1, 2, ..., drawn chunk by chunk from a seed.

    Points are free to look at; labels come only through `query_label`, which
    charges the budget once per index. Chunks are drawn as X then the label
    uniforms, so the pairs do not depend on how far or in what order the
    stream is read.
    """

    def __init__(self, problem: Optional[NoiseProblem], seed: int, budget: int):
        if budget < 0:
            raise ValidationError(f"label budget must be nonnegative, got {budget}")
        self.problem = problem
        self.seed = int(seed)
        self.budget = int(budget)
        self._rng = np.random.default_rng(self.seed)
        self._x: List[np.ndarray] = []
        self._y: List[np.ndarray] = []
        self._materialized = 0
        self._length: Optional[int] = None
        self._revealed: Dict[int, int] = {}
        self.unlabeled_used = 0

    @classmethod
    def from_arrays(cls, xs: Sequence, ys: Sequence[int], budget: int) -> LabeledStream:
        """Fixed finite stream over hand-built points and labels."""
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=int)
        if x.shape[0] != y.shape[0]:
            raise ValidationError("points and labels differ in length")
        if np.any((y != 1) & (y != -1)):
            raise ValidationError("labels must be -1 or +1")
        stream = cls(None, 0, budget)
        stream._x, stream._y = [x], [y]
        stream._materialized = stream._length = int(x.shape[0])
        return stream

    # Stream access

    @property
    def length(self) -> Optional[int]:
        """Number of points for a fixed stream, None when unbounded."""
        return self._length

    @property
    def labels_used(self) -> int:
        return len(self._revealed)

    @property
    def remaining_budget(self) -> int:
        return self.budget - self.labels_used

    def _materialize(self, m: int) -> None:
        if self._length is not None:
            if m > self._length:
                raise StreamIndexError(f"index {m} beyond the fixed stream of length {self._length}")
            return
        while self._materialized < m:
            x = self.problem.marginal.sample(self._rng, CHUNK_SIZE)
            u = self._rng.random(CHUNK_SIZE)
            self._x.append(x)
            self._y.append(np.where(u < self.problem.eta(x), 1, -1))
            self._materialized += CHUNK_SIZE
        if len(self._x) > 1:
            self._x = [np.concatenate(self._x)]
            self._y = [np.concatenate(self._y)]

    def _check(self, indices: np.ndarray) -> None:
        if indices.size and indices.min() < 1:
            raise StreamIndexError("stream indices start at 1")

    def has(self, i: int) -> bool:
        """Whether X_i exists; always true for an unbounded stream."""
        return i >= 1 and (self._length is None or i <= self._length)

    def points(self, indices: Sequence[int]) -> np.ndarray:
        """X_i for the given 1-based indices."""
        idx = np.asarray(indices, dtype=int).reshape(-1)
        self._check(idx)
        if not idx.size:
            return self._x[0][:0] if self._x else np.zeros(0)
        top = int(idx.max())
        self._materialize(top)
        self.unlabeled_used = max(self.unlabeled_used, top)
        return self._x[0][idx - 1]

    def point(self, i: int) -> np.ndarray:
        return self.points([i])[0]

    def sample_unlabeled(self, m: int) -> np.ndarray:
        """X_1, ..., X_m."""
        return self.points(np.arange(1, m + 1))

    def query_label(self, i: int) -> int:
        """Y_i; the first request of each index costs one label."""
        if i in self._revealed:
            return self._revealed[i]
        if self.labels_used >= self.budget:
            raise BudgetExhaustedError(f"label budget of {self.budget} exhausted at index {i}")
        self._check(np.array([i]))
        self._materialize(i)
        self.unlabeled_used = max(self.unlabeled_used, i)
        label = int(self._y[0][i - 1])
        self._revealed[i] = label
        logger.debug(f"Revealed Y_{i} = {label:+d} ({self.labels_used}/{self.budget})")
        return label

    def query(self, i: int) -> IndexedLabel:
        return IndexedLabel(i, self.query_label(i))

    def revealed_labels(self) -> List[IndexedLabel]:
        return [IndexedLabel(i, y) for i, y in sorted(self._revealed.items())]

    def to_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(points, labels) of a fixed stream."""
        if self._length is None:
            raise StreamIndexError("an unbounded stream has no finite arrays")
        return self._x[0].copy(), self._y[0].copy()

    def fresh_copy(self, budget: Optional[int] = None) -> LabeledStream:
        """Same pairs, nothing revealed."""
        if self._length is not None:
            return LabeledStream.from_arrays(self._x[0], self._y[0],
                                             self.budget if budget is None else budget)
        return LabeledStream(self.problem, self.seed, self.budget if budget is None else budget)
