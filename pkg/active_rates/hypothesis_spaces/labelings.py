"""Distinct labelings a class induces on a finite point set.

Sups over an infinite class restricted to sample points are sups over these
labelings: thresholds induce M+1 of them on M distinct points, intervals
M(M+1)/2+1 and finite classes at most one per member. Constraint sets L and
evaluation sets S are aggregated per distinct point, so every quantity is a
weighted count.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import UnsupportedError
from ..core.models import IndexedLabel
from .hypotheses import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    Hypothesis,
    HypothesisClass,
    stream_points,
    tie_break_gap,
    tie_break_interval,
)
from .version_space import ZInterval, max_pairwise_disagreement

logger = logging.getLogger(__name__)

_CHUNK = 512


@dataclass
class PointTable:
    """Per distinct point: label counts of L and S, and summed Rademacher signs of S."""

    points: np.ndarray
    l_pos: np.ndarray
    l_neg: np.ndarray
    s_pos: np.ndarray
    s_neg: np.ndarray
    xi: np.ndarray
    s_size: int

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def s_weight(self) -> np.ndarray:
        return self.s_pos + self.s_neg

    @classmethod
    def build(cls, stream: Any, L: Iterable[IndexedLabel], S: Iterable[IndexedLabel],
              signs: Optional[Callable[[Sequence[int]], np.ndarray]] = None) -> PointTable:
        L, S = list(L), list(S)
        indices = [p.index for p in L] + [p.index for p in S]
        labels = np.array([p.label for p in L] + [p.label for p in S], dtype=int)
        in_s = np.array([False] * len(L) + [True] * len(S), dtype=bool)

        x = stream_points(stream, indices) if indices else np.zeros(0)
        if x.ndim > 1:
            points, inverse = np.unique(x, axis=0, return_inverse=True)
        else:
            points, inverse = np.unique(x, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        m = points.shape[0]

        def count(select: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
            w = select.astype(float) if weights is None else np.where(select, weights, 0.0)
            return np.bincount(inverse, weights=w, minlength=m).astype(float)

        xi_values = np.zeros(len(indices))
        if signs is not None and S:
            xi_values[len(L):] = signs([p.index for p in S])

        return cls(
            points=points,
            l_pos=count(~in_s & (labels == 1)),
            l_neg=count(~in_s & (labels == -1)),
            s_pos=count(in_s & (labels == 1)),
            s_neg=count(in_s & (labels == -1)),
            xi=count(in_s, xi_values),
            s_size=len(S),
        )


def _cum(values: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(values)])


class InducedLabelings(ABC):
    """Labelings of a class on a PointTable that are consistent with its L counts.

    Labelings are kept in tie-break order (smallest parameter or lowest grid
    index first); every array below is indexed by that order.
    """

    def __init__(self, C: HypothesisClass, table: PointTable):
        self.C = C
        self.table = table

    @property
    @abstractmethod
    def size(self) -> int:
        """Number of L-consistent labelings."""

    @property
    def feasible(self) -> bool:
        return self.size > 0

    @abstractmethod
    def mistakes(self) -> np.ndarray:
        """S mistakes of each labeling, as counts."""

    @abstractmethod
    def rademacher_sums(self) -> np.ndarray:
        """Sum over S of xi_i * h(X_i) for each labeling."""

    @abstractmethod
    def max_disagreement(self, select: np.ndarray) -> Tuple[float, bool]:
        """Max over selected pairs of S-weighted disagreement counts, and exactness."""

    @abstractmethod
    def hypothesis(self, k: int) -> Hypothesis:
        """A hypothesis of C realizing labeling k."""

    def erm(self) -> Tuple[int, float]:
        """First labeling of minimal S mistakes."""
        mistakes = self.mistakes()
        k = int(np.argmin(mistakes))
        return k, float(mistakes[k])

    def erm_hypothesis(self) -> Optional[Hypothesis]:
        if not self.feasible:
            return None
        return self.hypothesis(self.erm()[0])


class ThresholdLabelings(InducedLabelings):
    """Labeling k puts +1 on the distinct points u_k, u_{k+1}, ..."""

    def __init__(self, C: HypothesisClass, table: PointTable):
        super().__init__(C, table)
        u = table.points
        m = u.size
        self.u = u
        self.c_lpos, self.c_lneg = _cum(table.l_pos), _cum(table.l_neg)
        self.c_spos, self.c_sneg = _cum(table.s_pos), _cum(table.s_neg)
        self.c_xi, self.c_w = _cum(table.xi), _cum(table.s_weight)

        k = np.arange(m + 1)
        violations = self.c_lpos[k] + (self.c_lneg[-1] - self.c_lneg[k])
        realizable = np.ones(m + 1, dtype=bool)
        # all-negative labeling needs z > u_{M-1}
        if m and u[-1] >= 1.0:
            realizable[m] = False
        self.ks = k[(violations == 0) & realizable]

    @property
    def size(self) -> int:
        return int(self.ks.size)

    def mistakes(self) -> np.ndarray:
        k = self.ks
        return self.c_spos[k] + (self.c_sneg[-1] - self.c_sneg[k])

    def rademacher_sums(self) -> np.ndarray:
        return self.c_xi[-1] - 2.0 * self.c_xi[self.ks]

    def max_disagreement(self, select: np.ndarray) -> Tuple[float, bool]:
        chosen = self.ks[np.asarray(select, dtype=bool)]
        if chosen.size <= 1:
            return 0.0, True
        return float(self.c_w[chosen.max()] - self.c_w[chosen.min()]), True

    def cell(self, k: int) -> ZInterval:
        """Threshold parameters realizing labeling k: (u_{k-1}, u_k]."""
        m = self.u.size
        lo = 0.0 if k == 0 else float(self.u[k - 1])
        hi = 1.0 if k == m else float(self.u[k])
        return ZInterval(lo, hi, k == 0, True)

    def cells(self) -> Sequence[ZInterval]:
        return [self.cell(int(k)) for k in self.ks]

    def hypothesis(self, k: int) -> Hypothesis:
        return Hypothesis.threshold(self.cell(int(self.ks[k])).smallest())


class IntervalLabelings(InducedLabelings):
    """Runs [i, j) of consecutive distinct points labeled +1, plus the empty labeling.

    The empty labeling, when consistent, comes first; runs follow in
    lexicographic (i, j) order.
    """

    def __init__(self, C: HypothesisClass, table: PointTable):
        super().__init__(C, table)
        self.u = table.points
        m = self.u.size
        self.c_lpos, self.c_lneg = _cum(table.l_pos), _cum(table.l_neg)
        self.c_spos, self.c_sneg = _cum(table.s_pos), _cum(table.s_neg)
        self.c_xi, self.c_w = _cum(table.xi), _cum(table.s_weight)
        self.gain = self.c_spos - self.c_sneg

        pos_idx = np.flatnonzero(table.l_pos > 0)
        neg_idx = np.flatnonzero(table.l_neg > 0)
        self.has_empty = pos_idx.size == 0
        self.i_range: Optional[Tuple[int, int]] = None
        self.segments: Sequence[Tuple[int, int]] = ()
        self.infeasible = False

        if pos_idx.size:
            p0, p1 = int(pos_idx[0]), int(pos_idx[-1])
            inside = neg_idx[(neg_idx >= p0) & (neg_idx <= p1)]
            if inside.size:
                self.infeasible = True
            else:
                left = neg_idx[neg_idx < p0]
                right = neg_idx[neg_idx > p1]
                self.i_range = (int(left[-1]) + 1 if left.size else 0, p0)
                self.j_range = (p1 + 1, int(right[0]) if right.size else m)
        else:
            edges = [-1] + neg_idx.tolist() + [m]
            self.segments = [(s + 1, e) for s, e in zip(edges, edges[1:]) if e > s + 1]

        self._runs: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def runs(self) -> Tuple[np.ndarray, np.ndarray]:
        """(I, J) of every consistent run; the empty labeling is (0, 0)."""
        if self._runs is not None:
            return self._runs
        starts, ends = [], []
        if self.has_empty:
            starts.append(np.zeros(1, dtype=int))
            ends.append(np.zeros(1, dtype=int))
        if self.i_range is not None:
            i = np.arange(self.i_range[0], self.i_range[1] + 1)
            j = np.arange(self.j_range[0], self.j_range[1] + 1)
            ii, jj = np.meshgrid(i, j, indexing="ij")
            starts.append(ii.ravel())
            ends.append(jj.ravel())
        for s, e in self.segments:
            # runs [i, j) with s <= i < j <= e
            ii, jj = np.triu_indices(e - s + 1, k=1)
            starts.append(ii + s)
            ends.append(jj + s)
        if self.infeasible or not starts:
            self._runs = (np.zeros(0, dtype=int), np.zeros(0, dtype=int))
        else:
            self._runs = (np.concatenate(starts), np.concatenate(ends))
        return self._runs

    @property
    def size(self) -> int:
        if self.infeasible:
            return 0
        if self._runs is not None:
            return int(self._runs[0].size)
        count = 1 if self.has_empty else 0
        if self.i_range is not None:
            count += (self.i_range[1] - self.i_range[0] + 1) * (self.j_range[1] - self.j_range[0] + 1)
        count += sum((e - s + 1) * (e - s) // 2 for s, e in self.segments)
        return count

    def mistakes(self) -> np.ndarray:
        i, j = self.runs()
        return self.c_spos[-1] - (self.gain[j] - self.gain[i])

    def rademacher_sums(self) -> np.ndarray:
        i, j = self.runs()
        return 2.0 * (self.c_xi[j] - self.c_xi[i]) - self.c_xi[-1]

    def max_disagreement(self, select: np.ndarray) -> Tuple[float, bool]:
        i, j = self.runs()
        select = np.asarray(select, dtype=bool)
        return max_pairwise_disagreement(self.c_w[i[select]], self.c_w[j[select]])

    def _run_hypothesis(self, i: int, j: int) -> Hypothesis:
        m = self.u.size
        if i == j:
            edges = [0.0] + self.u.tolist() + [1.0]
            for k, (lo, hi) in enumerate(zip(edges, edges[1:])):
                if hi > lo:
                    return tie_break_gap(lo, k > 0, hi, k < m)
            raise UnsupportedError("no gap between the points for an empty interval")
        a_lo = 0.0 if i == 0 else float(self.u[i - 1])
        b_hi = 1.0 if j == m else float(self.u[j])
        return tie_break_interval(a_lo, i > 0, float(self.u[i]), float(self.u[j - 1]), b_hi, j < m)

    def hypothesis(self, k: int) -> Hypothesis:
        i, j = self.runs()
        return self._run_hypothesis(int(i[k]), int(j[k]))

    def erm(self) -> Tuple[int, float]:
        if self.size <= 2_000_000:
            return super().erm()
        raise UnsupportedError("enumerating this many interval labelings; use erm_hypothesis")

    def erm_hypothesis(self) -> Optional[Hypothesis]:
        """Constrained ERM in linear time, same tie-break as the enumeration order."""
        if not self.feasible:
            return None
        g = self.gain
        if self.i_range is not None:
            i = self.i_range[0] + int(np.argmin(g[self.i_range[0]:self.i_range[1] + 1]))
            j = self.j_range[0] + int(np.argmax(g[self.j_range[0]:self.j_range[1] + 1]))
            return self._run_hypothesis(i, j)

        best_gain, best = 0.0, (0, 0)
        for s, e in self.segments:
            seg = g[s:e + 1]
            # best end strictly after each start
            suffix = np.maximum.accumulate(seg[::-1])[::-1]
            gains = suffix[1:] - seg[:-1]
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                start = s + k
                end = start + 1 + int(np.argmax(g[start + 1:e + 1] == suffix[k + 1]))
                best_gain, best = float(gains[k]), (start, end)
        return self._run_hypothesis(*best)


class GridLabelings(InducedLabelings):
    """Labelings of the L-consistent members of a finite class, by member index."""

    def __init__(self, C: HypothesisClass, table: PointTable):
        super().__init__(C, table)
        if table.size:
            predictions = C.prediction_matrix(table.points).astype(float)
        else:
            predictions = np.zeros((len(C), 0))
        positive = (predictions > 0).astype(float)
        violations = positive @ table.l_neg + (1.0 - positive) @ table.l_pos
        self.members = np.flatnonzero(violations == 0)
        self.predictions = predictions[self.members]

    @property
    def size(self) -> int:
        return int(self.members.size)

    def mistakes(self) -> np.ndarray:
        positive = (self.predictions > 0).astype(float)
        return positive @ self.table.s_neg + (1.0 - positive) @ self.table.s_pos

    def rademacher_sums(self) -> np.ndarray:
        return self.predictions @ self.table.xi

    def max_disagreement(self, select: np.ndarray) -> Tuple[float, bool]:
        rows = np.unique(self.predictions[np.asarray(select, dtype=bool)], axis=0)
        if rows.shape[0] <= 1:
            return 0.0, True
        w = self.table.s_weight
        total = float(w.sum())
        best = 0.0
        for start in range(0, rows.shape[0], _CHUNK):
            agreement = (rows[start:start + _CHUNK] * w) @ rows.T
            best = max(best, 0.5 * (total - float(agreement.min())))
        return best, True

    def hypothesis(self, k: int) -> Hypothesis:
        return self.C.members[int(self.members[k])]


def induced_labelings(C: HypothesisClass, table: PointTable,
                      grid_size: int = DEFAULT_GRID_SIZE) -> InducedLabelings:
    """Labeling set of C on the table's points."""
    if C.kind is ClassKind.THRESHOLD:
        return ThresholdLabelings(C, table)
    if C.kind is ClassKind.INTERVAL:
        return IntervalLabelings(C, table)
    if C.kind is ClassKind.FINITE:
        return GridLabelings(C, table)
    if C.kind is ClassKind.HALFSPACE:
        logger.debug(f"Enumerating {C.name} labelings through a {grid_size}-member grid")
        return GridLabelings(C.to_grid(grid_size), table)
    raise UnsupportedError(f"induced labelings are not available for {C.name}")
