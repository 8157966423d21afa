"""DHM-style learner: infer a label when the other one costs too much empirical error.

Every processed index m lands in exactly one of L (label inferred) or Q
(label requested). A point outside DIS(V_L), where V_L is the set of
members consistent with L, has one label every consistent member agrees
on; those points are inferred in bulk and kept as compact index/label
arrays instead of entering the per-point tests.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import IndexedLabel
from ..bounds import (
    INFINITY,
    BoundConfig,
    RademacherDraw,
    hat_bound,
    hat_bound_lower,
    shatter_threshold,
)
from ..hypothesis_spaces import DEFAULT_GRID_SIZE, Hypothesis, HypothesisClass, full_version_space
from ..noise_problems import LabeledStream
from .base import (
    DEFAULT_UNLABELED_CAP,
    BaseLearner,
    LearnerResult,
    constrained_erm,
    learn_constrained,
    next_in_region,
)

logger = logging.getLogger(__name__)

THRESHOLD_KINDS = ("eq2", "eq4")

Candidate = Tuple[Optional[Hypothesis], float]


class DHMLearner(BaseLearner):
    """Agnostic learner that infers labels through constrained ERM comparisons."""

    kind = "dhm"

    def __init__(self, C: HypothesisClass, delta: float = 0.05, threshold_kind: str = "eq4",
                 bound_config: Optional[BoundConfig] = None, grid_size: int = DEFAULT_GRID_SIZE,
                 unlabeled_cap: int = DEFAULT_UNLABELED_CAP):
        super().__init__(C, grid_size, unlabeled_cap)
        if not 0.0 < delta < 0.5:
            raise ValidationError(f"delta must be in (0, 1/2), got {delta}")
        if threshold_kind not in THRESHOLD_KINDS:
            raise ValidationError(f"threshold_kind must be one of {THRESHOLD_KINDS}")
        self.delta = delta
        self.threshold_kind = threshold_kind
        self.bound_config = bound_config or BoundConfig(grid_size=grid_size)

    def parameters(self) -> Dict[str, Any]:
        return {**super().parameters(), "delta": self.delta,
                "threshold_kind": self.threshold_kind, "bounds": self.bound_config.to_dict()}

    def index_cap(self, n: int) -> int:
        """Last stream index the run may process: 2^n, bounded by the unlabeled cap."""
        if n >= 62:
            return self.unlabeled_cap
        return min(2 ** n, self.unlabeled_cap)

    # Step-4 test

    def _threshold(self, y: int, candidates: Dict[int, Candidate], processed: int,
                   context: "_TestContext") -> float:
        if self.threshold_kind == "eq2":
            if processed < 1:
                return INFINITY
            er_y = candidates[y][1] / processed
            er_other = candidates[-y][1] / processed
            return shatter_threshold(er_y, er_other, self.delta, processed, self.C)
        return context.eq4_threshold()

    def _passes(self, y: int, candidates: Dict[int, Candidate], processed: int,
                context: "_TestContext", values: Dict[str, Any]) -> bool:
        h_y, mistakes_y = candidates[y]
        h_other, mistakes_other = candidates[-y]
        if h_other is None:
            return True
        if h_y is None or processed < 1:
            return False
        gap = (mistakes_other - mistakes_y) / processed
        values[f"gap_{y:+d}"] = gap
        if gap <= 0.0:
            return False
        if self.threshold_kind == "eq4" and gap <= context.eq4_lower():
            return False
        threshold = self._threshold(y, candidates, processed, context)
        values[f"threshold_{y:+d}"] = threshold
        return gap > threshold

    def _decide(self, m: int, L: List[IndexedLabel], Q: List[IndexedLabel],
                context: "_TestContext", stream: LabeledStream
                ) -> Tuple[Optional[int], Dict[str, Any]]:
        """Inferred label of X_m, 0 to request it, None when L is unsatisfiable."""
        candidates: Dict[int, Candidate] = {
            y: constrained_erm(self.working_class, L + [IndexedLabel(m, y)], Q, stream,
                               self.grid_size)
            for y in (1, -1)
        }
        if candidates[1][0] is None and candidates[-1][0] is None:
            return None, {}

        processed = m - 1
        values: Dict[str, Any] = {}
        passing = [y for y in (1, -1) if self._passes(y, candidates, processed, context, values)]
        if len(passing) == 2:
            logger.warning(f"Both labels of X_{m} pass the inference test; inferring +1")
        return (passing[0] if passing else 0), values

    # Main loop

    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        n = stream.budget if n is None else n
        trace = self.new_trace(stream, n)
        draw = RademacherDraw(self.bound_config.rademacher_seed)
        cap = self.index_cap(n)

        L: List[IndexedLabel] = []
        Q: List[IndexedLabel] = []
        forced_indices: List[np.ndarray] = []
        forced_labels: List[np.ndarray] = []
        V = full_version_space(self.working_class)
        m = 0
        stop = "budget"
        failure: Optional[str] = None

        while len(Q) < n:
            region = V.disagreement_region()
            if region.is_empty:
                # every later point is inferred and cannot change Learn(L, Q)
                stop = "agreement"
                break

            m_next, last = next_in_region(stream, region, m, cap)
            upto = last if m_next is None else m_next - 1
            if upto > m:
                idx = np.arange(m + 1, upto + 1)
                labels = np.asarray(V.representative().predict(stream.points(idx)), dtype=int)
                forced_indices.append(idx)
                forced_labels.append(labels.reshape(-1))
                trace.record(m + 1, "forced", count=int(idx.size), last=int(upto))
                m = upto
            if m_next is None:
                stop = "unlabeled-cap" if stream.length is None or cap < stream.length else "stream-end"
                if stop == "unlabeled-cap" and cap < 2 ** min(n, 62):
                    logger.warning(f"DHM stopped at the unlabeled cap of {cap} points")
                break

            m = m_next
            context = _TestContext(self, L, Q, forced_indices, stream, draw)
            y, values = self._decide(m, L, Q, context, stream)
            if y is None:
                failure = "unsatisfiable L"
                break
            if y:
                L.append(IndexedLabel(m, y))
                V = V.restrict(stream.point(m), y)
                trace.record(m, "infer", m, y, **values)
                logger.debug(f"DHM inferred Y_{m} = {y:+d}")
            else:
                y = stream.query_label(m)
                Q.append(IndexedLabel(m, y))
                trace.record(m, "query", m, y, **values)

        forced_idx = np.concatenate(forced_indices) if forced_indices else np.zeros(0, dtype=int)
        forced_lab = np.concatenate(forced_labels) if forced_labels else np.zeros(0, dtype=int)
        h = None if failure else learn_constrained(self.working_class, L, Q, stream, self.grid_size)
        if h is None and failure is None:
            failure = "unsatisfiable L"

        processed = len(L) + len(Q) + int(forced_idx.size)
        trace.finish(None if h is None else h.to_dict(), stream.labels_used, stream.unlabeled_used,
                     failure, stop=stop, processed=processed, inferred=len(L) + int(forced_idx.size),
                     queried=len(Q))
        return LearnerResult(h, trace, stream.labels_used, stream.unlabeled_used, failure,
                             L=L, Q=Q, forced_indices=forced_idx, forced_labels=forced_lab,
                             extras={"stop": stop, "processed": processed, "index_cap": cap})


class _TestContext:
    """Lazily evaluated eq4 threshold 3 * hat_bound(L U Q, delta; L) at one index."""

    def __init__(self, learner: DHMLearner, L: List[IndexedLabel], Q: List[IndexedLabel],
                 forced: List[np.ndarray], stream: LabeledStream, draw: RademacherDraw):
        self.learner = learner
        self.L = L
        self.Q = Q
        self.forced = forced
        self.stream = stream
        self.draw = draw
        self._value: Optional[float] = None

    @property
    def s_size(self) -> int:
        return len(self.L) + len(self.Q) + sum(int(f.size) for f in self.forced)

    def eq4_lower(self) -> float:
        return 3.0 * hat_bound_lower(self.s_size, self.learner.delta, self.learner.bound_config)

    def eq4_threshold(self) -> float:
        if self._value is None:
            padding = np.concatenate(self.forced) if self.forced else None
            self._value = 3.0 * hat_bound(self.L + self.Q, self.learner.delta, self.L,
                                          self.learner.working_class, self.stream, self.draw,
                                          self.learner.bound_config, padding)
            if math.isinf(self._value):
                logger.debug("eq4 threshold is infinite on an empty sample")
        return self._value


def dhm(C: HypothesisClass, stream: LabeledStream, n: Optional[int] = None, delta: float = 0.05,
        threshold_kind: str = "eq4", **kwargs) -> LearnerResult:
    """Functional form of `DHMLearner.run`; the result carries L, Q and the forced labels."""
    return DHMLearner(C, delta, threshold_kind, **kwargs).run(stream, n)
