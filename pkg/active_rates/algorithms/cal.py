"""CAL: query exactly the points in the disagreement region of the version space."""

from __future__ import annotations

import logging
from typing import Optional

from ..hypothesis_spaces import full_version_space
from ..noise_problems import LabeledStream
from .base import BaseLearner, LearnerResult, next_in_region

logger = logging.getLogger(__name__)


class CALLearner(BaseLearner):
    """Realizable-case disagreement-based learner."""

    kind = "cal"

    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        n = stream.budget if n is None else n
        trace = self.new_trace(stream, n)
        V = full_version_space(self.working_class)
        m, t = 0, 0
        stop_reason = "budget"

        while t < n:
            region = V.disagreement_region()
            if region.is_empty:
                stop_reason = "agreement"
                break
            m_next, m = next_in_region(stream, region, m, self.unlabeled_cap)
            if m_next is None:
                stop_reason = "unlabeled-cap" if stream.length is None else "stream-end"
                if stream.length is None:
                    logger.warning(f"CAL found no disagreement point within {self.unlabeled_cap} points")
                break

            y = stream.query_label(m_next)
            t += 1
            V = V.restrict(stream.point(m_next), y)
            trace.record(t, "query", m_next, y, **V.summary())
            logger.debug(f"CAL queried X_{m_next}, label {y:+d}")

            if V.is_empty:
                trace.finish(None, stream.labels_used, stream.unlabeled_used, "empty version space",
                             stop=stop_reason)
                return LearnerResult(None, trace, stream.labels_used, stream.unlabeled_used,
                                     failure="empty version space")

        h = V.representative()
        trace.finish(h.to_dict(), stream.labels_used, stream.unlabeled_used, stop=stop_reason)
        return LearnerResult(h, trace, stream.labels_used, stream.unlabeled_used)


def cal(C, stream: LabeledStream, n: Optional[int] = None,
        unlabeled_cap: int = 1_000_000) -> LearnerResult:
    """Functional form of `CALLearner.run`."""
    return CALLearner(C, unlabeled_cap=unlabeled_cap).run(stream, n)
