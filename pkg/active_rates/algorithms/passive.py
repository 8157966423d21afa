"""Passive baseline: ERM on the first n labeled points."""

from __future__ import annotations

import logging
from typing import Optional

from ..core.exceptions import ValidationError
from ..noise_problems import LabeledStream
from .base import BaseLearner, LearnerResult, constrained_erm

logger = logging.getLogger(__name__)


class PassiveERMLearner(BaseLearner):
    """Requests Y_1, ..., Y_n and returns an empirical risk minimizer."""

    kind = "passive"

    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        n = stream.budget if n is None else n
        if n < 0:
            raise ValidationError(f"label count must be nonnegative, got {n}")
        trace = self.new_trace(stream, n)
        if stream.length is not None and n > stream.length:
            raise ValidationError(f"{n} labels requested from a stream of {stream.length} points")

        Q = [stream.query(i) for i in range(1, n + 1)]
        h, mistakes = constrained_erm(self.working_class, [], Q, stream, self.grid_size)
        trace.record(n, "erm", labels=n, mistakes=mistakes)
        logger.debug(f"Passive ERM on {n} labels: {h.describe()} with {mistakes:g} mistakes")

        trace.finish(h.to_dict(), stream.labels_used, stream.unlabeled_used)
        return LearnerResult(h, trace, stream.labels_used, stream.unlabeled_used, Q=Q)


def passive_erm(C, stream: LabeledStream, n_labels: Optional[int] = None, **kwargs) -> LearnerResult:
    """Functional form of `PassiveERMLearner.run`."""
    return PassiveERMLearner(C, **kwargs).run(stream, n_labels)
