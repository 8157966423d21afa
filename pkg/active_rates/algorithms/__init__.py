"""Active learners, the passive baseline and their run traces."""

from __future__ import annotations

from .trace import RunTrace, TraceStep, TRACE_FORMAT

from .base import (
    BaseLearner,
    LearnerResult,
    working_class,
    constrained_erm,
    learn_constrained,
    mistakes_on,
    next_in_region,
)

from .cal import CALLearner, cal
from .a2 import A2Learner, a2
from .dhm import DHMLearner, THRESHOLD_KINDS, dhm
from .model_select import NestedStructure, ModelSelectLearner, class_budgets, model_select
from .passive import PassiveERMLearner, passive_erm

LEARNERS = {
    CALLearner.kind: CALLearner,
    A2Learner.kind: A2Learner,
    DHMLearner.kind: DHMLearner,
    ModelSelectLearner.kind: ModelSelectLearner,
    PassiveERMLearner.kind: PassiveERMLearner,
}

__all__ = [
    # Traces
    "RunTrace",
    "TraceStep",
    "TRACE_FORMAT",

    # Shared pieces
    "BaseLearner",
    "LearnerResult",
    "working_class",
    "constrained_erm",
    "learn_constrained",
    "mistakes_on",
    "next_in_region",

    # Learners
    "CALLearner",
    "A2Learner",
    "DHMLearner",
    "ModelSelectLearner",
    "PassiveERMLearner",
    "NestedStructure",
    "THRESHOLD_KINDS",
    "LEARNERS",
    "class_budgets",

    # Functional forms
    "cal",
    "a2",
    "dhm",
    "model_select",
    "passive_erm",
]
