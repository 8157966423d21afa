"""Experiment harness: batch runs, rate fits, trace replay and the acceptance suite."""

from __future__ import annotations

from .runner import (
    ExperimentResult,
    learner_label,
    create_learner,
    run_trial,
    run_experiment,
)

from .fitting import (
    RATE_MODELS,
    NUMERICAL_FLOOR,
    BOOTSTRAP_RESAMPLES,
    PredictedRate,
    fit_points,
    fit_rate,
    fit_curves,
    predicted_rate,
    matches_prediction,
)

from .replay import ReplayOutcome, learner_from_header, stream_from_header, replay

from .acceptance import (
    SCALES,
    ACCEPTANCE_SUITE,
    Criterion,
    CriterionOutcome,
    hand_cal_trace,
    run_acceptance,
)

__all__ = [
    # Runner
    "ExperimentResult",
    "learner_label",
    "create_learner",
    "run_trial",
    "run_experiment",

    # Rate fits
    "RATE_MODELS",
    "NUMERICAL_FLOOR",
    "BOOTSTRAP_RESAMPLES",
    "PredictedRate",
    "fit_points",
    "fit_rate",
    "fit_curves",
    "predicted_rate",
    "matches_prediction",

    # Replay
    "ReplayOutcome",
    "learner_from_header",
    "stream_from_header",
    "replay",

    # Acceptance suite
    "SCALES",
    "ACCEPTANCE_SUITE",
    "Criterion",
    "CriterionOutcome",
    "hand_cal_trace",
    "run_acceptance",
]
