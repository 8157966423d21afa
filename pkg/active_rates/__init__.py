"""Active Rates - disagreement-based active learning, confidence bounds and rate experiments."""

from __future__ import annotations

__version__ = "1.0.0"

from .core.models import (
    IndexedLabel,
    MassEstimate,
    TrialRecord,
    LearningCurve,
    RateFit,
    ThetaEstimate,
    LemmaCheck,
)

from .core.exceptions import (
    ActiveRatesError,
    ConfigurationError,
    ValidationError,
    EmptyVersionSpaceError,
    UnsupportedError,
    RateFitError,
    ReplayError,
)

from .core.config import ExperimentConfig, get_config, set_config, load_config

__all__ = [
    # Models
    "IndexedLabel",
    "MassEstimate",
    "TrialRecord",
    "LearningCurve",
    "RateFit",
    "ThetaEstimate",
    "LemmaCheck",

    # Exceptions
    "ActiveRatesError",
    "ConfigurationError",
    "ValidationError",
    "EmptyVersionSpaceError",
    "UnsupportedError",
    "RateFitError",
    "ReplayError",

    # Configuration
    "ExperimentConfig",
    "get_config",
    "set_config",
    "load_config",
]
