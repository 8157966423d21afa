"""Core module for Active Rates."""

from __future__ import annotations

from .models import (
    EstimationMode,
    IndexedLabel,
    MassEstimate,
    TrialRecord,
    LearningCurve,
    RateFit,
    ThetaEstimate,
    LemmaCheck,
)

from .exceptions import (
    ActiveRatesError,
    ConfigurationError,
    ValidationError,
    DimensionMismatchError,
    EmptyVersionSpaceError,
    RegionError,
    StreamIndexError,
    BudgetExhaustedError,
    UnsupportedError,
    RateFitError,
    ReportError,
    ReplayError,
)

from .config import (
    ExperimentConfig,
    get_config,
    set_config,
    load_config,
)

__all__ = [
    # Models
    "EstimationMode",
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
    "DimensionMismatchError",
    "EmptyVersionSpaceError",
    "RegionError",
    "StreamIndexError",
    "BudgetExhaustedError",
    "UnsupportedError",
    "RateFitError",
    "ReportError",
    "ReplayError",

    # Config
    "ExperimentConfig",
    "get_config",
    "set_config",
    "load_config",
]
