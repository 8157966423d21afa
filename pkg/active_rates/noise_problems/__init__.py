"""Synthetic noise problems and labeled streams."""

from __future__ import annotations

from .problems import (
    TsybakovTag,
    EntropyTag,
    NoiseProblem,
    OneDimensionalProblem,
    ThresholdNoiseProblem,
    IntervalNoiseProblem,
    HalfspaceNoiseProblem,
    make_tsybakov_threshold,
    make_noiseless_threshold,
    problem_from_spec,
)

from .stream import (
    CHUNK_SIZE,
    LabeledStream,
)

__all__ = [
    # Problems
    "TsybakovTag",
    "EntropyTag",
    "NoiseProblem",
    "OneDimensionalProblem",
    "ThresholdNoiseProblem",
    "IntervalNoiseProblem",
    "HalfspaceNoiseProblem",
    "make_tsybakov_threshold",
    "make_noiseless_threshold",
    "problem_from_spec",

    # Streams
    "CHUNK_SIZE",
    "LabeledStream",
]
