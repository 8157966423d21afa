"""Hypothesis classes, version spaces, disagreement regions and balls."""

from __future__ import annotations

from .marginals import (
    Marginal,
    PiecewiseUniform,
    UniformSphere,
    uniform,
    marginal_from_spec,
)

from .hypotheses import (
    DEFAULT_GRID_SIZE,
    TIE_BREAK_STEP,
    ClassKind,
    Hypothesis,
    HypothesisClass,
    empirical_error,
    disagreement_mass,
    grid_above,
    stream_points,
)

from .regions import (
    Region,
    IntervalRegion,
    BandRegion,
    PredicateRegion,
    MonteCarloPool,
    band_measure,
    difference_region,
    region_mass,
)

from .version_space import (
    VersionSpace,
    ZInterval,
    ThresholdVersionSpace,
    IntervalVersionSpace,
    IntervalBall,
    HalfspaceBall,
    GridVersionSpace,
    UnionVersionSpace,
    full_version_space,
    ball,
    eps_minimal_diameter,
    max_pairwise_disagreement,
)

from .labelings import (
    PointTable,
    InducedLabelings,
    ThresholdLabelings,
    IntervalLabelings,
    GridLabelings,
    induced_labelings,
)

__all__ = [
    # Marginals
    "Marginal",
    "PiecewiseUniform",
    "UniformSphere",
    "uniform",
    "marginal_from_spec",

    # Hypotheses
    "DEFAULT_GRID_SIZE",
    "TIE_BREAK_STEP",
    "ClassKind",
    "Hypothesis",
    "HypothesisClass",
    "empirical_error",
    "disagreement_mass",
    "grid_above",
    "stream_points",

    # Regions
    "Region",
    "IntervalRegion",
    "BandRegion",
    "PredicateRegion",
    "MonteCarloPool",
    "band_measure",
    "difference_region",
    "region_mass",

    # Version spaces
    "VersionSpace",
    "ZInterval",
    "ThresholdVersionSpace",
    "IntervalVersionSpace",
    "IntervalBall",
    "HalfspaceBall",
    "GridVersionSpace",
    "UnionVersionSpace",
    "full_version_space",
    "ball",
    "eps_minimal_diameter",
    "max_pairwise_disagreement",

    # Labelings
    "PointTable",
    "InducedLabelings",
    "ThresholdLabelings",
    "IntervalLabelings",
    "GridLabelings",
    "induced_labelings",
]
