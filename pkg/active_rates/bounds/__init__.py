"""Confidence bounds: VC deviations, shatter thresholds and localized Rademacher bounds."""

from __future__ import annotations

from .vc import (
    INFINITY,
    vc_deviation,
    ub,
    lb,
    confidence_interval,
    beta,
    shatter_threshold,
    dhm_threshold_shatter,
    uniform_deviation_violated,
)

from .rademacher import (
    RademacherDraw,
    LocalizedLabelings,
    rademacher_process,
    hat_phi,
    hat_D,
    hat_C_set,
)

from .fixed_point import (
    BoundConfig,
    BoundScan,
    HatBound,
    s_m,
    prefix_sizes,
    hat_U,
    hat_bound,
    hat_bound_scan,
    hat_bound_lower,
)

from .distribution import (
    DistributionBound,
    tilde_phi,
    tilde_U,
    tilde_bound,
    tilde_m,
    r_C,
)

__all__ = [
    # VC bounds
    "INFINITY",
    "vc_deviation",
    "ub",
    "lb",
    "confidence_interval",
    "beta",
    "shatter_threshold",
    "dhm_threshold_shatter",
    "uniform_deviation_violated",

    # Rademacher process
    "RademacherDraw",
    "LocalizedLabelings",
    "rademacher_process",
    "hat_phi",
    "hat_D",
    "hat_C_set",

    # Empirical fixed point
    "BoundConfig",
    "BoundScan",
    "HatBound",
    "s_m",
    "prefix_sizes",
    "hat_U",
    "hat_bound",
    "hat_bound_scan",
    "hat_bound_lower",

    # Distribution-dependent diagnostics
    "DistributionBound",
    "tilde_phi",
    "tilde_U",
    "tilde_bound",
    "tilde_m",
    "r_C",
]
