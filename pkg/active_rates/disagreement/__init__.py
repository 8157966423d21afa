"""Disagreement coefficients: closed forms, grid estimates and lemma checks."""

from __future__ import annotations

from .theta import (
    DEFAULT_R0,
    theta_analytic,
    theta_estimate,
    dyadic_grid,
    critical_radius,
)

from .lemmas import LEMMA_FIXTURES, lemma_checks

__all__ = [
    # Coefficients
    "DEFAULT_R0",
    "theta_analytic",
    "theta_estimate",
    "dyadic_grid",
    "critical_radius",

    # Lemma checks
    "LEMMA_FIXTURES",
    "lemma_checks",
]
