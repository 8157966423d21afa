"""Uniform-convergence bounds from the VC dimension and the growth function."""

from __future__ import annotations

import logging
import math
from typing import Any, Iterable, Sequence, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import IndexedLabel
from ..hypothesis_spaces import Hypothesis, HypothesisClass, empirical_error

logger = logging.getLogger(__name__)

INFINITY = math.inf


def vc_deviation(m: int, delta_prime: float, d: int) -> float:
    """G(m, delta') = 1/m + sqrt((ln(4/delta') + d ln(2em/d)) / m); infinite for m < d."""
    if m < 0 or d < 1 or not 0.0 < delta_prime < 1.0:
        raise ValidationError(f"invalid G arguments m={m}, delta'={delta_prime}, d={d}")
    if m < d or m == 0:
        return INFINITY
    return 1.0 / m + math.sqrt((math.log(4.0 / delta_prime) + d * math.log(2.0 * math.e * m / d)) / m)


def ub(h: Hypothesis, Q: Sequence[IndexedLabel], delta_prime: float, stream: Any,
       d: int) -> float:
    """min{er_Q(h) + G(|Q|, delta'), 1}."""
    G = vc_deviation(len(Q), delta_prime, d)
    if math.isinf(G):
        return 1.0
    return min(empirical_error(h, Q, stream) + G, 1.0)


def lb(h: Hypothesis, Q: Sequence[IndexedLabel], delta_prime: float, stream: Any,
       d: int) -> float:
    """max{er_Q(h) - G(|Q|, delta'), 0}."""
    G = vc_deviation(len(Q), delta_prime, d)
    if math.isinf(G):
        return 0.0
    return max(empirical_error(h, Q, stream) - G, 0.0)


def confidence_interval(mistakes: np.ndarray, q_size: int, delta_prime: float,
                        d: int) -> Tuple[np.ndarray, np.ndarray]:
    """(LB, UB) arrays for hypotheses with the given mistake counts on Q."""
    mistakes = np.asarray(mistakes, dtype=float)
    G = vc_deviation(q_size, delta_prime, d)
    if math.isinf(G):
        return np.zeros_like(mistakes), np.ones_like(mistakes)
    er = mistakes / q_size
    return np.maximum(er - G, 0.0), np.minimum(er + G, 1.0)


def beta(m: int, delta: float, C: HypothesisClass) -> float:
    """beta_m = sqrt(4 ln(8 m (m+1) S(C, 2m)^2 / delta) / m)."""
    if m < 1:
        raise ValidationError(f"beta_m needs m >= 1, got {m}")
    log_term = (math.log(8.0 * m * (m + 1)) + 2.0 * C.log_shatter_coefficient(2 * m)
                - math.log(delta))
    return math.sqrt(4.0 * log_term / m)


def shatter_threshold(er_y: float, er_other: float, delta: float, m: int,
                      C: HypothesisClass) -> float:
    """Delta_m = beta^2 + beta (sqrt(er_y) + sqrt(er_other)) for the two labels' learners."""
    b = beta(m, delta, C)
    return b * b + b * (math.sqrt(max(er_y, 0.0)) + math.sqrt(max(er_other, 0.0)))


def dhm_threshold_shatter(L: Iterable[IndexedLabel], Q: Iterable[IndexedLabel],
                          h_y: Hypothesis, h_other: Hypothesis, delta: float, m: int,
                          C: HypothesisClass, stream: Any) -> float:
    """Delta_m evaluated with errors of the two hypotheses on L U Q."""
    LQ = list(L) + list(Q)
    return shatter_threshold(empirical_error(h_y, LQ, stream),
                             empirical_error(h_other, LQ, stream), delta, m, C)


def uniform_deviation_violated(empirical: np.ndarray, true: np.ndarray, m: int,
                               delta_prime: float, d: int) -> bool:
    """Whether some hypothesis has |er_Z(h) - er(h)| > G(m, delta')."""
    G = vc_deviation(m, delta_prime, d)
    deviation = np.abs(np.asarray(empirical, dtype=float) - np.asarray(true, dtype=float))
    return bool(np.any(deviation > G))
