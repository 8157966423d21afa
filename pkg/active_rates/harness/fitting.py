"""Rate fits of median excess error against the label budget."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..core.exceptions import RateFitError, ValidationError
from ..core.models import LearningCurve, RateFit

logger = logging.getLogger(__name__)

RATE_MODELS = ("power-law", "exponential")
NUMERICAL_FLOOR = 1e-7
BOOTSTRAP_RESAMPLES = 200
MIN_FIT_POINTS = 3


def _design(budgets: np.ndarray, model: str) -> np.ndarray:
    if model == "power-law":
        return np.log(budgets)
    return budgets.astype(float)


def fit_points(budgets: Sequence[float], errors: Sequence[float],
               model: str = "power-law") -> Tuple[float, float, float]:
    """(slope, intercept, R^2) of log error against log n or n."""
    if model not in RATE_MODELS:
        raise ValidationError(f"unknown rate model: {model}")
    x = _design(np.asarray(budgets, dtype=float), model)
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 2 or np.ptp(x) == 0:
        raise RateFitError(f"need at least two distinct budgets, got {x.size}")
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def _bootstrap_slopes(curve: LearningCurve, budgets: List[int], model: str,
                      resamples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    samples = [curve.errors_at(n) for n in budgets]
    slopes = []
    for _ in range(resamples):
        medians = [float(np.median(rng.choice(e, size=e.size, replace=True))) for e in samples]
        if min(medians) <= NUMERICAL_FLOOR:
            continue
        slopes.append(fit_points(budgets, medians, model)[0])
    return np.array(slopes)


def fit_rate(curve: LearningCurve, model: str = "power-law", floor: float = NUMERICAL_FLOOR,
             resamples: int = BOOTSTRAP_RESAMPLES, seed: int = 0) -> RateFit:
    """Least squares on per-budget medians with a percentile bootstrap slope interval.

    Budgets whose median is at or below `floor` are reported in `excluded`
    and left out of the fit.
    """
    if model not in RATE_MODELS:
        raise ValidationError(f"unknown rate model: {model}")

    usable, excluded = [], []
    for n in curve.budgets:
        m = curve.median(n)
        (usable if not math.isnan(m) and m > floor and n > 0 else excluded).append(n)
    if excluded:
        logger.warning(f"{curve.algorithm}: budgets {excluded} at the numerical floor, "
                       f"left out of the {model} fit")
    if len(usable) < MIN_FIT_POINTS:
        raise RateFitError(f"{curve.algorithm}: {len(usable)} budgets above the floor, "
                           f"need {MIN_FIT_POINTS}")

    slope, intercept, r_squared = fit_points(usable, [curve.median(n) for n in usable], model)

    slopes = _bootstrap_slopes(curve, usable, model, resamples, seed)
    if slopes.size:
        lo, hi = np.percentile(slopes, [2.5, 97.5])
        interval = (float(min(lo, slope)), float(max(hi, slope)))
    else:
        interval = (slope, slope)

    logger.debug(f"{curve.algorithm} {model} fit: slope={slope:.4f} R^2={r_squared:.3f} "
                 f"interval=({interval[0]:.4f}, {interval[1]:.4f})")
    return RateFit(
        model=model,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        fit_range=(usable[0], usable[-1]),
        slope_interval=interval,
        n_points=len(usable),
        excluded=tuple(excluded),
    )


@dataclass(frozen=True)
class PredictedRate:
    """Target form of a learning curve; exponent is None for the exponential model."""

    model: str
    exponent: Optional[float] = None

    def describe(self) -> str:
        if self.model == "exponential":
            return "exp(-c n)"
        return f"n^{self.exponent:.3f}"


def _algorithm_kind(label: str) -> str:
    for kind in ("model_select", "passive", "cal", "a2", "dhm"):
        if label.startswith(kind):
            return kind
    return label


def predicted_rate(algorithm: str, kappa: Optional[float],
                   realizable: bool = False) -> Optional[PredictedRate]:
    """Exponent of the known upper bound for an algorithm under Tsybakov exponent kappa.

    Passive ERM: -kappa/(2 kappa - 1). The active learners: -kappa/(2 kappa - 2)
    for kappa > 1 and exponential decay for kappa = 1 or the realizable case.
    """
    kind = _algorithm_kind(algorithm)
    if kind == "passive":
        if realizable:
            return PredictedRate("power-law", -1.0)
        if kappa is None:
            return None
        return PredictedRate("power-law", -kappa / (2.0 * kappa - 1.0))

    if realizable:
        return PredictedRate("exponential")
    if kind == "cal" or kappa is None:
        return None
    if kappa <= 1.0:
        return PredictedRate("exponential")
    return PredictedRate("power-law", -kappa / (2.0 * kappa - 2.0))


def fit_curves(curves: Mapping[str, LearningCurve], realizable: bool = False
               ) -> Dict[str, Optional[RateFit]]:
    """Fit each curve with the model its prediction names; None where too few points remain."""
    fits: Dict[str, Optional[RateFit]] = {}
    for label, curve in curves.items():
        predicted = predicted_rate(label, curve.kappa, realizable)
        model = predicted.model if predicted else "power-law"
        try:
            fits[label] = fit_rate(curve, model)
        except RateFitError as e:
            logger.warning(f"No rate fit for {label}: {e}")
            fits[label] = None
    return fits


def matches_prediction(fit: Optional[RateFit], predicted: Optional[PredictedRate],
                       slope_tolerance: float = 0.15, r_squared: float = 0.85) -> Optional[bool]:
    """Whether a fit agrees with its predicted form; None when either is missing."""
    if fit is None or predicted is None:
        return None
    if predicted.model == "exponential":
        return fit.model == "exponential" and fit.slope < 0 and fit.r_squared >= r_squared
    return abs(fit.slope - predicted.exponent) <= slope_tolerance
