"""Property checks of the disagreement-coefficient lemmas on fixed fixtures.

Each inequality passes when it holds up to `sigmas` combined standard errors
of the estimates involved (plus a float tolerance in exact mode).
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, Iterable, List, Optional

from ..core.exceptions import ValidationError
from ..core.models import LemmaCheck, ThetaEstimate
from ..hypothesis_spaces import (
    DEFAULT_GRID_SIZE,
    Hypothesis,
    HypothesisClass,
    Marginal,
    PiecewiseUniform,
    uniform,
)
from .theta import dyadic_grid, theta_estimate

logger = logging.getLogger(__name__)

LEMMA_LEVELS = 12
FLOAT_TOLERANCE = 1e-9


class _Estimator:
    """theta_estimate with the shared grid, pool size and seed of one check run."""

    def __init__(self, samples: Optional[int], seed: int, grid_size: int):
        self.samples = samples
        self.seed = seed
        self.grid_size = grid_size
        self.r_grid = dyadic_grid(0.0, LEMMA_LEVELS)

    def __call__(self, C: HypothesisClass, h: Hypothesis, marginal: Marginal) -> ThetaEstimate:
        return theta_estimate(C, h, marginal, r0=0.0, r_grid=self.r_grid, mc_budget=self.samples,
                              seed=self.seed, grid_size=self.grid_size)


def _check(lemma: str, fixture: str, lhs: float, rhs: float, errors: Iterable[float],
           sigmas: float, detail: str = "") -> LemmaCheck:
    slack = sigmas * math.sqrt(sum(e * e for e in errors)) + FLOAT_TOLERANCE
    passed = lhs <= rhs + slack
    if not passed:
        logger.warning(f"{lemma} fails on {fixture}: {lhs:.4f} > {rhs:.4f} + {slack:.2g}")
    return LemmaCheck(lemma, fixture, passed, lhs, rhs, slack, detail)


def close_marginals(estimate: _Estimator, sigmas: float) -> List[LemmaCheck]:
    """lambda = 1 gives equality; lambda = 1/2 gives lambda^2 theta <= theta' <= theta / lambda^2."""
    C = HypothesisClass.intervals()
    h = Hypothesis.interval(0.3, 0.7)
    base = estimate(C, h, uniform())
    same = estimate(C, h, uniform())
    checks = [
        LemmaCheck("close-marginals", "lambda=1", abs(same.value - base.value) <= FLOAT_TOLERANCE,
                   same.value, base.value, 0.0, "identical marginals"),
    ]

    lam = 0.5
    tilted = PiecewiseUniform.from_densities([0.0, 0.5, 1.0], [0.5, 1.5])
    close = estimate(C, h, tilted)
    errors = (base.stderr, close.stderr)
    checks.append(_check("close-marginals", "lambda=1/2 lower", lam ** 2 * base.value,
                         close.value, errors, sigmas))
    checks.append(_check("close-marginals", "lambda=1/2 upper", close.value,
                         base.value / lam ** 2, errors, sigmas))
    return checks


def finite_mixture(estimate: _Estimator, sigmas: float) -> List[LemmaCheck]:
    """theta under a mixture is at most the sum over its components."""
    C = HypothesisClass.thresholds()
    h = Hypothesis.threshold(0.5)
    mixed = estimate(C, h, PiecewiseUniform.mixture([(0.5, 0.0, 0.5), (0.5, 0.5, 1.0)]))
    first = estimate(C, h, PiecewiseUniform.mixture([(1.0, 0.0, 0.5)]))
    second = estimate(C, h, PiecewiseUniform.mixture([(1.0, 0.5, 1.0)]))
    return [_check("finite-mixture", "0.5 U[0,0.5] + 0.5 U[0.5,1]", mixed.value,
                   first.value + second.value, (mixed.stderr, first.stderr, second.stderr),
                   sigmas, f"components {first.value:.4f}, {second.value:.4f}")]


def class_union(estimate: _Estimator, sigmas: float) -> List[LemmaCheck]:
    """Unions: max <= theta <= sum inside both classes, sum + 2 otherwise."""
    thresholds, intervals = HypothesisClass.thresholds(), HypothesisClass.intervals()
    union = HypothesisClass.union(thresholds, intervals)
    checks = []

    h = Hypothesis.threshold(0.5)
    t1, t2, t = (estimate(C, h, uniform()) for C in (thresholds, intervals, union))
    errors = (t1.stderr, t2.stderr, t.stderr)
    checks.append(_check("class-union", "h in both, lower", max(t1.value, t2.value), t.value,
                         errors, sigmas))
    checks.append(_check("class-union", "h in both, upper", t.value, t1.value + t2.value,
                         errors, sigmas))

    h = Hypothesis.interval(0.4, 0.6)
    t1, t2, t = (estimate(C, h, uniform()) for C in (thresholds, intervals, union))
    checks.append(_check("class-union", "h in intervals only", t.value,
                         t1.value + t2.value + 2.0, (t1.stderr, t2.stderr, t.stderr), sigmas))
    return checks


LEMMA_FIXTURES: Dict[str, Callable[[_Estimator, float], List[LemmaCheck]]] = {
    "close-marginals": close_marginals,
    "finite-mixture": finite_mixture,
    "class-union": class_union,
}


def lemma_checks(lemmas: Optional[Iterable[str]] = None, samples: Optional[int] = None,
                 seed: int = 0, sigmas: float = 3.0,
                 grid_size: int = DEFAULT_GRID_SIZE) -> List[LemmaCheck]:
    """Run the fixture suite; exact masses unless `samples` selects Monte Carlo."""
    names = list(lemmas) if lemmas is not None else list(LEMMA_FIXTURES)
    unknown = [n for n in names if n not in LEMMA_FIXTURES]
    if unknown:
        raise ValidationError(f"unknown lemma fixtures: {unknown}")

    estimate = _Estimator(samples, seed, grid_size)
    checks: List[LemmaCheck] = []
    for name in names:
        checks.extend(LEMMA_FIXTURES[name](estimate, sigmas))
    logger.info(f"Lemma checks: {sum(c.passed for c in checks)}/{len(checks)} passed")
    return checks
