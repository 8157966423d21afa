"""Disagreement coefficient: closed forms and the sup over a radius grid."""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import UnsupportedError, ValidationError
from ..core.models import EstimationMode, ThetaEstimate
from ..hypothesis_spaces import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    Hypothesis,
    HypothesisClass,
    Marginal,
    MonteCarloPool,
    PiecewiseUniform,
    UniformSphere,
    ball,
    region_mass,
)

logger = logging.getLogger(__name__)

DEFAULT_R0 = 1e-6
DYADIC_LEVELS = 20
MIN_MC_BUDGET = 10_000
# Offset placing the critical radius strictly above P(h = +1).
CRITICAL_OFFSET = 1e-12


def _is_uniform(marginal: Optional[Marginal]) -> bool:
    return marginal is None or (isinstance(marginal, PiecewiseUniform)
                                and np.allclose(marginal.densities, 1.0))


def theta_analytic(class_kind: Union[ClassKind, str], h: Optional[Hypothesis] = None,
                   marginal: Optional[Marginal] = None) -> Union[float, Tuple[float, float]]:
    """Known disagreement coefficients; the sphere case is a bracket (low, high)."""
    kind = ClassKind(class_kind)

    if kind is ClassKind.THRESHOLD and _is_uniform(marginal):
        if h is not None and not 0.0 < h.params[0] < 1.0:
            raise UnsupportedError("the threshold formula needs z strictly inside (0, 1)")
        return 2.0

    if kind is ClassKind.INTERVAL and _is_uniform(marginal) and h is not None:
        a, b = h.interval_form()
        return max(1.0 / (b - a), 4.0)

    if kind is ClassKind.HALFSPACE and isinstance(marginal, UniformSphere):
        root = math.sqrt(marginal.dim)
        return (math.pi / 4.0 * root, math.pi * root)

    raise UnsupportedError(f"no closed-form disagreement coefficient for {kind.value} "
                           f"under {marginal!r}")


def dyadic_grid(r0: float = DEFAULT_R0, levels: int = DYADIC_LEVELS) -> Tuple[float, ...]:
    """2^-1, ..., 2^-levels restricted to (r0, 1]."""
    return tuple(2.0 ** -k for k in range(1, levels + 1) if 2.0 ** -k > r0)


def critical_radius(C: HypothesisClass, h: Hypothesis, marginal: Marginal) -> Optional[float]:
    """Radius just above P(h = +1), where an interval ball starts covering [0, 1]."""
    if C.base_kind is not ClassKind.INTERVAL or not h.is_one_dimensional \
            or not isinstance(marginal, PiecewiseUniform):
        return None
    a, b = h.interval_form()
    r = float(marginal.interval_mass(a, b)) + CRITICAL_OFFSET
    return r if r <= 1.0 else None


def theta_estimate(C: HypothesisClass, h: Hypothesis, marginal: Marginal, r0: float = DEFAULT_R0,
                   r_grid: Optional[Sequence[float]] = None, mc_budget: Optional[int] = None,
                   seed: int = 0, grid_size: int = DEFAULT_GRID_SIZE) -> ThetaEstimate:
    """sup over the radius grid of P(DIS(B(h, r))) / r.

    Masses are exact where the disagreement region has a closed form; with
    `mc_budget` set, every mass is estimated on one seeded pool of that size.
    """
    if r0 < 0:
        raise ValidationError(f"r0 must be nonnegative, got {r0}")
    if mc_budget is not None and mc_budget < MIN_MC_BUDGET:
        raise ValidationError(f"mc_budget must be at least {MIN_MC_BUDGET}, got {mc_budget}")

    radii = set(r for r in (r_grid if r_grid is not None else dyadic_grid(r0)) if r0 < r <= 1.0)
    critical = critical_radius(C, h, marginal)
    if critical is not None and critical > r0:
        radii.add(critical)
    if not radii:
        raise ValidationError(f"radius grid has no point in ({r0}, 1]")
    grid = tuple(sorted(radii, reverse=True))

    mode = EstimationMode.MONTE_CARLO if mc_budget is not None else None
    pool = MonteCarloPool(marginal, mc_budget, seed) if mc_budget is not None else None

    masses, stderrs = [], []
    used = EstimationMode.EXACT
    for r in grid:
        V = ball(C, h, r, marginal, grid_size)
        if V.is_empty:
            masses.append(0.0)
            stderrs.append(0.0)
            continue
        estimate = region_mass(V.disagreement_region(), marginal, mode, seed=seed, pool=pool)
        if estimate.mode is EstimationMode.MONTE_CARLO:
            used = EstimationMode.MONTE_CARLO
        masses.append(estimate.value)
        stderrs.append(estimate.stderr)

    ratios = np.array(masses) / np.array(grid)
    best = int(np.argmax(ratios))
    logger.debug(f"theta of {h.describe()} in {C.name}: {ratios[best]:.4f} at r={grid[best]:g}")
    return ThetaEstimate(
        value=float(ratios[best]),
        r_grid=grid,
        masses=tuple(masses),
        stderrs=tuple(stderrs),
        r0=r0,
        mode=used,
        argmax_r=grid[best],
    )
