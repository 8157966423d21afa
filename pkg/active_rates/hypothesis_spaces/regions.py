"""Measurable regions of the instance space and their probability mass."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..core.exceptions import DimensionMismatchError, RegionError, ValidationError
from ..core.models import EstimationMode, MassEstimate
from .hypotheses import Hypothesis
from .marginals import Marginal, PiecewiseUniform, UniformSphere

MAX_INTERVAL_PIECES = 16
DEFAULT_MC_SAMPLES = 100_000


class Region(ABC):
    """A measurable subset of the instance space."""

    dim: int = 1

    @abstractmethod
    def contains(self, x: np.ndarray) -> np.ndarray:
        """Boolean membership for each point."""

    @property
    def is_empty(self) -> bool:
        return False

    def exact_mass(self, marginal: Marginal) -> Optional[float]:
        """Closed-form mass, or None when only Monte Carlo applies."""
        return None

    def union(self, other: Region) -> Region:
        if self.dim != other.dim:
            raise DimensionMismatchError("regions live in different spaces")
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        first, second = self, other
        return PredicateRegion(
            lambda x: first.contains(x) | second.contains(x), self.dim, "union"
        )


class IntervalRegion(Region):
    """Finite union of disjoint, sorted half-open intervals [lo, hi) in [0, 1]."""

    dim = 1

    def __init__(self, pieces: Iterable[Tuple[float, float]] = (),
                 max_pieces: Optional[int] = MAX_INTERVAL_PIECES):
        self.max_pieces = max_pieces
        self.pieces = self._normalize(pieces)
        if max_pieces is not None and len(self.pieces) > max_pieces:
            raise RegionError(
                f"region needs {len(self.pieces)} pieces, more than the limit {max_pieces}"
            )
        self._starts = np.array([p[0] for p in self.pieces], dtype=float)
        self._ends = np.array([p[1] for p in self.pieces], dtype=float)

    @staticmethod
    def _normalize(pieces: Iterable[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
        cleaned = sorted(
            (max(float(lo), 0.0), min(float(hi), 1.0)) for lo, hi in pieces
        )
        merged = []
        for lo, hi in cleaned:
            if hi <= lo:
                continue
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return tuple(merged)

    @classmethod
    def full(cls) -> IntervalRegion:
        return cls([(0.0, 1.0)])

    @classmethod
    def empty(cls) -> IntervalRegion:
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim > 1:
            raise DimensionMismatchError(f"points of shape {x.shape} for a 1-D region")
        if not self.pieces:
            return np.zeros(x.shape, dtype=bool)
        k = np.searchsorted(self._starts, x, side="right") - 1
        safe = np.clip(k, 0, None)
        return (k >= 0) & (x < self._ends[safe])

    def exact_mass(self, marginal: Marginal) -> Optional[float]:
        if not isinstance(marginal, PiecewiseUniform):
            return None
        if not self.pieces:
            return 0.0
        return float(np.clip(np.sum(marginal.interval_mass(self._starts, self._ends)), 0.0, 1.0))

    def union(self, other: Region) -> Region:
        if isinstance(other, IntervalRegion):
            cap = None if self.max_pieces is None or other.max_pieces is None \
                else max(self.max_pieces, other.max_pieces)
            return IntervalRegion(self.pieces + other.pieces, cap)
        return super().union(other)

    def subtract(self, lo: float, hi: float) -> IntervalRegion:
        """Remove [lo, hi) from the region."""
        out = []
        for a, b in self.pieces:
            if hi <= a or lo >= b:
                out.append((a, b))
                continue
            if a < lo:
                out.append((a, lo))
            if hi < b:
                out.append((hi, b))
        return IntervalRegion(out, self.max_pieces)

    @property
    def length(self) -> float:
        return float(np.sum(self._ends - self._starts)) if self.pieces else 0.0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalRegion) and self.pieces == other.pieces

    def __repr__(self) -> str:
        body = " U ".join(f"[{lo:.6g}, {hi:.6g})" for lo, hi in self.pieces)
        return f"IntervalRegion({body or 'empty'})"


class BandRegion(Region):
    """Band {x : |w.x| < t} around the hyperplane with unit normal w."""

    def __init__(self, w: Sequence[float], t: float):
        self.w = np.asarray(w, dtype=float)
        self.w = self.w / np.linalg.norm(self.w)
        self.t = float(t)
        self.dim = self.w.size

    @property
    def is_empty(self) -> bool:
        return self.t <= 0.0

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"points of shape {x.shape} for R^{self.dim}")
        return np.abs(x @ self.w) < self.t

    def exact_mass(self, marginal: Marginal) -> Optional[float]:
        if not isinstance(marginal, UniformSphere) or marginal.dim != self.dim:
            return None
        return band_measure(self.t, self.dim)

    def __repr__(self) -> str:
        return f"BandRegion(d={self.dim}, t={self.t:.6g})"


class PredicateRegion(Region):
    """Region given only by a vectorized membership test."""

    def __init__(self, predicate: Callable[[np.ndarray], np.ndarray], dim: int,
                 label: str = "predicate", empty: bool = False):
        self.predicate = predicate
        self.dim = dim
        self.label = label
        self._empty = empty

    @property
    def is_empty(self) -> bool:
        return self._empty

    def contains(self, x: np.ndarray) -> np.ndarray:
        if self._empty:
            x = np.asarray(x)
            return np.zeros(x.shape[:-1] if self.dim > 1 else x.shape, dtype=bool)
        return np.asarray(self.predicate(np.asarray(x, dtype=float)), dtype=bool)

    def __repr__(self) -> str:
        return f"PredicateRegion({self.label}, d={self.dim})"


def band_measure(t: float, d: int) -> float:
    """Surface measure of {x : |x_1| < t} on the unit sphere in R^d.

    x_1^2 is Beta(1/2, (d-1)/2) distributed under the uniform sphere.
    """
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return float(stats.beta.cdf(t * t, 0.5, (d - 1) / 2.0))


def difference_region(h1: Hypothesis, h2: Hypothesis) -> Region:
    """{x : h1(x) != h2(x)}."""
    if h1.is_one_dimensional and h2.is_one_dimensional:
        (a1, b1), (a2, b2) = h1.interval_form(), h2.interval_form()
        if (a1, b1) == (a2, b2):
            return IntervalRegion.empty()
        lo, hi = max(a1, a2), min(b1, b2)
        base = IntervalRegion([(a1, b1), (a2, b2)])
        return base.subtract(lo, hi) if lo < hi else base
    if h1.dim != h2.dim:
        raise DimensionMismatchError("hypotheses live in different spaces")
    return PredicateRegion(
        lambda x: h1.positive_mask(x) != h2.positive_mask(x), h1.dim, "difference",
        empty=h1.params == h2.params,
    )


class MonteCarloPool:
    """A fixed seeded sample of the marginal, reused for every mass estimate."""

    def __init__(self, marginal: Marginal, size: int = DEFAULT_MC_SAMPLES, seed: int = 0):
        if size < 1:
            raise ValidationError("Monte Carlo pool needs at least one point")
        self.marginal = marginal
        self.size = int(size)
        self.seed = seed
        self.points = marginal.sample(np.random.default_rng(seed), self.size)

    def mass(self, region: Region) -> MassEstimate:
        if region.is_empty:
            return MassEstimate(0.0, 0.0, EstimationMode.MONTE_CARLO, self.size)
        p = float(np.mean(region.contains(self.points)))
        return MassEstimate(p, math.sqrt(p * (1.0 - p) / self.size),
                            EstimationMode.MONTE_CARLO, self.size)


def region_mass(region: Region, marginal: Marginal,
                mode: Optional[EstimationMode] = None,
                samples: int = DEFAULT_MC_SAMPLES, seed: int = 0,
                pool: Optional[MonteCarloPool] = None) -> MassEstimate:
    """P(X in region): exact when a closed form exists, else Monte Carlo."""
    if region.dim != marginal.dim:
        raise DimensionMismatchError(
            f"region in dimension {region.dim}, marginal in dimension {marginal.dim}"
        )
    if region.is_empty:
        return MassEstimate(0.0)

    if mode is not EstimationMode.MONTE_CARLO:
        exact = region.exact_mass(marginal)
        if exact is not None:
            return MassEstimate(min(max(exact, 0.0), 1.0))

    if pool is None:
        pool = MonteCarloPool(marginal, samples, seed)
    return pool.mass(region)
