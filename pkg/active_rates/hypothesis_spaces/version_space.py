"""Version spaces, balls and diameters.

Parametric classes keep exact parameter sets; finite classes keep a member
bitmask. Every version space is immutable: restricting by a labeled point
returns a successor.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import EmptyVersionSpaceError, UnsupportedError, ValidationError
from .hypotheses import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    Hypothesis,
    HypothesisClass,
    disagreement_mass,
    grid_above,
    tie_break_gap,
    tie_break_interval,
)
from .marginals import Marginal, PiecewiseUniform, UniformSphere
from .regions import (
    BandRegion,
    IntervalRegion,
    MonteCarloPool,
    PredicateRegion,
    Region,
    difference_region,
)

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 4096
MASS_TOLERANCE = 1e-12
_CHUNK = 512


def max_pairwise_disagreement(a: np.ndarray, b: np.ndarray,
                              brute_limit: int = BRUTE_FORCE_LIMIT) -> Tuple[float, bool]:
    """Max over pairs of the measure of [a_i, b_i) symmetric-difference [a_j, b_j).

    Coordinates are cumulative measures (cdf values or point counts), so the
    measure of a pair is min(|a_i - a_j| + |b_i - b_j|, w_i + w_j). Returns
    the value and whether it is exact; above `brute_limit` members without a
    common point the value is an upper bound.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size <= 1:
        return 0.0, True

    s1, s2 = a + b, a - b
    l1_max = float(max(s1.max() - s1.min(), s2.max() - s2.min()))
    if a.max() <= b.min():
        return l1_max, True

    widths = b - a
    if a.size > brute_limit:
        return float(min(l1_max, 2.0 * widths.max())), False

    best = 0.0
    for start in range(0, a.size, _CHUNK):
        ai, bi, wi = a[start:start + _CHUNK, None], b[start:start + _CHUNK, None], widths[start:start + _CHUNK, None]
        d = np.minimum(np.abs(ai - a) + np.abs(bi - b), wi + widths)
        best = max(best, float(d.max()))
    return best, True


@dataclass(frozen=True)
class ZInterval:
    """A set of threshold parameters with explicit endpoint closure."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    def contains(self, z: float) -> bool:
        above = z > self.lo or (self.lo_closed and z == self.lo)
        below = z < self.hi or (self.hi_closed and z == self.hi)
        return above and below

    def intersect(self, other: ZInterval) -> ZInterval:
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return ZInterval(lo, hi, lo_closed, hi_closed)

    def midpoint(self) -> float:
        return self.lo if self.lo == self.hi else 0.5 * (self.lo + self.hi)

    def smallest(self) -> float:
        """Least member; an open lower end moves up to the next tie-break grid point."""
        if self.lo_closed:
            return self.lo
        z = grid_above(self.lo)
        return z if self.contains(z) else self.midpoint()


class VersionSpace(ABC):
    """A subset V of a hypothesis class."""

    def __init__(self, base: HypothesisClass):
        self.base = base

    @property
    @abstractmethod
    def is_empty(self) -> bool:
        """Whether no hypothesis survives."""

    @abstractmethod
    def restrict(self, x: Any, y: int) -> VersionSpace:
        """Successor {h in V : h(x) = y}."""

    @abstractmethod
    def _region(self) -> Region:
        ...

    @abstractmethod
    def _diameter(self, marginal: Marginal) -> float:
        ...

    @abstractmethod
    def _representative(self) -> Hypothesis:
        ...

    @abstractmethod
    def contains(self, h: Hypothesis) -> bool:
        """Membership of a hypothesis."""

    def _require_nonempty(self) -> None:
        if self.is_empty:
            raise EmptyVersionSpaceError(f"version space of {self.base.name} is empty")

    def disagreement_region(self) -> Region:
        """DIS(V): points on which two members of V disagree."""
        self._require_nonempty()
        return self._region()

    def diameter(self, marginal: Marginal) -> float:
        """sup over pairs in V of P(h1(X) != h2(X))."""
        self._require_nonempty()
        return float(min(max(self._diameter(marginal), 0.0), 1.0))

    def representative(self) -> Hypothesis:
        """Tie-break member: smallest parameter or lowest grid index."""
        self._require_nonempty()
        return self._representative()

    def to_grid(self, size: int = DEFAULT_GRID_SIZE) -> GridVersionSpace:
        """Members of the gridded base class that belong to V."""
        grid = self.base.to_grid(size)
        mask = np.array([self.contains(h) for h in grid.members], dtype=bool)
        return GridVersionSpace(grid, mask)

    def summary(self) -> Dict[str, Any]:
        return {"kind": type(self).__name__, "empty": self.is_empty}


class ThresholdVersionSpace(VersionSpace):
    """Threshold parameters as a sorted union of z-intervals."""

    def __init__(self, base: HypothesisClass, pieces: Sequence[ZInterval] = (ZInterval(0.0, 1.0),)):
        super().__init__(base)
        self.pieces = tuple(sorted((p for p in pieces if not p.is_empty), key=lambda p: (p.lo, p.hi)))

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def z_min(self) -> float:
        self._require_nonempty()
        return self.pieces[0].lo

    @property
    def z_max(self) -> float:
        self._require_nonempty()
        return max(p.hi for p in self.pieces)

    def intersect(self, window: ZInterval) -> ThresholdVersionSpace:
        return ThresholdVersionSpace(self.base, [p.intersect(window) for p in self.pieces])

    def restrict(self, x: Any, y: int) -> ThresholdVersionSpace:
        x = float(x)
        # h_z(x) = +1 iff z <= x
        window = ZInterval(0.0, x, True, True) if y == 1 else ZInterval(x, 1.0, False, True)
        return self.intersect(window)

    def _region(self) -> Region:
        return IntervalRegion([(self.z_min, self.z_max)])

    def _diameter(self, marginal: Marginal) -> float:
        if not isinstance(marginal, PiecewiseUniform):
            raise UnsupportedError("threshold diameters need a marginal on [0, 1]")
        return float(marginal.cdf(self.z_max) - marginal.cdf(self.z_min))

    def _representative(self) -> Hypothesis:
        return Hypothesis.threshold(self.pieces[0].smallest())

    def contains(self, h: Hypothesis) -> bool:
        return h.kind is ClassKind.THRESHOLD and any(p.contains(h.params[0]) for p in self.pieces)

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": "threshold",
            "empty": self.is_empty,
            "pieces": [[p.lo, p.hi] for p in self.pieces],
        }


class IntervalVersionSpace(VersionSpace):
    """Intervals consistent with labeled points.

    With positives the feasible set is a in (n_left, p_min], b in [p_max, n_right);
    without positives any interval avoiding every negative point is feasible.
    """

    def __init__(self, base: HypothesisClass, positives: Sequence[float] = (),
                 negatives: Sequence[float] = ()):
        super().__init__(base)
        self.positives = tuple(sorted(float(v) for v in positives))
        self.negatives = tuple(sorted(float(v) for v in negatives))

    @property
    def _bounds(self) -> Tuple[float, float, float, float, bool, bool]:
        p_min, p_max = self.positives[0], self.positives[-1]
        left = [v for v in self.negatives if v < p_min]
        right = [v for v in self.negatives if v > p_max]
        n_left = left[-1] if left else 0.0
        n_right = right[0] if right else 1.0
        return n_left, p_min, p_max, n_right, bool(left), bool(right)

    @property
    def is_empty(self) -> bool:
        if not self.positives:
            return False
        p_min, p_max = self.positives[0], self.positives[-1]
        return any(p_min <= v <= p_max for v in self.negatives)

    def restrict(self, x: Any, y: int) -> IntervalVersionSpace:
        if y == 1:
            return IntervalVersionSpace(self.base, self.positives + (float(x),), self.negatives)
        return IntervalVersionSpace(self.base, self.positives, self.negatives + (float(x),))

    def _gaps(self) -> List[Tuple[float, float]]:
        edges = [0.0] + list(self.negatives) + [1.0]
        return [(lo, hi) for lo, hi in zip(edges, edges[1:]) if hi > lo]

    def _region(self) -> Region:
        if not self.positives:
            return IntervalRegion.full()
        n_left, p_min, p_max, n_right, _, _ = self._bounds
        return IntervalRegion([(n_left, p_min), (p_max, n_right)])

    def _diameter(self, marginal: Marginal) -> float:
        if not isinstance(marginal, PiecewiseUniform):
            raise UnsupportedError("interval diameters need a marginal on [0, 1]")
        if self.positives:
            return float(self._region().exact_mass(marginal))
        masses = sorted((float(marginal.interval_mass(lo, hi)) for lo, hi in self._gaps()),
                        reverse=True)
        return sum(masses[:2])

    def _representative(self) -> Hypothesis:
        if self.positives:
            n_left, p_min, p_max, n_right, has_left, has_right = self._bounds
            return tie_break_interval(n_left, has_left, p_min, p_max, n_right, has_right)
        lo, hi = self._gaps()[0]
        return tie_break_gap(lo, lo in self.negatives, hi, hi in self.negatives)

    def contains(self, h: Hypothesis) -> bool:
        if not h.is_one_dimensional:
            return False
        a, b = h.interval_form()
        return (all(a <= v <= b for v in self.positives)
                and not any(a <= v <= b for v in self.negatives))

    def summary(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": "interval", "empty": self.is_empty}
        if self.positives and not self.is_empty:
            n_left, p_min, p_max, n_right, _, _ = self._bounds
            data.update({"a_range": [n_left, p_min], "b_range": [p_max, n_right]})
        return data


class IntervalBall(VersionSpace):
    """B(h_[a,b], r) in the interval class under a marginal on [0, 1]."""

    def __init__(self, base: HypothesisClass, center: Hypothesis, r: float,
                 marginal: PiecewiseUniform):
        super().__init__(base)
        self.center = center
        self.r = float(r)
        self.marginal = marginal
        a, b = center.interval_form()
        self.fa, self.fb = float(marginal.cdf(a)), float(marginal.cdf(b))
        self.width = self.fb - self.fa

    @property
    def is_empty(self) -> bool:
        return False

    def restrict(self, x: Any, y: int) -> VersionSpace:
        logger.debug("Restricting an interval ball through its grid form")
        return self.to_grid().restrict(x, y)

    def _region(self) -> Region:
        if self.r > self.width:
            return IntervalRegion.full()
        inv = self.marginal.ppf_left
        pieces = [
            (float(inv(self.fa - self.r)), float(inv(self.fa + self.r))),
            (float(inv(self.fb - self.r)), float(inv(self.fb + self.r))),
        ]
        return IntervalRegion(pieces)

    def _diameter(self, marginal: Marginal) -> float:
        if self.r < self.width:
            return 2.0 * self.r
        return self.to_grid()._diameter(marginal)

    def _representative(self) -> Hypothesis:
        return self.center

    def contains(self, h: Hypothesis) -> bool:
        if not h.is_one_dimensional:
            return False
        return disagreement_mass(h, self.center, self.marginal) <= self.r + MASS_TOLERANCE

    def summary(self) -> Dict[str, Any]:
        return {"kind": "interval-ball", "center": list(self.center.params), "r": self.r}


class HalfspaceBall(VersionSpace):
    """B(h_w, r) among homogeneous halfspaces under the uniform sphere.

    P(h_w != h_v) is the angle between w and v over pi, so the ball is a cap of
    normals and its disagreement region a band around the hyperplane.
    """

    def __init__(self, base: HypothesisClass, center: Hypothesis, r: float):
        super().__init__(base)
        self.center = center
        self.r = float(r)
        self.w = np.asarray(center.params, dtype=float)

    @property
    def is_empty(self) -> bool:
        return False

    def restrict(self, x: Any, y: int) -> VersionSpace:
        logger.debug("Restricting a halfspace ball through its grid form")
        return self.to_grid().restrict(x, y)

    def _region(self) -> Region:
        if self.r >= 0.5:
            return BandRegion(self.w, 2.0)
        return BandRegion(self.w, math.sin(math.pi * self.r))

    def _diameter(self, marginal: Marginal) -> float:
        if isinstance(marginal, UniformSphere):
            return min(2.0 * self.r, 1.0)
        return self.to_grid()._diameter(marginal)

    def _representative(self) -> Hypothesis:
        return self.center

    def contains(self, h: Hypothesis) -> bool:
        if h.kind is not ClassKind.HALFSPACE or h.dim != self.w.size:
            return False
        cos = float(np.clip(np.dot(h.params, self.w), -1.0, 1.0))
        return math.acos(cos) / math.pi <= self.r + MASS_TOLERANCE

    def summary(self) -> Dict[str, Any]:
        return {"kind": "halfspace-ball", "r": self.r}


class GridVersionSpace(VersionSpace):
    """Surviving members of a finite class as a boolean mask."""

    def __init__(self, base: HypothesisClass, mask: Optional[np.ndarray] = None):
        if not base.is_finite:
            raise ValidationError("grid version spaces need a finite class")
        super().__init__(base)
        self.mask = np.ones(len(base), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if self.mask.shape != (len(base),):
            raise ValidationError("mask length differs from the class size")
        self.mask.setflags(write=False)
        self._halfspace = base.member_kind is ClassKind.HALFSPACE

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def survivors(self) -> List[Hypothesis]:
        return [self.base.members[i] for i in self.indices]

    def _predictions(self, x: Any) -> np.ndarray:
        point = np.asarray(x, dtype=float).reshape(1, -1) if self._halfspace \
            else np.atleast_1d(np.asarray(x, dtype=float))
        return self.base.prediction_matrix(point)[:, 0]

    def restrict(self, x: Any, y: int) -> GridVersionSpace:
        return GridVersionSpace(self.base, self.mask & (self._predictions(x) == y))

    def filter(self, keep: np.ndarray) -> GridVersionSpace:
        return GridVersionSpace(self.base, self.mask & np.asarray(keep, dtype=bool))

    def _region(self) -> Region:
        idx = self.indices
        if idx.size == 1:
            if self._halfspace:
                return BandRegion(self.base.members[idx[0]].params, 0.0)
            return IntervalRegion.empty()

        if self._halfspace:
            normals = self.base.normals()[idx]

            def split(x: np.ndarray) -> np.ndarray:
                x = np.atleast_2d(x)
                out = np.zeros(x.shape[0], dtype=bool)
                for start in range(0, x.shape[0], 4096):
                    signs = normals @ x[start:start + 4096].T >= 0.0
                    out[start:start + 4096] = signs.any(axis=0) & ~signs.all(axis=0)
                return out

            return PredicateRegion(split, self.base.dim, f"grid-dis({idx.size})")

        lo, hi = self.base.interval_bounds()
        lo, hi = lo[idx], hi[idx]
        if self.base.member_kind is ClassKind.THRESHOLD:
            return IntervalRegion([(lo.min(), lo.max())])
        covered = IntervalRegion(zip(lo, hi), max_pieces=None)
        common_lo, common_hi = lo.max(), hi.min()
        return covered.subtract(common_lo, common_hi) if common_lo < common_hi else covered

    def _diameter(self, marginal: Marginal) -> float:
        idx = self.indices
        if idx.size <= 1:
            return 0.0

        if self._halfspace:
            normals = self.base.normals()[idx]
            if isinstance(marginal, UniformSphere):
                best = 0.0
                for start in range(0, idx.size, _CHUNK):
                    cos = np.clip(normals[start:start + _CHUNK] @ normals.T, -1.0, 1.0)
                    best = max(best, float(np.arccos(cos.min())) / math.pi)
                return best
            points = MonteCarloPool(marginal, 4096).points
            signs = (normals @ points.T >= 0.0).astype(np.float32)
            best = 0.0
            for start in range(0, idx.size, _CHUNK):
                block = signs[start:start + _CHUNK]
                # Hamming distance between sign rows via inner products
                agree = block @ signs.T + (1 - block) @ (1 - signs).T
                best = max(best, 1.0 - float(agree.min()) / points.shape[0])
            return best

        if not isinstance(marginal, PiecewiseUniform):
            raise UnsupportedError("1-D grid diameters need a marginal on [0, 1]")
        lo, hi = self.base.interval_bounds()
        fa, fb = marginal.cdf(lo[idx]), marginal.cdf(hi[idx])
        if self.base.member_kind is ClassKind.THRESHOLD:
            return float(fa.max() - fa.min())
        value, exact = max_pairwise_disagreement(fa, fb)
        if not exact:
            logger.debug(f"Interval grid diameter bounded above over {idx.size} members")
        return value

    def _representative(self) -> Hypothesis:
        return self.base.members[int(self.indices[0])]

    def contains(self, h: Hypothesis) -> bool:
        if h.grid_index is not None and h.grid_index < len(self.base) \
                and self.base.members[h.grid_index].params == h.params:
            return bool(self.mask[h.grid_index])
        return any(self.mask[i] for i, g in enumerate(self.base.members)
                   if g.kind is h.kind and g.params == h.params)

    def to_grid(self, size: int = DEFAULT_GRID_SIZE) -> GridVersionSpace:
        return self

    def summary(self) -> Dict[str, Any]:
        return {"kind": "grid", "empty": self.is_empty, "members": self.size}


class UnionVersionSpace(VersionSpace):
    """Version space of a union class, one part per component class."""

    def __init__(self, base: HypothesisClass, parts: Sequence[VersionSpace]):
        super().__init__(base)
        self.parts = tuple(parts)

    @property
    def is_empty(self) -> bool:
        return all(p.is_empty for p in self.parts)

    def _live(self) -> List[VersionSpace]:
        return [p for p in self.parts if not p.is_empty]

    def restrict(self, x: Any, y: int) -> UnionVersionSpace:
        return UnionVersionSpace(self.base, [p.restrict(x, y) for p in self.parts])

    def _region(self) -> Region:
        live = self._live()
        region = live[0].disagreement_region()
        reps = [p.representative() for p in live]
        for part in live[1:]:
            region = region.union(part.disagreement_region())
        # Outside every part's own DIS each part votes with its representative
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                region = region.union(difference_region(reps[i], reps[j]))
        return region

    def _diameter(self, marginal: Marginal) -> float:
        return self.to_grid()._diameter(marginal)

    def _representative(self) -> Hypothesis:
        return self._live()[0].representative()

    def contains(self, h: Hypothesis) -> bool:
        return any(p.contains(h) for p in self.parts)

    def to_grid(self, size: int = DEFAULT_GRID_SIZE) -> GridVersionSpace:
        members = [h for p in self._live() for h in p.to_grid(size).survivors()]
        return GridVersionSpace(HypothesisClass.finite(members, name=f"{self.base.name}[grid]"))

    def summary(self) -> Dict[str, Any]:
        return {"kind": "union", "parts": [p.summary() for p in self.parts]}


def full_version_space(C: HypothesisClass) -> VersionSpace:
    """V = C."""
    if C.kind is ClassKind.THRESHOLD:
        return ThresholdVersionSpace(C)
    if C.kind is ClassKind.INTERVAL:
        return IntervalVersionSpace(C)
    if C.kind is ClassKind.FINITE:
        return GridVersionSpace(C)
    if C.kind is ClassKind.UNION:
        return UnionVersionSpace(C, [full_version_space(p) for p in C.parts])
    logger.info(f"Using a {DEFAULT_GRID_SIZE}-member grid for {C.name}")
    return GridVersionSpace(C.to_grid(DEFAULT_GRID_SIZE))


def _member_distances(C: HypothesisClass, h: Hypothesis, marginal: Marginal) -> np.ndarray:
    """P(g != h) for every member g of a finite class."""
    if C.member_kind is ClassKind.HALFSPACE:
        if h.kind is ClassKind.HALFSPACE and isinstance(marginal, UniformSphere):
            cos = np.clip(C.normals() @ np.asarray(h.params), -1.0, 1.0)
            return np.arccos(cos) / math.pi
        pool = MonteCarloPool(marginal)
        target = h.positive_mask(pool.points)
        return np.array([np.mean(g.positive_mask(pool.points) != target) for g in C.members])

    if not isinstance(marginal, PiecewiseUniform) or not h.is_one_dimensional:
        raise UnsupportedError("1-D members need a 1-D center and a marginal on [0, 1]")
    lo, hi = C.interval_bounds()
    a, b = h.interval_form()
    own = marginal.interval_mass(lo, hi)
    center = float(marginal.interval_mass(a, b))
    both = marginal.interval_mass(np.maximum(lo, a), np.minimum(hi, b))
    return np.clip(own + center - 2.0 * both, 0.0, 1.0)


def ball(C: HypothesisClass, h: Hypothesis, r: float, marginal: Marginal,
         grid_size: int = DEFAULT_GRID_SIZE) -> VersionSpace:
    """B(h, r) = {g in C : P(g(X) != h(X)) <= r}; radii above 1 are clamped."""
    if r < 0:
        raise ValidationError(f"radius must be nonnegative, got {r}")
    r = min(float(r), 1.0)

    if C.kind is ClassKind.THRESHOLD and h.kind is ClassKind.THRESHOLD \
            and isinstance(marginal, PiecewiseUniform):
        fz = float(marginal.cdf(h.params[0]))
        lo, hi = float(marginal.ppf_left(fz - r)), float(marginal.ppf_right(fz + r))
        return ThresholdVersionSpace(C, [ZInterval(lo, hi)])

    if C.kind is ClassKind.INTERVAL and h.is_one_dimensional \
            and isinstance(marginal, PiecewiseUniform):
        return IntervalBall(C, h, r, marginal)

    if C.kind is ClassKind.HALFSPACE and h.kind is ClassKind.HALFSPACE \
            and isinstance(marginal, UniformSphere) and h.dim == C.dim == marginal.dim:
        return HalfspaceBall(C, h, r)

    if C.kind is ClassKind.UNION:
        return UnionVersionSpace(C, [ball(p, h, r, marginal, grid_size) for p in C.parts])

    if C.kind is ClassKind.FINITE:
        return GridVersionSpace(C, _member_distances(C, h, marginal) <= r + MASS_TOLERANCE)

    logger.debug(f"No exact ball for {C.name} around {h.describe()}; filtering a grid")
    return ball(C.to_grid(grid_size), h, r, marginal, grid_size)


def eps_minimal_diameter(eps: float, V: Union[VersionSpace, HypothesisClass], problem: Any,
                         grid_size: int = 100_000) -> float:
    """diam(eps; V): diameter of {h in V : er(h) - inf_V er <= eps}, by dense grid."""
    if isinstance(V, HypothesisClass):
        grid = GridVersionSpace(V.to_grid(grid_size))
    else:
        grid = V.to_grid(grid_size)
    if grid.is_empty:
        raise EmptyVersionSpaceError("diam(eps; V) of an empty version space")

    errors = np.asarray(problem.true_errors(grid.base), dtype=float)
    live = errors[grid.mask]
    keep = errors - live.min() <= eps + MASS_TOLERANCE
    return grid.filter(keep).diameter(problem.marginal)
