"""Hypotheses, hypothesis classes and empirical error."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import DimensionMismatchError, StreamIndexError, ValidationError
from ..core.models import IndexedLabel
from .marginals import PiecewiseUniform, UniformSphere

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12
DEFAULT_GRID_SIZE = 4096

# An open lower end of a parameter set resolves to the next point of this grid
TIE_BREAK_STEP = 2.0 ** -20


def grid_above(v: float) -> float:
    """Smallest point of the tie-break grid strictly above v."""
    return (math.floor(v / TIE_BREAK_STEP) + 1) * TIE_BREAK_STEP


def _least_above(lo: float, hi: float, hi_open: bool) -> float:
    z = grid_above(lo)
    if z < hi or (z == hi and not hi_open):
        return z
    return 0.5 * (lo + hi)


def tie_break_interval(a_lo: float, a_open: bool, a_hi: float,
                       b_lo: float, b_hi: float, b_open: bool) -> Hypothesis:
    """Lexicographically smallest h_[a,b] with a from a_lo..a_hi and b from b_lo..b_hi.

    a_hi and b_lo are always attainable; a_open and b_open say whether a_lo
    and b_hi are excluded.
    """
    a = min(grid_above(a_lo), a_hi) if a_open else a_lo
    b = b_lo if b_lo > a else _least_above(max(a, b_lo), b_hi, b_open)
    return Hypothesis.interval(a, b)


def tie_break_gap(lo: float, lo_open: bool, hi: float, hi_open: bool) -> Hypothesis:
    """Lexicographically smallest h_[a,b] inside the gap between lo and hi."""
    a = _least_above(lo, hi, True) if lo_open else lo
    return Hypothesis.interval(a, _least_above(a, hi, hi_open))


class ClassKind(Enum):
    """Kinds of hypothesis classes."""
    THRESHOLD = "threshold"
    INTERVAL = "interval"
    HALFSPACE = "halfspace"
    FINITE = "finite"
    UNION = "union"


@dataclass(frozen=True)
class Hypothesis:
    """A binary classifier h: X -> {-1, +1}.

    Thresholds predict +1 iff x >= z, intervals +1 iff a <= x <= b and
    homogeneous halfspaces +1 iff w.x >= 0. Members of finite classes keep
    their position in the class as `grid_index`.
    """

    kind: ClassKind
    params: Tuple[float, ...]
    grid_index: Optional[int] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind is ClassKind.THRESHOLD:
            if len(self.params) != 1 or not 0.0 <= self.params[0] <= 1.0:
                raise ValidationError(f"threshold needs z in [0, 1], got {self.params}")
        elif self.kind is ClassKind.INTERVAL:
            if len(self.params) != 2:
                raise ValidationError(f"interval needs (a, b), got {self.params}")
            a, b = self.params
            if not 0.0 <= a < b <= 1.0:
                raise ValidationError(f"interval needs 0 <= a < b <= 1, got {self.params}")
        elif self.kind is ClassKind.HALFSPACE:
            if len(self.params) < 2:
                raise ValidationError("halfspace normal needs dimension >= 2")
            norm = math.sqrt(sum(v * v for v in self.params))
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise ValidationError(f"halfspace normal must be unit, norm is {norm}")
        else:
            raise ValidationError(f"{self.kind.value} is a class kind, not a hypothesis kind")

    @classmethod
    def threshold(cls, z: float, grid_index: Optional[int] = None) -> Hypothesis:
        return cls(ClassKind.THRESHOLD, (float(z),), grid_index)

    @classmethod
    def interval(cls, a: float, b: float, grid_index: Optional[int] = None) -> Hypothesis:
        return cls(ClassKind.INTERVAL, (float(a), float(b)), grid_index)

    @classmethod
    def halfspace(cls, w: Sequence[float], grid_index: Optional[int] = None) -> Hypothesis:
        w = np.asarray(w, dtype=float)
        norm = np.linalg.norm(w)
        if norm == 0:
            raise ValidationError("halfspace normal must be nonzero")
        return cls(ClassKind.HALFSPACE, tuple(float(v) for v in w / norm), grid_index)

    @property
    def dim(self) -> int:
        return len(self.params) if self.kind is ClassKind.HALFSPACE else 1

    @property
    def is_one_dimensional(self) -> bool:
        return self.kind is not ClassKind.HALFSPACE

    def interval_form(self) -> Tuple[float, float]:
        """Positive set of a 1-D hypothesis as a closed interval [a, b]."""
        if self.kind is ClassKind.THRESHOLD:
            return (self.params[0], 1.0)
        if self.kind is ClassKind.INTERVAL:
            return self.params
        raise DimensionMismatchError("halfspaces have no interval form")

    def positive_mask(self, x: Union[float, np.ndarray]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is ClassKind.HALFSPACE:
            if x.ndim == 0 or x.shape[-1] != self.dim:
                raise DimensionMismatchError(
                    f"point of shape {x.shape} for a halfspace in R^{self.dim}"
                )
            return x @ np.asarray(self.params) >= 0.0
        if x.ndim > 1:
            raise DimensionMismatchError(f"points of shape {x.shape} for a 1-D hypothesis")
        a, b = self.interval_form()
        return (x >= a) & (x <= b)

    def predict(self, x: Union[float, np.ndarray]) -> Union[int, np.ndarray]:
        """Label(s) in {-1, +1}; scalar input gives an int."""
        labels = np.where(self.positive_mask(x), 1, -1)
        return int(labels) if labels.ndim == 0 else labels

    def describe(self) -> str:
        if self.kind is ClassKind.THRESHOLD:
            return f"h_{self.params[0]:.6g}"
        if self.kind is ClassKind.INTERVAL:
            return f"h_[{self.params[0]:.6g},{self.params[1]:.6g}]"
        return "h_w(" + ",".join(f"{v:.4g}" for v in self.params) + ")"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "params": list(self.params)}
        if self.grid_index is not None:
            data["grid_index"] = self.grid_index
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Hypothesis:
        return cls(ClassKind(data["kind"]), tuple(float(v) for v in data["params"]),
                   data.get("grid_index"))


def _halfspace_shatter(m: int, d: int) -> int:
    # Homogeneous halfspaces on m points in general position
    if m <= 0:
        return 1
    return 2 * sum(math.comb(m - 1, i) for i in range(d))


@dataclass(frozen=True)
class HypothesisClass:
    """A hypothesis class C with its VC dimension and growth function.

    Parametric kinds carry no member list; finite classes hold their members
    (all of one base kind) and unions hold their parts.
    """

    kind: ClassKind
    vc_dimension: int
    dim: int = 1
    members: Tuple[Hypothesis, ...] = ()
    member_kind: Optional[ClassKind] = None
    parts: Tuple[HypothesisClass, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if self.vc_dimension < 1:
            raise ValidationError("VC dimension must be at least 1")
        if self.kind is ClassKind.FINITE and not self.members:
            raise ValidationError("finite class needs at least one member")
        if self.kind is ClassKind.UNION and len(self.parts) < 2:
            raise ValidationError("a union needs at least two parts")

    # Factories

    @classmethod
    def thresholds(cls) -> HypothesisClass:
        return cls(ClassKind.THRESHOLD, 1, 1, name="thresholds")

    @classmethod
    def intervals(cls) -> HypothesisClass:
        return cls(ClassKind.INTERVAL, 2, 1, name="intervals")

    @classmethod
    def halfspaces(cls, d: int) -> HypothesisClass:
        if d < 2:
            raise ValidationError("halfspaces need d >= 2")
        return cls(ClassKind.HALFSPACE, d, d, name=f"halfspaces(d={d})")

    @classmethod
    def finite(cls, members: Iterable[Hypothesis], name: str = "") -> HypothesisClass:
        members = list(members)
        if not members:
            raise ValidationError("finite class needs at least one member")

        one_dim = {h.is_one_dimensional for h in members}
        if len(one_dim) > 1:
            raise DimensionMismatchError("finite class mixes 1-D hypotheses and halfspaces")
        dims = {h.dim for h in members}
        if len(dims) > 1:
            raise DimensionMismatchError("finite class mixes halfspace dimensions")

        kinds = {h.kind for h in members}
        member_kind = kinds.pop() if len(kinds) == 1 else ClassKind.INTERVAL
        indexed = tuple(
            Hypothesis(h.kind, h.params, i) for i, h in enumerate(members)
        )
        base_vc = {ClassKind.THRESHOLD: 1, ClassKind.INTERVAL: 2,
                   ClassKind.HALFSPACE: dims.pop()}[member_kind]
        vc = max(1, min(base_vc, int(math.log2(len(members)))))
        return cls(ClassKind.FINITE, vc, indexed[0].dim, indexed, member_kind,
                   name=name or f"finite({len(indexed)})")

    @classmethod
    def union(cls, *parts: HypothesisClass) -> HypothesisClass:
        if len({p.dim for p in parts}) > 1:
            raise DimensionMismatchError("union parts live in different spaces")
        vc = sum(p.vc_dimension for p in parts) + len(parts) - 1
        name = " U ".join(p.name for p in parts)
        return cls(ClassKind.UNION, vc, parts[0].dim, parts=tuple(parts), name=name)

    @classmethod
    def from_spec(cls, spec: Dict[str, Any]) -> HypothesisClass:
        """Build from the config schema: kind plus d, grid_size, base, seed as needed."""
        kind = spec.get("kind")
        if kind == "threshold":
            return cls.thresholds()
        if kind == "interval":
            return cls.intervals()
        if kind == "halfspace":
            return cls.halfspaces(int(spec.get("d", 3)))
        if kind == "grid":
            base = cls.from_spec({**spec, "kind": spec.get("base", "threshold")})
            return base.to_grid(int(spec.get("grid_size", DEFAULT_GRID_SIZE)),
                                seed=int(spec.get("seed", 0)))
        if kind == "union":
            return cls.union(*(cls.from_spec(p) for p in spec["parts"]))
        if kind == "finite":
            return cls.finite([Hypothesis.from_dict(m) for m in spec["members"]],
                              name=spec.get("name", ""))
        raise ValidationError(f"unknown hypothesis class kind: {kind}")

    def to_spec(self) -> Dict[str, Any]:
        if self.kind is ClassKind.HALFSPACE:
            return {"kind": "halfspace", "d": self.dim}
        if self.kind is ClassKind.UNION:
            return {"kind": "union", "parts": [p.to_spec() for p in self.parts]}
        if self.kind is ClassKind.FINITE:
            return {"kind": "finite", "members": [h.to_dict() for h in self.members]}
        return {"kind": self.kind.value}

    # Properties

    @property
    def is_finite(self) -> bool:
        return self.kind is ClassKind.FINITE

    @property
    def is_parametric(self) -> bool:
        return self.kind in (ClassKind.THRESHOLD, ClassKind.INTERVAL, ClassKind.HALFSPACE)

    @property
    def base_kind(self) -> ClassKind:
        """Kind of the member hypotheses."""
        if self.kind is ClassKind.FINITE:
            return self.member_kind
        if self.kind is ClassKind.UNION:
            kinds = {p.base_kind for p in self.parts}
            return kinds.pop() if len(kinds) == 1 else ClassKind.INTERVAL
        return self.kind

    def __len__(self) -> int:
        if self.kind is ClassKind.FINITE:
            return len(self.members)
        raise TypeError(f"{self.name} is not finite")

    def shatter_coefficient(self, m: int) -> int:
        """Growth function S(C, m)."""
        m = int(m)
        if m < 0:
            raise ValidationError("m must be nonnegative")
        if self.kind is ClassKind.THRESHOLD:
            return m + 1
        if self.kind is ClassKind.INTERVAL:
            return m * (m + 1) // 2 + 1
        if self.kind is ClassKind.HALFSPACE:
            return _halfspace_shatter(m, self.dim)
        if self.kind is ClassKind.FINITE:
            base = {
                ClassKind.THRESHOLD: m + 1,
                ClassKind.INTERVAL: m * (m + 1) // 2 + 1,
            }.get(self.member_kind)
            if base is None:
                base = _halfspace_shatter(m, self.dim)
            return min(len(self.members), base)
        return min(sum(p.shatter_coefficient(m) for p in self.parts), 2 ** m)

    def log_shatter_coefficient(self, m: int) -> float:
        return math.log(self.shatter_coefficient(m))

    def contains(self, h: Hypothesis) -> bool:
        if self.kind is ClassKind.FINITE:
            return any(h.kind is g.kind and h.params == g.params for g in self.members)
        if self.kind is ClassKind.UNION:
            return any(p.contains(h) for p in self.parts)
        if self.kind is ClassKind.HALFSPACE:
            return h.kind is ClassKind.HALFSPACE and h.dim == self.dim
        if self.kind is ClassKind.INTERVAL:
            return h.kind in (ClassKind.INTERVAL, ClassKind.THRESHOLD)
        return h.kind is ClassKind.THRESHOLD

    # Grids

    def to_grid(self, size: int = DEFAULT_GRID_SIZE, seed: int = 0) -> HypothesisClass:
        """Finite approximation with about `size` members."""
        if self.kind is ClassKind.FINITE:
            return self
        if size < 2:
            raise ValidationError("grid size must be at least 2")

        if self.kind is ClassKind.THRESHOLD:
            members = [Hypothesis.threshold(z) for z in np.linspace(0.0, 1.0, size)]
        elif self.kind is ClassKind.INTERVAL:
            q = max(2, int(round((1 + math.sqrt(1 + 8 * size)) / 2)))
            ends = np.linspace(0.0, 1.0, q)
            i, j = np.triu_indices(q, k=1)
            members = [Hypothesis.interval(a, b) for a, b in zip(ends[i], ends[j])]
        elif self.kind is ClassKind.HALFSPACE:
            rng = np.random.default_rng(seed)
            w = rng.standard_normal((size, self.dim))
            members = [Hypothesis.halfspace(row) for row in w]
        else:
            members = [h for p in self.parts for h in p.to_grid(size, seed).members]

        logger.debug(f"Gridded {self.name} into {len(members)} members")
        return HypothesisClass.finite(members, name=f"{self.name}[grid {len(members)}]")

    def representative(self) -> Hypothesis:
        """Tie-break member of the whole class: smallest parameters or lowest index."""
        if self.kind is ClassKind.FINITE:
            return self.members[0]
        if self.kind is ClassKind.UNION:
            return self.parts[0].representative()
        if self.kind is ClassKind.THRESHOLD:
            return Hypothesis.threshold(0.0)
        if self.kind is ClassKind.INTERVAL:
            return Hypothesis.interval(0.0, grid_above(0.0))
        return Hypothesis.halfspace(np.eye(self.dim)[0])

    # Vectorized prediction for finite classes

    def prediction_matrix(self, points: np.ndarray) -> np.ndarray:
        """(members x points) matrix of labels in {-1, +1} for a finite class."""
        if self.kind is not ClassKind.FINITE:
            raise ValidationError("prediction_matrix needs a finite class")
        points = np.asarray(points, dtype=float)
        if self.member_kind is ClassKind.HALFSPACE:
            if points.ndim != 2 or points.shape[1] != self.dim:
                raise DimensionMismatchError(f"points of shape {points.shape} for R^{self.dim}")
            return np.where(self.normals() @ points.T >= 0.0, 1, -1).astype(np.int8)
        lo, hi = self.interval_bounds()
        x = points.reshape(1, -1)
        return np.where((x >= lo[:, None]) & (x <= hi[:, None]), 1, -1).astype(np.int8)

    def interval_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Closed positive sets [a_i, b_i] of a finite 1-D class."""
        forms = np.array([h.interval_form() for h in self.members], dtype=float)
        return forms[:, 0], forms[:, 1]

    def normals(self) -> np.ndarray:
        return np.array([h.params for h in self.members], dtype=float)


def stream_points(stream: Any, indices: Sequence[int]) -> np.ndarray:
    """Points X_i for 1-based indices, from a LabeledStream or an array."""
    if hasattr(stream, "points"):
        return stream.points(indices)
    data = np.asarray(stream, dtype=float)
    idx = np.asarray(indices, dtype=int)
    if idx.size and (idx.min() < 1 or idx.max() > len(data)):
        raise StreamIndexError(f"indices outside the stream of length {len(data)}")
    return data[idx - 1]


def empirical_error(h: Hypothesis, S: Iterable[IndexedLabel], stream: Any) -> float:
    """er_S(h): fraction of pairs in S that h mislabels; 0 for empty S."""
    S = list(S)
    if not S:
        return 0.0
    x = stream_points(stream, [p.index for p in S])
    y = np.array([p.label for p in S])
    predictions = np.atleast_1d(h.predict(x))
    return float(np.mean(predictions != y))


def disagreement_mass(h1: Hypothesis, h2: Hypothesis, marginal: Any,
                      samples: int = 100_000, seed: int = 0) -> float:
    """P(h1(X) != h2(X)); exact for 1-D and for halfspaces on the sphere."""
    if h1.is_one_dimensional and h2.is_one_dimensional and isinstance(marginal, PiecewiseUniform):
        (a1, b1), (a2, b2) = h1.interval_form(), h2.interval_form()
        m1 = float(marginal.interval_mass(a1, b1))
        m2 = float(marginal.interval_mass(a2, b2))
        lo, hi = max(a1, a2), min(b1, b2)
        both = float(marginal.interval_mass(lo, hi)) if lo < hi else 0.0
        return max(m1 + m2 - 2.0 * both, 0.0)

    if (h1.kind is ClassKind.HALFSPACE and h2.kind is ClassKind.HALFSPACE
            and isinstance(marginal, UniformSphere) and h1.dim == h2.dim == marginal.dim):
        cos = float(np.clip(np.dot(h1.params, h2.params), -1.0, 1.0))
        return math.acos(cos) / math.pi

    x = marginal.sample(np.random.default_rng(seed), samples)
    return float(np.mean(h1.positive_mask(x) != h2.positive_mask(x)))
