"""Marginal distributions D_X over the instance space."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import ValidationError

ArrayLike = Union[float, Sequence[float], np.ndarray]


class Marginal(ABC):
    """A probability distribution on the instance space."""

    dim: int = 1

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` i.i.d. points; shape (size,) for dim 1, else (size, dim)."""

    @abstractmethod
    def to_spec(self) -> Dict[str, Any]:
        """Serializable description, inverse of `marginal_from_spec`."""

    def check_points(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return x
        if x.shape[-1] != self.dim:
            raise ValidationError(f"expected points of dimension {self.dim}, got {x.shape}")
        return x


class PiecewiseUniform(Marginal):
    """Density constant on each piece of a partition of [0, 1].

    Zero-weight pieces are allowed; the cdf is then flat there and the two
    quantile inverses differ.
    """

    dim = 1

    def __init__(self, breaks: Iterable[float], weights: Iterable[float]):
        breaks = np.asarray(list(breaks), dtype=float)
        weights = np.asarray(list(weights), dtype=float)

        if breaks.ndim != 1 or breaks.size < 2 or weights.size != breaks.size - 1:
            raise ValidationError("need k+1 breaks for k weights")
        if breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0):
            raise ValidationError("breaks must increase strictly from 0 to 1")
        if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-12):
            raise ValidationError("weights must be nonnegative and sum to 1")

        self.breaks = breaks
        self.weights = weights / weights.sum()
        self.cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        self.cum[-1] = 1.0

    @classmethod
    def uniform(cls) -> PiecewiseUniform:
        return cls([0.0, 1.0], [1.0])

    @classmethod
    def from_densities(cls, breaks: Sequence[float], densities: Sequence[float]) -> PiecewiseUniform:
        """Build from per-piece density values, which must integrate to 1."""
        breaks = np.asarray(breaks, dtype=float)
        weights = np.asarray(densities, dtype=float) * np.diff(breaks)
        if not np.isclose(weights.sum(), 1.0, atol=1e-9):
            raise ValidationError(f"densities integrate to {weights.sum()}, not 1")
        return cls(breaks, weights)

    @classmethod
    def mixture(cls, components: Sequence[Tuple[float, float, float]]) -> PiecewiseUniform:
        """Finite mixture of uniform components given as (weight, lo, hi)."""
        if not components:
            raise ValidationError("a mixture needs at least one component")
        total = sum(w for w, _, _ in components)
        if total <= 0:
            raise ValidationError("mixture weights must have positive sum")

        breaks = np.unique(np.array(
            [0.0, 1.0] + [v for _, lo, hi in components for v in (lo, hi)], dtype=float
        ))
        if breaks[0] < 0.0 or breaks[-1] > 1.0:
            raise ValidationError("mixture components must lie in [0, 1]")

        weights = np.zeros(breaks.size - 1)
        for w, lo, hi in components:
            if not 0.0 <= lo < hi <= 1.0 or w < 0:
                raise ValidationError(f"invalid mixture component ({w}, {lo}, {hi})")
            left, right = breaks[:-1], breaks[1:]
            overlap = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
            weights += (w / total) * overlap / (hi - lo)
        return cls(breaks, weights)

    @property
    def densities(self) -> np.ndarray:
        return self.weights / np.diff(self.breaks)

    def cdf(self, x: ArrayLike) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return np.interp(x, self.breaks, self.cum)

    def density(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.weights.size - 1)
        inside = (x >= 0.0) & (x <= 1.0)
        return np.where(inside, self.densities[k], 0.0)

    def _invert(self, p: np.ndarray, k: np.ndarray) -> np.ndarray:
        k = np.clip(k, 1, self.breaks.size - 1)
        lo, hi = self.breaks[k - 1], self.breaks[k]
        c_lo, w = self.cum[k - 1], self.weights[k - 1]
        frac = np.divide(p - c_lo, w, out=np.zeros_like(p), where=w > 0)
        return lo + np.clip(frac, 0.0, 1.0) * (hi - lo)

    def ppf_left(self, p: ArrayLike) -> np.ndarray:
        """inf{x : F(x) >= p}, clamped to [0, 1]."""
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        k = np.searchsorted(self.cum, p, side="left")
        return np.where(p <= 0.0, 0.0, self._invert(p, k))

    def ppf_right(self, p: ArrayLike) -> np.ndarray:
        """sup{x : F(x) <= p}, clamped to [0, 1]."""
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        k = np.searchsorted(self.cum, p, side="right")
        return np.where(p >= 1.0, 1.0, self._invert(p, k))

    def interval_mass(self, lo: ArrayLike, hi: ArrayLike) -> np.ndarray:
        return np.clip(self.cdf(hi) - self.cdf(lo), 0.0, 1.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.ppf_left(rng.random(size))

    def to_spec(self) -> Dict[str, Any]:
        if self.weights.size == 1:
            return {"kind": "uniform"}
        return {
            "kind": "piecewise",
            "breaks": self.breaks.tolist(),
            "weights": self.weights.tolist(),
        }

    def __repr__(self) -> str:
        return f"PiecewiseUniform(breaks={self.breaks.tolist()}, weights={self.weights.tolist()})"


class UniformSphere(Marginal):
    """Uniform distribution on the unit sphere in R^d."""

    def __init__(self, d: int):
        if d < 2:
            raise ValidationError("the sphere needs dimension d >= 2")
        self.dim = int(d)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        g = rng.standard_normal((size, self.dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": "sphere", "d": self.dim}

    def __repr__(self) -> str:
        return f"UniformSphere(d={self.dim})"


def uniform() -> PiecewiseUniform:
    return PiecewiseUniform.uniform()


def marginal_from_spec(spec: Union[str, Dict[str, Any], Marginal, None]) -> Marginal:
    """Build a marginal from its config description."""
    if isinstance(spec, Marginal):
        return spec
    if spec is None or spec == "uniform":
        return PiecewiseUniform.uniform()
    if isinstance(spec, str):
        raise ValidationError(f"unknown marginal: {spec}")

    kind = spec.get("kind", "uniform")
    if kind == "uniform":
        return PiecewiseUniform.uniform()
    if kind == "piecewise":
        if "densities" in spec:
            return PiecewiseUniform.from_densities(spec["breaks"], spec["densities"])
        return PiecewiseUniform(spec["breaks"], spec["weights"])
    if kind == "mixture":
        return PiecewiseUniform.mixture([tuple(c) for c in spec["components"]])
    if kind == "sphere":
        return UniformSphere(int(spec.get("d", 3)))
    raise ValidationError(f"unknown marginal kind: {kind}")
