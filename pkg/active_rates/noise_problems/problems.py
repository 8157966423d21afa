"""Synthetic joint distributions with known posterior, Bayes classifier and noise rate."""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from ..core.exceptions import DimensionMismatchError, ValidationError
from ..core.models import EstimationMode, MassEstimate
from ..hypothesis_spaces import (
    ClassKind,
    Hypothesis,
    HypothesisClass,
    Marginal,
    PiecewiseUniform,
    UniformSphere,
    disagreement_mass,
    marginal_from_spec,
    max_pairwise_disagreement,
)

logger = logging.getLogger(__name__)

DENSE_GRID = 100_000
INTERVAL_ENDPOINTS = 1000
CERTIFY_LEVELS = 10


@dataclass(frozen=True)
class TsybakovTag:
    """diam(eps; C) <= mu * eps^(1/kappa), with mu certified on a dense grid."""

    kappa: float
    mu: float


@dataclass(frozen=True)
class EntropyTag:
    """Documentation-only entropy exponents; never verified."""

    alpha: float
    rho: float


class NoiseProblem(ABC):
    """A joint distribution given by a marginal and the posterior eta(x) = P(Y=+1 | x)."""

    kind: str = ""

    def __init__(self, marginal: Marginal, bayes: Hypothesis,
                 entropy_tag: Optional[EntropyTag] = None):
        self.marginal = marginal
        self.bayes = bayes
        self.entropy_tag = entropy_tag
        self.tsybakov: Optional[TsybakovTag] = None
        self._noise_rates: Dict[str, float] = {}

    @abstractmethod
    def eta(self, x: Union[float, np.ndarray]) -> np.ndarray:
        """Posterior probability of the label +1."""

    @property
    @abstractmethod
    def nu_star(self) -> float:
        """Bayes error rate."""

    @abstractmethod
    def true_errors(self, C: HypothesisClass) -> np.ndarray:
        """er(h) for every member of a finite class."""

    @abstractmethod
    def to_spec(self) -> Dict[str, Any]:
        """Config description, inverse of `problem_from_spec`."""

    @property
    def name(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.to_spec().items() if k != "marginal")

    def bayes_label(self, x: Union[float, np.ndarray]) -> np.ndarray:
        """h*(x) = 2 * 1[eta(x) >= 1/2] - 1."""
        return np.where(self.eta(x) >= 0.5, 1, -1)

    def draw_labels(self, rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
        u = rng.random(np.asarray(x).shape[0])
        return np.where(u < self.eta(x), 1, -1)

    def sample(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        x = self.marginal.sample(rng, size)
        return x, self.draw_labels(rng, x)

    def true_error(self, h: Hypothesis) -> float:
        """er(h) = P(h(X) != Y)."""
        return float(self.true_errors(HypothesisClass.finite([h]))[0])

    def true_error_estimate(self, h: Hypothesis, samples: int = 100_000,
                            seed: int = 0) -> MassEstimate:
        """Monte Carlo er(h) with its standard error."""
        x, y = self.sample(np.random.default_rng(seed), samples)
        p = float(np.mean(np.where(h.positive_mask(x), 1, -1) != y))
        return MassEstimate(p, math.sqrt(p * (1 - p) / samples), EstimationMode.MONTE_CARLO, samples)

    def noise_rate(self, C: HypothesisClass) -> float:
        """nu = inf over C of er(h): analytic when h* is in C, dense grid otherwise."""
        key = repr(C.to_spec()) if not C.is_finite else f"finite:{id(C)}"
        if key in self._noise_rates:
            return self._noise_rates[key]

        if C.kind is not ClassKind.FINITE and C.contains(self.bayes):
            nu = self.nu_star
        elif C.kind is ClassKind.UNION:
            nu = min(self.noise_rate(p) for p in C.parts)
        elif C.is_finite:
            nu = float(self.true_errors(C).min())
        else:
            nu = self._parametric_noise_rate(C)
        self._noise_rates[key] = nu
        return nu

    def _parametric_noise_rate(self, C: HypothesisClass) -> float:
        logger.debug(f"Minimizing er over a dense grid of {C.name}")
        return float(self.true_errors(C.to_grid(4096)).min())

    def excess_error(self, h: Hypothesis, C: Optional[HypothesisClass] = None) -> float:
        """er(h) - nu, class-relative when C is given and Bayes-relative otherwise."""
        reference = self.nu_star if C is None else self.noise_rate(C)
        return self.true_error(h) - reference


class OneDimensionalProblem(NoiseProblem):
    """Problems on [0, 1] under a piecewise-uniform marginal, with exact error integrals."""

    def __init__(self, marginal: Marginal, bayes: Hypothesis,
                 entropy_tag: Optional[EntropyTag] = None):
        if not isinstance(marginal, PiecewiseUniform):
            raise ValidationError("one-dimensional problems need a marginal on [0, 1]")
        super().__init__(marginal, bayes, entropy_tag)

    @abstractmethod
    def _eta_antiderivative(self, x: np.ndarray) -> np.ndarray:
        """Lebesgue antiderivative of eta, zero at 0."""

    @abstractmethod
    def _breakpoints(self) -> Sequence[float]:
        """Points where eta is not smooth."""

    def _weighted(self, antiderivative: Any, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
        total = np.zeros(lo.shape)
        breaks, density = self.marginal.breaks, self.marginal.densities
        for k in range(density.size):
            if density[k] == 0.0:
                continue
            left = np.maximum(lo, breaks[k])
            right = np.maximum(np.minimum(hi, breaks[k + 1]), left)
            total += density[k] * (antiderivative(right) - antiderivative(left))
        return total

    def eta_mass(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Integral of eta over [lo, hi] under the marginal."""
        return self._weighted(self._eta_antiderivative, lo, hi)

    def interval_errors(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """er(h_[a,b]) = P[a,b] - 2 * int_[a,b] eta + int eta, vectorized."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        total = float(self.eta_mass(0.0, 1.0))
        errors = self.marginal.interval_mass(a, b) - 2.0 * self.eta_mass(a, b) + total
        return np.clip(errors, 0.0, 1.0)

    def threshold_errors(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.interval_errors(z, np.ones_like(z))

    def true_errors(self, C: HypothesisClass) -> np.ndarray:
        if not C.is_finite or C.member_kind is ClassKind.HALFSPACE:
            raise DimensionMismatchError(f"{C.name} does not live on [0, 1]")
        lo, hi = C.interval_bounds()
        return self.interval_errors(lo, hi)

    def true_error(self, h: Hypothesis) -> float:
        if not h.is_one_dimensional:
            raise DimensionMismatchError("halfspace hypothesis on a one-dimensional problem")
        a, b = h.interval_form()
        return float(self.interval_errors(np.array([a]), np.array([b]))[0])

    def nu_star_quadrature(self) -> float:
        """Bayes error by adaptive quadrature of min(eta, 1 - eta)."""
        def integrand(x: float) -> float:
            e = float(self.eta(x))
            return min(e, 1.0 - e) * float(self.marginal.density(x))

        points = sorted({p for p in list(self._breakpoints()) + list(self.marginal.breaks[1:-1])
                         if 0.0 < p < 1.0})
        value, _ = integrate.quad(integrand, 0.0, 1.0, points=points or None, limit=200,
                                  epsabs=1e-12, epsrel=1e-12)
        return float(value)

    def _parametric_noise_rate(self, C: HypothesisClass) -> float:
        if C.kind is ClassKind.THRESHOLD:
            return float(self.threshold_errors(np.linspace(0.0, 1.0, DENSE_GRID)).min())
        if C.kind is ClassKind.INTERVAL:
            a, b = _interval_grid(INTERVAL_ENDPOINTS)
            return float(min(self.interval_errors(a, b).min(),
                             self.threshold_errors(np.linspace(0.0, 1.0, DENSE_GRID)).min()))
        return super()._parametric_noise_rate(C)

    def certify_mu(self, kappa: float, class_kind: ClassKind = ClassKind.THRESHOLD) -> float:
        """Smallest mu with diam(2^-k; C) <= mu * 2^(-k/kappa) for k = 1..10 on a dense grid."""
        if class_kind is ClassKind.THRESHOLD:
            z = np.linspace(0.0, 1.0, DENSE_GRID)
            errors = self.threshold_errors(z)
            fz = self.marginal.cdf(z)
        else:
            a, b = _interval_grid(INTERVAL_ENDPOINTS)
            errors = self.interval_errors(a, b)
            fa, fb = self.marginal.cdf(a), self.marginal.cdf(b)
        excess = errors - errors.min()

        mu = 0.0
        for k in range(1, CERTIFY_LEVELS + 1):
            eps = 2.0 ** -k
            keep = excess <= eps
            if class_kind is ClassKind.THRESHOLD:
                diam = float(fz[keep].max() - fz[keep].min())
            else:
                diam, _ = max_pairwise_disagreement(fa[keep], fb[keep])
            mu = max(mu, diam / eps ** (1.0 / kappa))
        return mu


def _interval_grid(q: int) -> Tuple[np.ndarray, np.ndarray]:
    ends = np.linspace(0.0, 1.0, q)
    i, j = np.triu_indices(q, k=1)
    return ends[i], ends[j]


class ThresholdNoiseProblem(OneDimensionalProblem):
    """Bayes classifier h_{z*}; polynomial, bounded or noiseless posterior.

    Polynomial: eta = 1/2 + 1/2 sign(x - z*) |x - z*|^(1/alpha), kappa = (1 + alpha)/alpha.
    Bounded: eta = 1/2 + c sign(x - z*) with x >= z* on the positive side, kappa = 1.
    Noiseless is bounded with c = 1/2.
    """

    def __init__(self, z_star: float, flavor: str = "polynomial", alpha: Optional[float] = None,
                 c_margin: Optional[float] = None, marginal: Optional[Marginal] = None,
                 entropy_tag: Optional[EntropyTag] = None, certify: bool = True):
        if not 0.0 < z_star < 1.0:
            raise ValidationError(f"z* must be in (0, 1), got {z_star}")
        if flavor == "polynomial":
            if alpha is None or alpha <= 0:
                raise ValidationError(f"polynomial noise needs alpha > 0, got {alpha}")
        elif flavor == "bounded":
            if c_margin is None or not 0.0 < c_margin < 0.5:
                raise ValidationError(f"bounded noise needs c in (0, 1/2), got {c_margin}")
        elif flavor == "noiseless":
            c_margin = 0.5
        else:
            raise ValidationError(f"unknown noise flavor: {flavor}")

        super().__init__(marginal or PiecewiseUniform.uniform(), Hypothesis.threshold(z_star),
                         entropy_tag)
        self.z_star = float(z_star)
        self.flavor = flavor
        self.alpha = None if alpha is None else float(alpha)
        self.c_margin = None if c_margin is None else float(c_margin)
        self.kind = "tsybakov" if flavor == "polynomial" else flavor

        if certify:
            kappa = self.kappa
            self.tsybakov = TsybakovTag(kappa, self.certify_mu(kappa))
            logger.debug(f"Certified {self.kind} problem: kappa={kappa:.4g}, mu={self.tsybakov.mu:.4g}")

    @property
    def kappa(self) -> float:
        if self.flavor == "polynomial":
            return (1.0 + self.alpha) / self.alpha
        return 1.0

    @property
    def power(self) -> float:
        return 1.0 / self.alpha

    def eta(self, x: Union[float, np.ndarray]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        side = np.where(x >= self.z_star, 1.0, -1.0)
        if self.flavor == "polynomial":
            return np.clip(0.5 + 0.5 * side * np.abs(x - self.z_star) ** self.power, 0.0, 1.0)
        return 0.5 + self.c_margin * side

    def _eta_antiderivative(self, x: np.ndarray) -> np.ndarray:
        d = np.abs(x - self.z_star)
        if self.flavor == "polynomial":
            p = self.power
            return x / 2.0 + d ** (p + 1.0) / (2.0 * (p + 1.0)) - self.z_star ** (p + 1.0) / (2.0 * (p + 1.0))
        return x / 2.0 + self.c_margin * (d - self.z_star)

    def _breakpoints(self) -> Sequence[float]:
        return [self.z_star]

    @property
    def nu_star(self) -> float:
        if self.flavor != "polynomial":
            return 0.5 - self.c_margin
        p, z = self.power, self.z_star

        # int (1/2 - |x - z|^p / 2) dx has antiderivative x/2 - sign(x - z)|x - z|^(p+1) / (2(p+1))
        def k(x: np.ndarray) -> np.ndarray:
            return x / 2.0 - np.sign(x - z) * np.abs(x - z) ** (p + 1.0) / (2.0 * (p + 1.0))

        return float(self._weighted(k, 0.0, 1.0))

    def nu_star_closed_form(self) -> float:
        """Uniform-marginal Bayes error 1/2 - (z^(p+1) + (1-z)^(p+1)) / (2(p+1))."""
        if self.flavor != "polynomial":
            return 0.5 - self.c_margin
        p, z = self.power, self.z_star
        return 0.5 - (z ** (p + 1.0) + (1.0 - z) ** (p + 1.0)) / (2.0 * (p + 1.0))

    def to_spec(self) -> Dict[str, Any]:
        spec: Dict[str, Any] = {"kind": self.kind, "z_star": self.z_star}
        if self.flavor == "polynomial":
            spec["alpha"] = self.alpha
        elif self.flavor == "bounded":
            spec["c_margin"] = self.c_margin
        spec["marginal"] = self.marginal.to_spec()
        return spec


class IntervalNoiseProblem(OneDimensionalProblem):
    """Bayes classifier h_[a,b] with bounded noise eta = 1/2 + c h_[a,b](x); c = 1/2 is noiseless."""

    kind = "interval"

    def __init__(self, a: float, b: float, c_margin: float = 0.25,
                 marginal: Optional[Marginal] = None, entropy_tag: Optional[EntropyTag] = None,
                 certify: bool = True):
        if not 0.0 <= a < b <= 1.0:
            raise ValidationError(f"need 0 <= a < b <= 1, got ({a}, {b})")
        if not 0.0 < c_margin <= 0.5:
            raise ValidationError(f"c must be in (0, 1/2], got {c_margin}")
        super().__init__(marginal or PiecewiseUniform.uniform(), Hypothesis.interval(a, b),
                         entropy_tag)
        self.a, self.b, self.c_margin = float(a), float(b), float(c_margin)
        if certify:
            self.tsybakov = TsybakovTag(1.0, self.certify_mu(1.0, ClassKind.INTERVAL))

    def eta(self, x: Union[float, np.ndarray]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return 0.5 + self.c_margin * np.where(inside, 1.0, -1.0)

    def _eta_antiderivative(self, x: np.ndarray) -> np.ndarray:
        c = self.c_margin
        return (0.5 - c) * x + 2.0 * c * np.clip(x - self.a, 0.0, self.b - self.a)

    def _breakpoints(self) -> Sequence[float]:
        return [self.a, self.b]

    @property
    def nu_star(self) -> float:
        return 0.5 - self.c_margin

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": "interval", "a": self.a, "b": self.b, "c_margin": self.c_margin,
                "marginal": self.marginal.to_spec()}


class HalfspaceNoiseProblem(NoiseProblem):
    """Homogeneous halfspace h_{w*} under the uniform sphere.

    Bounded noise eta = 1/2 + c sign(w*.x) gives er(h_w) = nu* + 2c angle(w, w*)/pi
    exactly; the polynomial margin variant uses Monte Carlo errors.
    """

    kind = "halfspace"

    def __init__(self, d: int = 3, w_star: Optional[Sequence[float]] = None,
                 c_margin: Optional[float] = 0.25, alpha: Optional[float] = None,
                 entropy_tag: Optional[EntropyTag] = None, mc_samples: int = 100_000,
                 seed: int = 0):
        w = np.eye(d)[0] if w_star is None else np.asarray(w_star, dtype=float)
        if w.size != d:
            raise DimensionMismatchError(f"w* has dimension {w.size}, expected {d}")
        if alpha is None and (c_margin is None or not 0.0 < c_margin <= 0.5):
            raise ValidationError(f"bounded halfspace noise needs c in (0, 1/2], got {c_margin}")
        if alpha is not None and alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {alpha}")
        super().__init__(UniformSphere(d), Hypothesis.halfspace(w), entropy_tag)
        self.d = d
        self.w_star = np.asarray(self.bayes.params)
        self.c_margin = None if alpha is not None else float(c_margin)
        self.alpha = None if alpha is None else float(alpha)
        self.mc_samples = mc_samples
        self.seed = seed
        if self.alpha is None:
            # excess <= eps keeps normals within pi eps / (2c) of w*; two of them disagree on <= eps / c
            self.tsybakov = TsybakovTag(1.0, 1.0 / self.c_margin)
        self._nu_star: Optional[float] = None

    def eta(self, x: Union[float, np.ndarray]) -> np.ndarray:
        margin = np.asarray(x, dtype=float) @ self.w_star
        side = np.where(margin >= 0.0, 1.0, -1.0)
        if self.alpha is None:
            return 0.5 + self.c_margin * side
        return np.clip(0.5 + 0.5 * side * np.abs(margin) ** (1.0 / self.alpha), 0.0, 1.0)

    @property
    def nu_star(self) -> float:
        if self.alpha is None:
            return 0.5 - self.c_margin
        if self._nu_star is None:
            x = self.marginal.sample(np.random.default_rng(self.seed), self.mc_samples)
            e = self.eta(x)
            self._nu_star = float(np.mean(np.minimum(e, 1.0 - e)))
        return self._nu_star

    def true_errors(self, C: HypothesisClass) -> np.ndarray:
        if not C.is_finite or C.member_kind is not ClassKind.HALFSPACE or C.dim != self.d:
            raise DimensionMismatchError(f"{C.name} does not live on the sphere in R^{self.d}")
        if self.alpha is None:
            cos = np.clip(C.normals() @ self.w_star, -1.0, 1.0)
            return self.nu_star + 2.0 * self.c_margin * np.arccos(cos) / math.pi
        x, y = self.sample(np.random.default_rng(self.seed), self.mc_samples)
        predictions = np.where(C.normals() @ x.T >= 0.0, 1, -1)
        return np.mean(predictions != y, axis=1)

    def true_error(self, h: Hypothesis) -> float:
        if h.kind is not ClassKind.HALFSPACE:
            raise DimensionMismatchError("one-dimensional hypothesis on a sphere problem")
        if self.alpha is None:
            return self.nu_star + 2.0 * self.c_margin * disagreement_mass(h, self.bayes, self.marginal)
        return self.true_error_estimate(h, self.mc_samples, self.seed).value

    def to_spec(self) -> Dict[str, Any]:
        spec: Dict[str, Any] = {"kind": "halfspace", "d": self.d, "w_star": self.w_star.tolist()}
        if self.alpha is None:
            spec["c_margin"] = self.c_margin
        else:
            spec["alpha"] = self.alpha
        return spec


def make_tsybakov_threshold(alpha: Optional[float] = None, c_margin: Optional[float] = None,
                            z_star: float = 0.5, flavor: str = "polynomial",
                            marginal: Optional[Marginal] = None) -> ThresholdNoiseProblem:
    """Threshold problem with controllable Tsybakov exponent."""
    return ThresholdNoiseProblem(z_star, flavor, alpha=alpha, c_margin=c_margin, marginal=marginal)


def make_noiseless_threshold(z_star: float = 0.5,
                             marginal: Optional[Marginal] = None) -> ThresholdNoiseProblem:
    return ThresholdNoiseProblem(z_star, "noiseless", marginal=marginal)


def problem_from_spec(spec: Dict[str, Any]) -> NoiseProblem:
    """Build a problem from the config schema (kind, alpha or c_margin, z_star, marginal, ...)."""
    kind = spec.get("kind")
    marginal = marginal_from_spec(spec.get("marginal"))
    entropy = spec.get("entropy_tag")
    entropy_tag = EntropyTag(float(entropy[0]), float(entropy[1])) if entropy else None

    if kind == "tsybakov":
        return ThresholdNoiseProblem(float(spec.get("z_star", 0.5)), "polynomial",
                                     alpha=float(spec.get("alpha", 1.0)), marginal=marginal,
                                     entropy_tag=entropy_tag)
    if kind == "bounded":
        return ThresholdNoiseProblem(float(spec.get("z_star", 0.5)), "bounded",
                                     c_margin=float(spec.get("c_margin", 0.25)),
                                     marginal=marginal, entropy_tag=entropy_tag)
    if kind == "noiseless":
        return ThresholdNoiseProblem(float(spec.get("z_star", 0.5)), "noiseless",
                                     marginal=marginal, entropy_tag=entropy_tag)
    if kind == "interval":
        return IntervalNoiseProblem(float(spec.get("a", 0.3)), float(spec.get("b", 0.7)),
                                    float(spec.get("c_margin", 0.25)), marginal=marginal,
                                    entropy_tag=entropy_tag)
    if kind == "halfspace":
        alpha = spec.get("alpha")
        return HalfspaceNoiseProblem(int(spec.get("d", 3)), spec.get("w_star"),
                                     c_margin=spec.get("c_margin", 0.25 if alpha is None else None),
                                     alpha=alpha, entropy_tag=entropy_tag,
                                     seed=int(spec.get("seed", 0)))
    raise ValidationError(f"unknown problem kind: {kind}")
