"""Distribution-dependent bound and the radius r_C, for diagnostics and reports.

These need the true errors of the problem, so they never run inside a learner.
Expectations are averaged over `n_outer` fresh samples and carry a standard
error.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..hypothesis_spaces import GridVersionSpace, HypothesisClass, MonteCarloPool, region_mass
from .fixed_point import INFINITY, BoundConfig, BoundScan, s_m

logger = logging.getLogger(__name__)


class DistributionBound:
    """phi_C, U-tilde, the tilde fixed point, m-tilde and r_C for one problem and class."""

    def __init__(self, problem, C: HypothesisClass, delta: float,
                 cfg: Optional[BoundConfig] = None, seed: int = 0):
        if not 0.0 < delta < 1.0:
            raise ValidationError(f"delta must be in (0, 1), got {delta}")
        self.problem = problem
        self.delta = delta
        self.cfg = cfg or BoundConfig()
        self.seed = seed
        self.grid = C if C.is_finite else C.to_grid(self.cfg.grid_size)
        errors = np.asarray(problem.true_errors(self.grid), dtype=float)
        self.errors = errors
        self.excess = errors - errors.min()
        self._pool: Optional[MonteCarloPool] = None
        self._phi: Dict[Tuple[int, int], Tuple[float, float]] = {}
        self._level: Dict[int, Tuple[float, float]] = {}
        self._bounds: Dict[int, float] = {}

    # Level sets C(eps) = {h : er(h) - nu <= eps}

    def _mask(self, eps: float) -> np.ndarray:
        return self.excess <= eps + 1e-12

    def _level_stats(self, eps: float) -> Tuple[float, float]:
        """(P(DIS(C(eps))), diam(eps; C)), memoized by the level set's size."""
        mask = self._mask(eps)
        key = int(mask.sum())
        if key not in self._level:
            V = GridVersionSpace(self.grid, mask)
            marginal = self.problem.marginal
            region = V.disagreement_region()
            if region.exact_mass(marginal) is None and self._pool is None:
                self._pool = MonteCarloPool(marginal, seed=self.seed)
            mass = region_mass(region, marginal, pool=self._pool).value
            self._level[key] = (mass, V.diameter(marginal))
        return self._level[key]

    def dis_mass(self, eps: float) -> float:
        return self._level_stats(eps)[0]

    def diameter(self, eps: float) -> float:
        return self._level_stats(eps)[1]

    # Localized deviation

    def phi(self, m: int, eps: float) -> Tuple[float, float]:
        """phi_C(m, eps) with its standard error."""
        if m < 1:
            raise ValidationError("phi needs m >= 1")
        mask = self._mask(eps)
        key = (m, int(mask.sum()))
        if key in self._phi:
            return self._phi[key]

        members = np.flatnonzero(mask)
        if members.size <= 1:
            self._phi[key] = (0.0, 0.0)
            return self._phi[key]

        rng = np.random.default_rng(self.seed + m)
        sub = HypothesisClass.finite([self.grid.members[i] for i in members])
        true = self.errors[members]
        sups = np.empty(self.cfg.n_outer)
        for t in range(self.cfg.n_outer):
            x, y = self.problem.sample(rng, m)
            empirical = np.mean(sub.prediction_matrix(x) != y[None, :], axis=1)
            deviation = true - empirical
            sups[t] = deviation.max() - deviation.min()
        stderr = float(sups.std(ddof=1) / math.sqrt(sups.size)) if sups.size > 1 else 0.0
        self._phi[key] = (float(sups.mean()), stderr)
        return self._phi[key]

    def u_tilde(self, m: int, eps: float) -> float:
        """U-tilde_C(m, eps, delta)."""
        e = self.cfg.c_tilde * eps
        s = s_m(m, self.delta)
        return self.cfg.k_tilde * (self.phi(m, e)[0] + math.sqrt(s * self.diameter(e) / m) + s / m)

    # Fixed point

    def scan(self, m: int) -> BoundScan:
        if m <= 0:
            return BoundScan(INFINITY)
        j_c = math.ceil(-math.log2(self.cfg.c_tilde))
        u_top = self.u_tilde(m, 2.0 ** j_c)
        if u_top > 2.0 ** (j_c - 4):
            j_pass = math.ceil(4.0 + math.log2(u_top))
            if j_pass > 0:
                return BoundScan(1.0, witness_j=0)
            return BoundScan(2.0 ** j_pass, witness_j=j_pass - 1)
        for j in range(j_c - 1, self.cfg.j_floor - 1, -1):
            if self.u_tilde(m, 2.0 ** j) > 2.0 ** (j - 4):
                return BoundScan(2.0 ** (j + 1), witness_j=j)
        return BoundScan(2.0 ** self.cfg.j_floor, floor_hit=True)

    def tilde_bound(self, m: int) -> float:
        """Memoized on a geometric grid of m, using the grid point at or below m."""
        if m <= 0:
            return INFINITY
        anchor = 2 ** int(math.floor(math.log2(m)))
        if anchor not in self._bounds:
            self._bounds[anchor] = self.scan(anchor).value
            logger.debug(f"tilde bound at m={anchor}: {self._bounds[anchor]:g}")
        return self._bounds[anchor]

    # r_0

    def tilde_m(self, n: int) -> int:
        """Smallest m with n <= log2(4 m^2 / delta) + 2e sum_{l<m} P(DIS(C(6 tilde_bound(l))))."""
        if n < 0:
            raise ValidationError("n must be nonnegative")
        total = 0.0
        m = 0
        while True:
            total += self.dis_mass(6.0 * self.tilde_bound(m))
            m += 1
            if n <= math.log2(4.0 * m * m / self.delta) + 2.0 * math.e * total:
                return m

    def r_C(self, n: int) -> float:
        """max{average of diam(6 tilde_bound(l); C) over l < m-tilde, 2^-n}."""
        m = self.tilde_m(n)
        average = sum(self.diameter(6.0 * self.tilde_bound(l)) for l in range(m)) / m
        return max(average, 2.0 ** -n)


def tilde_phi(m: int, eps: float, problem, C: HypothesisClass,
              cfg: Optional[BoundConfig] = None, seed: int = 0) -> Tuple[float, float]:
    return DistributionBound(problem, C, 0.5, cfg, seed).phi(m, eps)


def tilde_U(m: int, eps: float, delta: float, problem, C: HypothesisClass,
            cfg: Optional[BoundConfig] = None, seed: int = 0) -> float:
    return DistributionBound(problem, C, delta, cfg, seed).u_tilde(m, eps)


def tilde_bound(m: int, delta: float, problem, C: HypothesisClass,
                cfg: Optional[BoundConfig] = None, seed: int = 0) -> float:
    if m <= 0:
        return INFINITY
    return DistributionBound(problem, C, delta, cfg, seed).scan(m).value


def tilde_m(n: int, delta: float, problem, C: HypothesisClass,
            cfg: Optional[BoundConfig] = None, seed: int = 0) -> int:
    return DistributionBound(problem, C, delta, cfg, seed).tilde_m(n)


def r_C(n: int, delta: float, problem, C: HypothesisClass,
        cfg: Optional[BoundConfig] = None, seed: int = 0) -> float:
    return DistributionBound(problem, C, delta, cfg, seed).r_C(n)
