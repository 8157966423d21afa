"""Data-dependent localized bound: U-hat and its dyadic fixed point.

For a candidate eps, every dyadic level 2^j >= eps must pass
min over prefixes m of U-hat(2^j; L^(m), S^(m)) <= 2^(j-4). The scan
reports the smallest passing dyadic value, 1 when even eps = 1 fails,
or +inf for an empty S.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import IndexedLabel
from ..hypothesis_spaces import DEFAULT_GRID_SIZE, HypothesisClass
from .rademacher import LocalizedLabelings, RademacherDraw

logger = logging.getLogger(__name__)

INFINITY = math.inf
PREFIX_POLICIES = ("geometric", "full")


@dataclass(frozen=True)
class BoundConfig:
    """Constants of the localized bounds; defaults are the published values."""

    # Empirical bound
    k_hat: float = 752.0
    c_hat: float = 1.5

    # Distribution-dependent bound
    k_tilde: float = 8272.0
    c_tilde: float = 3.0

    # Fixed-point scan
    j_min: float = 2.0 ** -30
    prefix_policy: str = "geometric"

    # Randomness and diagnostics
    rademacher_seed: int = 0
    n_outer: int = 50
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self) -> None:
        if min(self.k_hat, self.c_hat, self.k_tilde, self.c_tilde, self.j_min) <= 0:
            raise ValidationError("bound constants must be strictly positive")
        if self.c_hat <= 1.0:
            raise ValidationError(f"c_hat must exceed 1, got {self.c_hat}")
        if self.j_min >= 1.0:
            raise ValidationError(f"dyadic floor must be below 1, got {self.j_min}")
        if self.prefix_policy not in PREFIX_POLICIES:
            raise ValidationError(f"prefix_policy must be one of {PREFIX_POLICIES}")
        if self.n_outer < 1:
            raise ValidationError("n_outer must be at least 1")

    @property
    def j_floor(self) -> int:
        return math.floor(math.log2(self.j_min))

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> BoundConfig:
        data = dict(data or {})
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown bound settings: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BoundScan:
    """Fixed-point scan outcome; witness_j is the highest failing level, if any."""

    value: float
    floor_hit: bool = False
    witness_j: Optional[int] = None


def s_m(m: int, delta: float) -> float:
    """s_m(delta) = ln(20 m^2 log2(3m) / delta)."""
    if m < 1 or not 0.0 < delta < 1.0:
        raise ValidationError(f"s_m needs m >= 1 and delta in (0, 1), got m={m}, delta={delta}")
    return math.log(20.0 * m * m * math.log2(3.0 * m) / delta)


def prefix_sizes(s_size: int, policy: str = "geometric") -> List[int]:
    """Prefix lengths of S over which U-hat is minimized."""
    if s_size <= 0:
        return []
    if policy == "full":
        return list(range(1, s_size + 1))
    sizes = {s_size}
    k = 1
    while 2 ** k <= 2 * s_size:
        sizes.add(math.ceil(s_size / 2 ** k))
        k += 1
    return sorted(sizes)


class _Prefix:
    """L^(m), S^(m) and their labelings for one prefix length."""

    def __init__(self, size: int, local: Optional[LocalizedLabelings], s_term: float):
        self.size = size
        self.local = local
        self.s_term = s_term

    def u_hat(self, eps: float, cfg: BoundConfig) -> float:
        e = cfg.c_hat * eps
        if self.local is None:
            # only shared-label points: C-hat cannot disagree on this prefix
            return cfg.k_hat * self.s_term / self.size
        spread = math.sqrt(self.s_term * self.local.disagreement(e) / self.size)
        return cfg.k_hat * (self.local.phi(e) + spread + self.s_term / self.size)


class HatBound:
    """Evaluates U-hat and its fixed point for one (S, delta, L, C).

    `padding` holds indices that belong to both L and S but whose label
    every member of C[L] already agrees on. They count toward |S| and the
    prefix cut points without entering the labeling tables.
    """

    def __init__(self, S: Iterable[IndexedLabel], delta: float, L: Iterable[IndexedLabel],
                 C: HypothesisClass, stream: Any, draw: RademacherDraw,
                 cfg: Optional[BoundConfig] = None, padding: Optional[Sequence[int]] = None):
        self.cfg = cfg or BoundConfig()
        self.delta = delta
        self.C = C
        S_sorted = sorted(S, key=lambda p: p.index)
        L_sorted = sorted(L, key=lambda p: p.index)
        pad = np.asarray(padding if padding is not None else [], dtype=int)
        all_indices = np.sort(np.concatenate([[p.index for p in S_sorted], pad]).astype(int))
        self.s_size = int(all_indices.size)
        self.prefixes: List[_Prefix] = []
        for size in prefix_sizes(self.s_size, self.cfg.prefix_policy):
            top = all_indices[size - 1]
            prefix_s = [p for p in S_sorted if p.index <= top]
            prefix_l = [p for p in L_sorted if p.index <= top]
            local = None
            if prefix_s:
                local = LocalizedLabelings(C, prefix_l, prefix_s, stream, draw,
                                           grid_size=self.cfg.grid_size, s_size=size)
            self.prefixes.append(_Prefix(size, local, s_m(size, delta)))

    def u_hat(self, eps: float) -> float:
        """min over prefixes of U-hat(eps, delta; L^(m), S^(m))."""
        if not self.prefixes:
            return INFINITY
        return min(p.u_hat(eps, self.cfg) for p in self.prefixes)

    def saturation_level(self) -> int:
        """Smallest j with c_hat 2^j >= 1; above it C-hat is all of C[L]."""
        return math.ceil(-math.log2(self.cfg.c_hat))

    def scan(self) -> BoundScan:
        if not self.prefixes:
            return BoundScan(INFINITY)
        j_c = self.saturation_level()
        u_top = self.u_hat(2.0 ** j_c)
        if u_top > 2.0 ** (j_c - 4):
            # every level from j_c up to 3 + log2(u_top) fails; the scan starts at 1
            j_pass = math.ceil(4.0 + math.log2(u_top))
            if j_pass > 0:
                return BoundScan(1.0, witness_j=0)
            return BoundScan(2.0 ** j_pass, witness_j=j_pass - 1)

        for j in range(j_c - 1, self.cfg.j_floor - 1, -1):
            if self.u_hat(2.0 ** j) > 2.0 ** (j - 4):
                return BoundScan(2.0 ** (j + 1), witness_j=j)
        logger.warning(f"Localized bound reached the dyadic floor {self.cfg.j_min:g}")
        return BoundScan(2.0 ** self.cfg.j_floor, floor_hit=True)

    def passes(self, j: int) -> bool:
        return self.u_hat(2.0 ** j) <= 2.0 ** (j - 4)


def hat_U(eps: float, delta: float, L: Iterable[IndexedLabel], S: Sequence[IndexedLabel],
          C: HypothesisClass, stream: Any, draw: RademacherDraw,
          cfg: Optional[BoundConfig] = None) -> float:
    """U-hat_C(eps, delta; L, S) on the full sets, without the prefix minimum."""
    cfg = cfg or BoundConfig()
    S = list(S)
    if not S:
        return INFINITY
    local = LocalizedLabelings(C, L, S, stream, draw, grid_size=cfg.grid_size)
    return _Prefix(len(S), local, s_m(len(S), delta)).u_hat(eps, cfg)


def hat_bound_scan(S: Iterable[IndexedLabel], delta: float, L: Iterable[IndexedLabel],
                   C: HypothesisClass, stream: Any, draw: RademacherDraw,
                   cfg: Optional[BoundConfig] = None,
                   padding: Optional[Sequence[int]] = None) -> BoundScan:
    return HatBound(S, delta, L, C, stream, draw, cfg, padding).scan()


def hat_bound(S: Iterable[IndexedLabel], delta: float, L: Iterable[IndexedLabel],
              C: HypothesisClass, stream: Any, draw: RademacherDraw,
              cfg: Optional[BoundConfig] = None,
              padding: Optional[Sequence[int]] = None) -> float:
    """Dyadic fixed point of U-hat; +inf when S is empty."""
    return hat_bound_scan(S, delta, L, C, stream, draw, cfg, padding).value


def hat_bound_lower(s_size: int, delta: float, cfg: Optional[BoundConfig] = None) -> float:
    """Value hat_bound cannot go below, from the s_m/m term alone."""
    cfg = cfg or BoundConfig()
    if s_size <= 0:
        return INFINITY
    floor_term = min(cfg.k_hat * s_m(m, delta) / m for m in prefix_sizes(s_size, cfg.prefix_policy))
    return min(max(2.0 ** math.ceil(4.0 + math.log2(floor_term)), 2.0 ** cfg.j_floor), 1.0)
