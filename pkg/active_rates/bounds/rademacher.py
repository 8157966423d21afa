"""Rademacher process and the empirical localized complexities phi-hat and D-hat."""

from __future__ import annotations

import logging
import threading
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from ..core.exceptions import EmptyVersionSpaceError, ValidationError
from ..core.models import IndexedLabel
from ..hypothesis_spaces import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    GridLabelings,
    GridVersionSpace,
    HypothesisClass,
    InducedLabelings,
    PointTable,
    ThresholdLabelings,
    ThresholdVersionSpace,
    VersionSpace,
    induced_labelings,
    stream_points,
)

logger = logging.getLogger(__name__)

SIGN_CHUNK = 1024
# Mistake counts are integers; this absorbs float round-off in eps * |S|.
COUNT_TOLERANCE = 1e-9


class RademacherDraw:
    """Independent uniform signs xi_i, one per stream index, drawn lazily from a seed."""

    def __init__(self, seed: int = 0, fixed: Optional[Sequence[int]] = None):
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._signs = np.zeros(0, dtype=np.int8)
        self._lock = threading.Lock()
        self._fixed = fixed is not None
        if fixed is not None:
            signs = np.asarray(fixed, dtype=np.int8)
            if np.any((signs != 1) & (signs != -1)):
                raise ValidationError("Rademacher signs must be -1 or +1")
            self._signs = signs

    def _materialize(self, m: int) -> None:
        with self._lock:
            while self._signs.size < m:
                if self._fixed:
                    raise ValidationError(f"no fixed sign for index {m}")
                chunk = (2 * self._rng.integers(0, 2, SIGN_CHUNK) - 1).astype(np.int8)
                self._signs = np.concatenate([self._signs, chunk])

    def signs(self, indices: Sequence[int]) -> np.ndarray:
        """xi_i for 1-based stream indices."""
        idx = np.asarray(indices, dtype=int).reshape(-1)
        if not idx.size:
            return np.zeros(0)
        if idx.min() < 1:
            raise ValidationError("stream indices start at 1")
        self._materialize(int(idx.max()))
        return self._signs[idx - 1].astype(float)


def rademacher_process(f: Callable[[np.ndarray], np.ndarray], S: Iterable[IndexedLabel],
                       stream: Any, draw: RademacherDraw) -> float:
    """R(f; S) = (1/|S|) sum over S of xi_i f(X_i)."""
    S = list(S)
    if not S:
        raise ValidationError("the Rademacher process needs a nonempty S")
    indices = [p.index for p in S]
    values = np.asarray(f(stream_points(stream, indices)), dtype=float)
    return float(np.dot(draw.signs(indices), values) / len(S))


class LocalizedLabelings:
    """Labelings of C[L] on the points of L and S, ranked by S mistakes.

    C-hat(eps; L, S) is the set of labelings within eps |S| mistakes of the
    best one; phi-hat and D-hat are sups over that set.
    """

    def __init__(self, C: HypothesisClass, L: Iterable[IndexedLabel], S: Iterable[IndexedLabel],
                 stream: Any, draw: Optional[RademacherDraw] = None,
                 grid_size: int = DEFAULT_GRID_SIZE, s_size: Optional[int] = None):
        self.C = C
        S = list(S)
        # points whose label every member of C[L] shares count in |S| only
        self.s_size = len(S) if s_size is None else int(s_size)
        self.table = PointTable.build(stream, L, S, None if draw is None else draw.signs)
        self.labelings: InducedLabelings = induced_labelings(C, self.table, grid_size)
        if not self.labelings.feasible:
            raise EmptyVersionSpaceError(f"no member of {C.name} is consistent with L")
        self.mistakes = self.labelings.mistakes()
        self.best = float(self.mistakes.min())
        self._sums: Optional[np.ndarray] = None

    def select(self, eps: float) -> np.ndarray:
        return self.mistakes <= self.best + eps * self.s_size + COUNT_TOLERANCE

    @property
    def sums(self) -> np.ndarray:
        if self._sums is None:
            self._sums = self.labelings.rademacher_sums()
        return self._sums

    def phi(self, eps: float) -> float:
        if not self.s_size:
            return 0.0
        chosen = self.sums[self.select(eps)]
        return 0.5 * float(chosen.max() - chosen.min()) / self.s_size

    def disagreement(self, eps: float) -> float:
        if not self.s_size:
            return 0.0
        value, exact = self.labelings.max_disagreement(self.select(eps))
        if not exact:
            logger.debug("Pairwise disagreement bounded rather than enumerated")
        return value / self.s_size


def hat_phi(eps: float, L: Iterable[IndexedLabel], S: Iterable[IndexedLabel],
            C: HypothesisClass, stream: Any, draw: RademacherDraw) -> float:
    """phi-hat_C(eps; L, S) = 1/2 sup over C-hat pairs of R(h1 - h2; S)."""
    return LocalizedLabelings(C, L, S, stream, draw).phi(eps)


def hat_D(eps: float, L: Iterable[IndexedLabel], S: Iterable[IndexedLabel],
          C: HypothesisClass, stream: Any) -> float:
    """D-hat_C(eps; L, S): largest empirical disagreement rate on S within C-hat."""
    return LocalizedLabelings(C, L, S, stream).disagreement(eps)


def hat_C_set(eps: float, L: Iterable[IndexedLabel], S: Iterable[IndexedLabel],
              C: HypothesisClass, stream: Any,
              grid_size: int = DEFAULT_GRID_SIZE) -> VersionSpace:
    """C-hat(eps; L, S) as a version space; exact for thresholds, a grid otherwise."""
    local = LocalizedLabelings(C, L, S, stream, grid_size=grid_size)
    chosen = local.select(eps)
    labelings = local.labelings
    if isinstance(labelings, ThresholdLabelings):
        cells = [cell for cell, keep in zip(labelings.cells(), chosen) if keep]
        return ThresholdVersionSpace(C, cells)

    if isinstance(labelings, GridLabelings):
        mask = np.zeros(len(labelings.C), dtype=bool)
        mask[labelings.members[chosen]] = True
        return GridVersionSpace(labelings.C, mask)

    grid = C.to_grid(grid_size) if C.kind is not ClassKind.FINITE else C
    logger.debug(f"Representing C-hat of {C.name} on a {len(grid)}-member grid")
    on_grid = GridLabelings(grid, local.table)
    keep = on_grid.mistakes() <= local.best + eps * local.s_size + COUNT_TOLERANCE
    mask = np.zeros(len(grid), dtype=bool)
    mask[on_grid.members[keep]] = True
    return GridVersionSpace(grid, mask)
