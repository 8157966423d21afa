"""A2: prune by confidence bounds inside a frozen sampling region, resetting it as V shrinks."""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np

from ..core.exceptions import ValidationError
from ..core.models import EstimationMode, IndexedLabel
from ..bounds import confidence_interval
from ..hypothesis_spaces import (
    DEFAULT_GRID_SIZE,
    ClassKind,
    GridVersionSpace,
    Hypothesis,
    HypothesisClass,
    Marginal,
    MonteCarloPool,
    PointTable,
    Region,
    ThresholdLabelings,
    ThresholdVersionSpace,
    VersionSpace,
    region_mass,
    uniform,
)
from ..noise_problems import LabeledStream
from .base import DEFAULT_UNLABELED_CAP, BaseLearner, LearnerResult, next_in_region

logger = logging.getLogger(__name__)

DEFAULT_MC_POOL = 100_000


class _ThresholdPruner:
    """Exact V for thresholds: hypotheses are grouped by their labeling of Q."""

    def __init__(self, C: HypothesisClass):
        self.C = C
        self.V: VersionSpace = ThresholdVersionSpace(C)

    def reset(self) -> None:
        pass

    def add(self, x: np.ndarray, y: int) -> None:
        pass

    def prune(self, Q: List[IndexedLabel], stream: LabeledStream, delta_prime: float,
              d: int) -> Tuple[Hypothesis, float, float]:
        labelings = ThresholdLabelings(self.C, PointTable.build(stream, [], Q))
        lb, ub = confidence_interval(labelings.mistakes(), len(Q), delta_prime, d)
        pieces = [self.V.intersect(cell) for cell in labelings.cells()]
        live = np.array([not p.is_empty for p in pieces])

        min_ub = ub[live].min()
        keep = live & (lb <= min_ub)
        self.V = ThresholdVersionSpace(self.C, [z for p, k in zip(pieces, keep) if k for z in p.pieces])

        best = int(np.flatnonzero(keep & (ub == ub[keep].min()))[0])
        return pieces[best].representative(), float(ub[best]), float(lb[keep].min())


class _GridPruner:
    """V as a mask over a finite class, with running mistake counts on Q."""

    def __init__(self, C: HypothesisClass):
        self.C = C
        self.V = GridVersionSpace(C)
        self.mistakes = np.zeros(len(C))
        self._halfspace = C.member_kind is ClassKind.HALFSPACE

    def reset(self) -> None:
        self.mistakes = np.zeros(len(self.C))

    def add(self, x: np.ndarray, y: int) -> None:
        point = np.asarray(x, dtype=float).reshape(1, -1) if self._halfspace else np.atleast_1d(x)
        self.mistakes += self.C.prediction_matrix(point)[:, 0] != y

    def prune(self, Q: List[IndexedLabel], stream: LabeledStream, delta_prime: float,
              d: int) -> Tuple[Hypothesis, float, float]:
        lb, ub = confidence_interval(self.mistakes, len(Q), delta_prime, d)
        live = self.V.mask
        keep = live & (lb <= ub[live].min())
        self.V = GridVersionSpace(self.C, keep)

        best = int(np.flatnonzero(keep & (ub == ub[keep].min()))[0])
        return self.C.members[best], float(ub[best]), float(lb[keep].min())


class A2Learner(BaseLearner):
    """Agnostic learner maintaining V, a sampling region R and confidence scores beta_t."""

    kind = "a2"

    def __init__(self, C: HypothesisClass, delta: float = 0.05, mass_mode: Optional[str] = None,
                 mc_pool: int = DEFAULT_MC_POOL, mc_seed: int = 0,
                 grid_size: int = DEFAULT_GRID_SIZE, unlabeled_cap: int = DEFAULT_UNLABELED_CAP,
                 marginal: Optional[Marginal] = None):
        super().__init__(C, grid_size, unlabeled_cap)
        if not 0.0 < delta < 0.5:
            raise ValidationError(f"delta must be in (0, 1/2), got {delta}")
        if mass_mode not in (None, "exact", "monte-carlo"):
            raise ValidationError(f"unknown mass mode: {mass_mode}")
        self.delta = delta
        self.mass_mode = mass_mode
        self.mc_pool = mc_pool
        self.mc_seed = mc_seed
        self.marginal = marginal

    def parameters(self):
        return {**super().parameters(), "delta": self.delta, "mass_mode": self.mass_mode,
                "mc_pool": self.mc_pool, "mc_seed": self.mc_seed}

    def _pruner(self):
        if self.C.kind is ClassKind.THRESHOLD:
            return _ThresholdPruner(self.C)
        return _GridPruner(self.C.to_grid(self.grid_size))

    def _marginal(self, stream: LabeledStream) -> Marginal:
        if self.marginal is not None:
            return self.marginal
        if stream.problem is not None:
            return stream.problem.marginal
        if self.C.dim == 1:
            return uniform()
        raise ValidationError("A2 needs the marginal of a fixed stream in dimension > 1")

    def run(self, stream: LabeledStream, n: Optional[int] = None) -> LearnerResult:
        n = stream.budget if n is None else n
        trace = self.new_trace(stream, n)
        marginal = self._marginal(stream)
        mode = {"exact": EstimationMode.EXACT,
                "monte-carlo": EstimationMode.MONTE_CARLO}.get(self.mass_mode)
        pool = MonteCarloPool(marginal, self.mc_pool, self.mc_seed) \
            if mode is EstimationMode.MONTE_CARLO or self.C.dim > 1 else None

        def mass(region: Region) -> float:
            return region_mass(region, marginal, mode, pool=pool).value

        pruner = self._pruner()
        d = self.C.vc_dimension
        delta_prime = self.delta / max(n, 1)
        floor = 2.0 ** -n

        R = pruner.V.disagreement_region()
        p_r = mass(R)
        Q: List[IndexedLabel] = []
        m = 0
        best: Optional[Tuple[float, int, Hypothesis]] = None
        h_last: Optional[Hypothesis] = None
        stop = "budget"

        for t in range(1, n + 1):
            dis = pruner.V.disagreement_region()
            p_dis = mass(dis)
            if p_dis <= 0.5 * p_r:
                R, p_r, Q = dis, p_dis, []
                pruner.reset()
                trace.record(t, "reset", mass_r=p_r)
                if p_r <= floor:
                    h = h_last or pruner.V.representative()
                    trace.record(t, "early-exit", mass_r=p_r)
                    trace.finish(h.to_dict(), stream.labels_used, stream.unlabeled_used,
                                 stop="early-exit")
                    return LearnerResult(h, trace, stream.labels_used, stream.unlabeled_used,
                                         extras={"early_exit": True})

            m_next, m = next_in_region(stream, R, m, self.unlabeled_cap)
            if m_next is None:
                stop = "unlabeled-cap" if stream.length is None else "stream-end"
                if stream.length is None:
                    logger.warning(f"A2 found no point of R within {self.unlabeled_cap} points")
                trace.record(t, stop, mass_r=p_r)
                break

            x = stream.point(m_next)
            y = stream.query_label(m_next)
            Q.append(IndexedLabel(m_next, y))
            pruner.add(x, y)

            h_t, ub_t, min_lb = pruner.prune(Q, stream, delta_prime, d)
            beta_t = (ub_t - min_lb) * p_r
            h_last = h_t
            if best is None or beta_t < best[0]:
                best = (beta_t, t, h_t)
            trace.record(t, "query", m_next, y, mass_dis=p_dis, mass_r=p_r, beta=beta_t,
                         ub=ub_t, min_lb=min_lb, q_size=len(Q), version_space=pruner.V.summary())

        h = best[2] if best is not None else pruner.V.representative()
        t_hat = best[1] if best is not None else 0
        trace.finish(h.to_dict(), stream.labels_used, stream.unlabeled_used, stop=stop,
                     t_hat=t_hat)
        return LearnerResult(h, trace, stream.labels_used, stream.unlabeled_used,
                             extras={"t_hat": t_hat, "final_version_space": pruner.V})


def a2(C: HypothesisClass, stream: LabeledStream, n: Optional[int] = None, delta: float = 0.05,
       mass_mode: Optional[str] = None, **kwargs) -> LearnerResult:
    """Functional form of `A2Learner.run`."""
    return A2Learner(C, delta, mass_mode, **kwargs).run(stream, n)
