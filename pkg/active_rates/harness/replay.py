"""Re-run a saved trace from its header and compare it line by line."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..core.exceptions import ReplayError
from ..algorithms import (
    A2Learner,
    BaseLearner,
    CALLearner,
    DHMLearner,
    ModelSelectLearner,
    NestedStructure,
    PassiveERMLearner,
    RunTrace,
)
from ..bounds import BoundConfig
from ..hypothesis_spaces import HypothesisClass
from ..noise_problems import LabeledStream, problem_from_spec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplayOutcome:
    """Result of a replay; `difference` is (line number, recorded, replayed) of the first mismatch."""

    algorithm: str
    matched: bool
    lines: int
    difference: Optional[Tuple[int, str, str]] = None
    replayed: Optional[RunTrace] = None


def learner_from_header(algorithm: str, params: Dict[str, Any]) -> BaseLearner:
    """Learner with the parameters a trace header recorded."""
    try:
        grid_size = int(params["grid_size"])
        cap = int(params["unlabeled_cap"])
        if algorithm == ModelSelectLearner.kind:
            structure = NestedStructure.from_spec(params["structure"], grid_size=grid_size)
            return ModelSelectLearner(structure, float(params["delta"]),
                                      BoundConfig.from_dict(params["bounds"]), grid_size, cap)

        C = HypothesisClass.from_spec(params["class"])
        if algorithm == CALLearner.kind:
            return CALLearner(C, grid_size, cap)
        if algorithm == PassiveERMLearner.kind:
            return PassiveERMLearner(C, grid_size, cap)
        if algorithm == A2Learner.kind:
            return A2Learner(C, float(params["delta"]), params["mass_mode"],
                             int(params["mc_pool"]), int(params["mc_seed"]), grid_size, cap)
        if algorithm == DHMLearner.kind:
            return DHMLearner(C, float(params["delta"]), params["threshold_kind"],
                              BoundConfig.from_dict(params["bounds"]), grid_size, cap)
    except KeyError as e:
        raise ReplayError(f"trace header lacks learner setting {e}", e)
    raise ReplayError(f"unknown learner in trace: {algorithm}")


def stream_from_header(header: Dict[str, Any]) -> LabeledStream:
    budget = int(header["budget"])
    if "problem" in header:
        return LabeledStream(problem_from_spec(header["problem"]), int(header["seed"]), budget)
    if "points" in header and "labels" in header:
        return LabeledStream.from_arrays(header["points"], header["labels"], budget)
    raise ReplayError("trace header has neither a problem nor fixed points")


def replay(source: Union[str, Path, RunTrace]) -> ReplayOutcome:
    """Rebuild learner and stream from the header, rerun, and compare serializations."""
    if isinstance(source, RunTrace):
        recorded_lines = source.to_lines()
        recorded = source
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise ReplayError(f"cannot read trace {source}: {e}", e)
        recorded = RunTrace.loads(text)
        recorded_lines = [line for line in text.splitlines() if line.strip()]

    learner = learner_from_header(recorded.algorithm, recorded.header.get("learner", {}))
    stream = stream_from_header(recorded.header)
    logger.info(f"Replaying {recorded.algorithm} with budget {stream.budget}")
    replayed = learner.run(stream, stream.budget).trace
    replayed_lines = replayed.to_lines()

    for i, (old, new) in enumerate(zip(recorded_lines, replayed_lines), start=1):
        if old != new:
            logger.warning(f"Replay diverges at line {i}")
            return ReplayOutcome(recorded.algorithm, False, i, (i, old, new), replayed)

    if len(recorded_lines) != len(replayed_lines):
        i = min(len(recorded_lines), len(replayed_lines)) + 1
        old = recorded_lines[i - 1] if i <= len(recorded_lines) else ""
        new = replayed_lines[i - 1] if i <= len(replayed_lines) else ""
        return ReplayOutcome(recorded.algorithm, False, i, (i, old, new), replayed)

    return ReplayOutcome(recorded.algorithm, True, len(recorded_lines), None, replayed)
