"""Audit trace of one learner run, serialized as JSON lines.

The first line is a header with everything needed to rebuild the run, then
one line per step, then a result line. Serialization is canonical (sorted
keys, repr floats), so equal runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..core.exceptions import ReplayError

TRACE_FORMAT = "active-rates-trace/1"


def _plain(value: Any) -> Any:
    """JSON-safe copy; numpy scalars and arrays become Python values, inf becomes a string."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


@dataclass
class TraceStep:
    step: int
    action: str
    index: Optional[int] = None
    label: Optional[int] = None
    values: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {"type": "step", "step": self.step, "action": self.action}
        if self.index is not None:
            record["index"] = int(self.index)
        if self.label is not None:
            record["label"] = int(self.label)
        if self.values:
            record["values"] = _plain(self.values)
        return record


@dataclass
class RunTrace:
    """Per-step records of a run plus its header and final result."""

    algorithm: str
    header: Dict[str, Any] = field(default_factory=dict)
    steps: List[TraceStep] = field(default_factory=list)
    result: Dict[str, Any] = field(default_factory=dict)
    enabled: bool = True

    def record(self, step: int, action: str, index: Optional[int] = None,
               label: Optional[int] = None, **values: Any) -> None:
        if self.enabled:
            self.steps.append(TraceStep(step, action, index, label, values))

    def finish(self, hypothesis: Optional[Dict[str, Any]], labels_used: int,
               unlabeled_used: int, failure: Optional[str] = None, **values: Any) -> None:
        self.result = {
            "hypothesis": hypothesis,
            "labels_used": labels_used,
            "unlabeled_used": unlabeled_used,
            "failure": failure,
            **values,
        }

    def actions(self, action: str) -> List[TraceStep]:
        return [s for s in self.steps if s.action == action]

    def queried_indices(self) -> List[int]:
        return [s.index for s in self.steps if s.action == "query"]

    # Serialization

    def to_lines(self) -> List[str]:
        records = [{"type": "header", "format": TRACE_FORMAT, "algorithm": self.algorithm,
                    **self.header}]
        records.extend(s.to_dict() for s in self.steps)
        records.append({"type": "result", **self.result})
        return [json.dumps(_plain(r), sort_keys=True, separators=(",", ":")) for r in records]

    def dumps(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def loads(cls, text: str) -> RunTrace:
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ReplayError("empty trace")
        try:
            records = [json.loads(line) for line in lines]
        except json.JSONDecodeError as e:
            raise ReplayError(f"malformed trace line: {e}", e)

        header = records[0]
        if header.get("type") != "header" or header.get("format") != TRACE_FORMAT:
            raise ReplayError("trace does not start with a supported header")
        if records[-1].get("type") != "result":
            raise ReplayError("trace has no result record")

        header = dict(header)
        header.pop("type")
        header.pop("format")
        trace = cls(header.pop("algorithm"), header)
        for r in records[1:-1]:
            trace.steps.append(TraceStep(r["step"], r["action"], r.get("index"),
                                         r.get("label"), r.get("values", {})))
        result = dict(records[-1])
        result.pop("type")
        trace.result = result
        return trace

    @classmethod
    def load(cls, path: Union[str, Path]) -> RunTrace:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ReplayError(f"cannot read trace {path}: {e}", e)
        return cls.loads(text)
