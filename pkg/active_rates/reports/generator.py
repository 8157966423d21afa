"""CSV and summary reports of an experiment."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

try:
    from jinja2 import Environment, FileSystemLoader
    JINJA2_AVAILABLE = True
except ImportError:
    JINJA2_AVAILABLE = False

from ..core.config import ExperimentConfig
from ..core.exceptions import ReportError
from ..core.models import LearningCurve, RateFit
from ..harness.acceptance import CriterionOutcome
from ..harness.fitting import matches_prediction, predicted_rate

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("algorithm", "n", "trial", "excess_error", "labels_used", "unlabeled_used", "seed")
CSV_NAME = "learning_curves.csv"
SUMMARY_NAME = "summary.md"


class ReportGenerator:
    """Writes the per-trial CSV and a Markdown summary of fits against predicted rates."""

    def __init__(self, config: Optional[ExperimentConfig] = None):
        self.config = config or ExperimentConfig()
        self.template_dir = Path(__file__).parent / "templates"

        # Jinja2 when available, plain text otherwise
        if JINJA2_AVAILABLE:
            self.jinja_env = Environment(
                loader=FileSystemLoader(str(self.template_dir)),
                autoescape=False,
                keep_trailing_newline=True,
            )
        else:
            self.jinja_env = None

    def write_csv(self, curves: Iterable[LearningCurve], path: Path) -> Path:
        """Rows sorted by (algorithm, n, trial); header only when there are none."""
        rows = sorted((r for c in curves for r in c.records),
                      key=lambda r: (r.algorithm, r.n, r.trial))
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
                writer.writeheader()
                for record in rows:
                    writer.writerow(record.to_row())
        except OSError as e:
            raise ReportError(f"Cannot write {path}: {e}", e)
        logger.info(f"Wrote {len(rows)} trial rows to {path}")
        return path

    def summary_data(self, curves: Sequence[LearningCurve], fits: Mapping[str, Optional[RateFit]],
                     outcomes: Sequence[CriterionOutcome] = ()) -> Dict[str, Any]:
        """Template variables: one comparison row per algorithm plus curve tables."""
        tolerance = self.config.acceptance.get("passive_slope_tolerance", 0.15)
        r_squared = self.config.acceptance.get("exponential_r_squared", 0.85)
        realizable = self.config.problem.get("kind") == "noiseless"

        comparisons = []
        for curve in curves:
            fit = fits.get(curve.algorithm)
            predicted = predicted_rate(curve.algorithm, curve.kappa, realizable)
            agrees = matches_prediction(fit, predicted, tolerance, r_squared)
            comparisons.append({
                "algorithm": curve.algorithm,
                "model": fit.model if fit else "-",
                "fitted": f"{fit.slope:.4f}" if fit else "-",
                "interval": (f"[{fit.slope_interval[0]:.4f}, {fit.slope_interval[1]:.4f}]"
                             if fit else "-"),
                "r_squared": f"{fit.r_squared:.3f}" if fit else "-",
                "predicted": predicted.describe() if predicted else "-",
                "status": "-" if agrees is None else ("PASS" if agrees else "FAIL"),
                "excluded": list(fit.excluded) if fit else [],
                "failures": len(curve.failures()),
            })

        tables = [{"algorithm": c.algorithm, "rows": c.summary()} for c in curves]
        return {
            "name": self.config.name,
            "problem": self.config.problem,
            "budgets": self.config.budgets,
            "trials": self.config.trials,
            "base_seed": self.config.base_seed,
            "comparisons": comparisons,
            "tables": tables,
            "acceptance": [
                {"criterion": o.criterion, "name": o.name, "status": o.status, "scale": o.scale,
                 "elapsed": f"{o.elapsed:.1f}s"} for o in outcomes
            ],
        }

    def render_summary(self, data: Dict[str, Any]) -> str:
        if self.jinja_env:
            try:
                return self.jinja_env.get_template("summary.md.j2").render(**data)
            except Exception as e:
                logger.warning(f"Summary template failed, using plain text: {e}")
        return self._plain_summary(data)

    def _plain_summary(self, data: Dict[str, Any]) -> str:
        lines = [f"# {data['name']}", "",
                 f"Problem: {data['problem']}",
                 f"Budgets: {data['budgets']}, trials: {data['trials']}, "
                 f"base seed: {data['base_seed']}", "",
                 "algorithm | model | fitted | interval | R^2 | predicted | status"]
        for c in data["comparisons"]:
            lines.append(" | ".join(str(c[k]) for k in ("algorithm", "model", "fitted", "interval",
                                                          "r_squared", "predicted", "status")))
        if data["acceptance"]:
            lines.append("")
            for a in data["acceptance"]:
                lines.append(f"{a['criterion']}. {a['name']} ({a['scale']}): {a['status']}")
        return "\n".join(lines) + "\n"

    def generate(self, curves: Iterable[LearningCurve], fits: Mapping[str, Optional[RateFit]],
                 outcomes: Sequence[CriterionOutcome] = (),
                 output_dir: Optional[Path] = None) -> List[Path]:
        curves = list(curves)
        output_dir = Path(output_dir or self.config.output_dir)
        csv_path = self.write_csv(curves, output_dir / CSV_NAME)

        summary_path = output_dir / SUMMARY_NAME
        try:
            summary_path.write_text(self.render_summary(self.summary_data(curves, fits, outcomes)),
                                    encoding="utf-8")
        except OSError as e:
            raise ReportError(f"Cannot write {summary_path}: {e}", e)
        return [csv_path, summary_path]


def emit_report(curves: Iterable[LearningCurve], fits: Mapping[str, Optional[RateFit]],
                cfg: Optional[ExperimentConfig] = None,
                outcomes: Sequence[CriterionOutcome] = ()) -> List[Path]:
    """CSV plus summary under cfg.output_dir; returns the written paths."""
    return ReportGenerator(cfg).generate(curves, fits, outcomes)
