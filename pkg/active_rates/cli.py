#!/usr/bin/env python3
"""Command-line interface for Active Rates."""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from pathlib import Path
from typing import Any, List, Optional, Sequence

from active_rates import __version__
from active_rates.core.config import ExperimentConfig, load_config
from active_rates.core.exceptions import ActiveRatesError, UnsupportedError
from active_rates.core.models import LearningCurve, RateFit
from active_rates.utils.helpers import format_duration, setup_logging

logger = logging.getLogger(__name__)


# Lazy imports for performance
def lazy_import_rich():
    """Lazy import rich for CLI interface."""
    try:
        from rich.console import Console
        from rich.panel import Panel
        from rich.table import Table
        from rich import box
        return True, [Console(), Panel, Table, box]
    except ImportError:
        return False, []


def lazy_import_tqdm():
    """Lazy import tqdm for progress bars."""
    try:
        from tqdm import tqdm
        return True, tqdm
    except ImportError:
        return False, None


class ActiveRatesCLI:
    """Subcommand handlers with rich output when available and plain text otherwise."""

    def __init__(self, config: ExperimentConfig, quiet: bool = False):
        self.config = config
        self.quiet = quiet

        self.rich_available, components = lazy_import_rich()
        if self.rich_available:
            self.console, self.Panel, self.Table, self.box = components
        self.tqdm_available, self.tqdm = lazy_import_tqdm()

    # Output helpers

    def say(self, message: str, style: str = "") -> None:
        if self.quiet:
            return
        if self.rich_available:
            self.console.print(f"[{style}]{message}[/{style}]" if style else message)
        else:
            print(message)

    def show_error(self, message: str) -> None:
        if self.rich_available:
            self.console.print(f"[bold red]Error:[/bold red] {message}")
        else:
            print(f"Error: {message}", file=sys.stderr)

    def show_table(self, title: str, columns: Sequence[str], rows: List[Sequence[Any]]) -> None:
        if self.quiet:
            return
        if self.rich_available:
            table = self.Table(title=title, box=self.box.ROUNDED)
            for column in columns:
                table.add_column(column)
            for row in rows:
                table.add_row(*(str(v) for v in row))
            self.console.print(table)
        else:
            print(f"\n{title}")
            print(" | ".join(columns))
            print("-" * 60)
            for row in rows:
                print(" | ".join(str(v) for v in row))

    # Subcommands

    def run(self) -> int:
        from active_rates.harness import fit_curves, run_experiment
        from active_rates.reports import emit_report

        cfg = self.config
        total = len(cfg.algorithms) * len(cfg.budgets) * cfg.trials
        self.say(f"Running {cfg.name}: {total} trials", "bold blue")

        progress = None
        if self.tqdm_available and not self.quiet:
            progress = self.tqdm(total=total, desc="trials")

        def advance(_result: Any) -> None:
            if progress is not None:
                progress.update(1)

        try:
            result = run_experiment(cfg, on_trial=advance)
        finally:
            if progress is not None:
                progress.close()

        realizable = cfg.problem.get("kind") == "noiseless"
        fits = fit_curves(result.curves, realizable)
        paths = emit_report(result.curves.values(), fits, cfg)
        self.show_fits(result.curves.values(), fits)

        failures = result.failures
        if failures:
            self.say(f"{len(failures)} trials ended in a failure state", "yellow")
        self.say(f"Done in {format_duration(result.elapsed)}; wrote "
                 + ", ".join(str(p) for p in paths), "green")
        return 0

    def show_fits(self, curves: Sequence[LearningCurve], fits: dict) -> None:
        rows = []
        for curve in curves:
            fit: Optional[RateFit] = fits.get(curve.algorithm)
            medians = ", ".join(f"{curve.median(n):.3g}" for n in curve.budgets)
            rows.append((curve.algorithm, fit.model if fit else "-",
                         f"{fit.slope:.4f}" if fit else "-",
                         f"{fit.r_squared:.3f}" if fit else "-", medians))
        self.show_table("Learning curves", ("algorithm", "model", "slope", "R^2", "medians"), rows)

    def theta(self, args: argparse.Namespace) -> int:
        from active_rates.disagreement import theta_analytic, theta_estimate
        from active_rates.hypothesis_spaces import Hypothesis, HypothesisClass, marginal_from_spec

        if args.class_kind == "threshold":
            C, h = HypothesisClass.thresholds(), Hypothesis.threshold(*args.h)
            marginal = marginal_from_spec("uniform")
        elif args.class_kind == "interval":
            C, h = HypothesisClass.intervals(), Hypothesis.interval(*args.h)
            marginal = marginal_from_spec("uniform")
        else:
            C, h = HypothesisClass.halfspaces(len(args.h)), Hypothesis.halfspace(args.h)
            marginal = marginal_from_spec({"kind": "sphere", "d": len(args.h)})

        try:
            analytic: Any = theta_analytic(args.class_kind, h, marginal)
        except UnsupportedError:
            analytic = "-"

        kwargs = {"r0": args.r0} if args.r0 is not None else {}
        estimate = theta_estimate(C, h, marginal, mc_budget=args.samples, seed=args.seed,
                                  grid_size=self.config.grid_size, **kwargs)
        self.show_table(f"theta of {h.describe()} in {C.name}",
                        ("analytic", "estimate", "stderr", "argmax r", "mode"),
                        [(analytic, f"{estimate.value:.6g}", f"{estimate.stderr:.2g}",
                          f"{estimate.argmax_r:.3g}", estimate.mode.value)])
        return 0

    def check(self, args: argparse.Namespace) -> int:
        from active_rates.harness import run_acceptance

        def report(outcome: Any) -> None:
            style = "green" if outcome.passed else "red"
            self.say(f"{outcome.criterion}. {outcome.name}: {outcome.status} "
                     f"({format_duration(outcome.elapsed)})", style)
            if not outcome.passed or logger.isEnabledFor(logging.DEBUG):
                self.say(f"   {outcome.details}", "dim")

        outcomes = run_acceptance(args.criteria or None, args.scale, self.config, on_result=report)
        passed = sum(o.passed for o in outcomes)
        self.say(f"{passed}/{len(outcomes)} criteria passed", "bold")
        return 0 if passed == len(outcomes) else 1

    def replay(self, args: argparse.Namespace) -> int:
        from active_rates.harness import replay

        outcome = replay(args.trace)
        if outcome.matched:
            self.say(f"{args.trace}: {outcome.lines} lines reproduced exactly", "green")
            return 0
        line, recorded, replayed = outcome.difference
        self.show_error(f"{args.trace} diverges at line {line}")
        self.say(f"  recorded: {recorded}\n  replayed: {replayed}")
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="active-rates",
        description="Disagreement-based active learning experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  active-rates --config configs/example.yaml run
  active-rates theta --class interval --h 0.4 0.6
  active-rates check 1 9 10 --scale quick
  active-rates replay output/traces/cal_n10_t0.jsonl
        """,
    )
    parser.add_argument("--config", metavar="CONFIG_FILE", help="YAML experiment configuration")
    parser.add_argument("--output", "-o", metavar="DIR", help="Override the output directory")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--quiet", action="store_true", help="Only errors")
    parser.add_argument("--version", action="version", version=f"active-rates {__version__}")

    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="Run the configured experiment and write the report")
    run.add_argument("config_path", nargs="?", help="Configuration file (same as --config)")

    theta = sub.add_parser("theta", help="Disagreement coefficient of one hypothesis")
    theta.add_argument("--class", dest="class_kind", choices=("threshold", "interval", "halfspace"),
                       default="threshold")
    theta.add_argument("--h", type=float, nargs="+", default=[0.5],
                       help="z, (a, b) or the halfspace normal")
    theta.add_argument("--r0", type=float, default=None, help="Smallest radius excluded")
    theta.add_argument("--samples", type=int, default=None,
                       help="Monte Carlo pool size; exact masses when omitted")
    theta.add_argument("--seed", type=int, default=0)

    check = sub.add_parser("check", help="Run acceptance criteria")
    check.add_argument("criteria", type=int, nargs="*", help="Criterion numbers (all by default)")
    check.add_argument("--scale", choices=("quick", "full"), default="quick")

    replay = sub.add_parser("replay", help="Re-run a saved trace and compare it")
    replay.add_argument("trace", help="Trace file (JSON lines)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 0

    try:
        config = load_config(getattr(args, "config_path", None) or args.config)
        if args.output:
            config.output_dir = str(Path(args.output).expanduser())
        level = "DEBUG" if args.verbose else ("ERROR" if args.quiet else config.log_level)
        setup_logging(level, config.log_file, config.enable_console_logging)

        cli = ActiveRatesCLI(config, quiet=args.quiet)
        if args.command == "run":
            return cli.run()
        if args.command == "theta":
            return cli.theta(args)
        if args.command == "check":
            return cli.check(args)
        return cli.replay(args)

    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130

    except ActiveRatesError as e:
        print(f"Error: {e}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return 1

    except Exception as e:
        print(f"Fatal error: {e}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
