"""Experiment runner, rate fits, trace replay and the acceptance suite."""

import math
from dataclasses import replace

import numpy as np
import pytest

from active_rates.algorithms import (
    A2Learner,
    CALLearner,
    ModelSelectLearner,
    RunTrace,
    cal,
    dhm,
)
from active_rates.core.exceptions import (
    ConfigurationError,
    RateFitError,
    ReplayError,
    ValidationError,
)
from active_rates.core.models import LearningCurve, TrialRecord
from active_rates.harness import (
    ACCEPTANCE_SUITE,
    Criterion,
    PredictedRate,
    create_learner,
    fit_curves,
    fit_points,
    fit_rate,
    hand_cal_trace,
    learner_from_header,
    learner_label,
    matches_prediction,
    predicted_rate,
    replay,
    run_acceptance,
    run_experiment,
    run_trial,
    stream_from_header,
)
from active_rates.harness import runner
from active_rates.noise_problems import LabeledStream
from active_rates.utils.helpers import derive_trial_seed


def power_curve(exponent, budgets=(16, 64, 256, 1024), trials=5, label="passive"):
    """Curve whose trial errors scatter by a few percent around n^exponent."""
    curve = LearningCurve(label, "synthetic", 2.0)
    for n in budgets:
        for t in range(trials):
            wobble = 1.0 + 0.02 * (t - trials // 2)
            curve.add(TrialRecord(label, n, t, t, n ** exponent * wobble))
    return curve


class TestRunner:

    def test_labels(self):
        assert learner_label({"kind": "dhm"}) == "dhm-eq4"
        assert learner_label({"kind": "dhm", "threshold_kind": "eq2"}) == "dhm-eq2"
        assert learner_label({"kind": "cal", "name": "cal-wide"}) == "cal-wide"
        assert learner_label({"kind": "passive"}) == "passive"

    def test_create_learner(self, fast_config):
        assert isinstance(create_learner({"kind": "a2", "mass_mode": "exact"}, fast_config), A2Learner)
        assert isinstance(create_learner({"kind": "cal"}, fast_config), CALLearner)
        with pytest.raises(ConfigurationError):
            create_learner({"kind": "qbc"}, fast_config)

    def test_model_select_needs_a_structure(self, fast_config):
        with pytest.raises(ConfigurationError):
            create_learner({"kind": "model_select"}, fast_config)
        cfg = replace(fast_config, structure=[{"kind": "threshold"}, {"kind": "interval"}])
        assert isinstance(create_learner({"kind": "model_select"}, cfg), ModelSelectLearner)

    def test_trial_seeds(self):
        assert derive_trial_seed(1, 10, 0) == derive_trial_seed(1, 10, 0)
        assert derive_trial_seed(1, 10, 0) != derive_trial_seed(1, 10, 1)
        assert derive_trial_seed(1, 10, 0) != derive_trial_seed(2, 10, 0)
        assert derive_trial_seed(1, 10, 0) >= 0

    def test_run_trial(self, thresholds, noiseless):
        record, trace = run_trial(CALLearner(thresholds), "cal", noiseless, 10, 0, 123)
        assert record.n == 10 and record.seed == 123
        assert record.succeeded
        assert 0.0 <= record.excess_error < 0.5
        assert trace.result["labels_used"] == record.labels_used == 10

    def test_experiment_fills_every_cell(self, fast_config):
        result = run_experiment(fast_config)
        assert set(result.curves) == {"cal", "passive"}
        for curve in result.curves.values():
            assert curve.is_complete(fast_config.budgets, fast_config.trials)
            assert not curve.failures()
            assert all(r.labels_used <= r.n for r in curve.records)
        assert result.trace_paths == []

    def test_algorithms_share_streams(self, fast_config):
        result = run_experiment(fast_config)
        cal_seeds = [(r.n, r.trial, r.seed) for r in result.curves["cal"].sorted_records()]
        passive_seeds = [(r.n, r.trial, r.seed) for r in result.curves["passive"].sorted_records()]
        assert cal_seeds == passive_seeds

    def test_experiment_is_reproducible(self, fast_config):
        first = run_experiment(fast_config)
        second = run_experiment(fast_config)
        for label in first.curves:
            a = [r.excess_error for r in first.curves[label].sorted_records()]
            b = [r.excess_error for r in second.curves[label].sorted_records()]
            assert a == b

    def test_traces_are_written_and_replay(self, fast_config, tmp_path):
        cfg = replace(fast_config, write_traces=True, budgets=[5], trials=2)
        result = run_experiment(cfg)
        names = sorted(p.name for p in result.trace_paths)
        assert names == ["cal_n5_t0.jsonl", "cal_n5_t1.jsonl",
                         "passive_n5_t0.jsonl", "passive_n5_t1.jsonl"]
        assert all(p.parent == tmp_path / "out" / "traces" for p in result.trace_paths)
        assert replay(result.trace_paths[0]).matched

    def test_raising_trials_become_failure_records(self, fast_config, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("worker died")

        monkeypatch.setattr(runner, "run_trial", boom)
        result = run_experiment(replace(fast_config, budgets=[5], trials=2))
        assert len(result.failures) == 4
        assert all(r.failure == "error: worker died" for r in result.failures)
        assert all(math.isnan(r.excess_error) for r in result.failures)

    def test_duplicate_labels(self, fast_config):
        with pytest.raises(ConfigurationError):
            run_experiment(replace(fast_config, algorithms=[{"kind": "cal"}, {"kind": "cal"}]))


class TestFitting:

    def test_exact_power_law(self):
        slope, _, r2 = fit_points([10, 100, 1000], [0.1, 0.01, 0.001])
        assert slope == pytest.approx(-1.0)
        assert r2 == pytest.approx(1.0)

    def test_exact_exponential(self):
        budgets = [10, 20, 30, 40]
        slope, _, r2 = fit_points(budgets, np.exp(-0.1 * np.array(budgets)), "exponential")
        assert slope == pytest.approx(-0.1)
        assert r2 == pytest.approx(1.0)

    def test_degenerate_inputs(self):
        with pytest.raises(RateFitError):
            fit_points([10], [0.1])
        with pytest.raises(RateFitError):
            fit_points([10, 10], [0.1, 0.2])
        with pytest.raises(ValidationError):
            fit_points([10, 20], [0.1, 0.2], "logistic")

    def test_fit_rate_recovers_the_slope(self):
        fit = fit_rate(power_curve(-0.5))
        assert fit.slope == pytest.approx(-0.5, abs=1e-6)
        assert fit.n_points == 4
        assert fit.fit_range == (16, 1024)
        lo, hi = fit.slope_interval
        assert lo <= fit.slope <= hi
        assert not fit.excludes(-0.5)
        assert fit.excludes(-2.0 / 3.0)

    def test_budgets_at_the_floor_are_excluded(self):
        curve = power_curve(-0.5)
        for t in range(5):
            curve.add(TrialRecord("passive", 4096, t, t, 0.0))
        fit = fit_rate(curve)
        assert fit.excluded == (4096,)
        assert fit.n_points == 4

    def test_too_few_points(self):
        with pytest.raises(RateFitError):
            fit_rate(power_curve(-0.5, budgets=(16, 64)))

    def test_fit_curves_tolerates_short_curves(self):
        fits = fit_curves({"passive": power_curve(-0.5),
                           "cal": power_curve(-1.0, budgets=(8, 16), label="cal")})
        assert fits["passive"] is not None
        assert fits["cal"] is None

    def test_predicted_rates(self):
        assert predicted_rate("passive", 2.0).exponent == pytest.approx(-2.0 / 3.0)
        assert predicted_rate("passive", None, realizable=True).exponent == -1.0
        assert predicted_rate("passive", None) is None
        assert predicted_rate("dhm-eq4", 2.0).exponent == pytest.approx(-1.0)
        assert predicted_rate("model_select", 3.0).exponent == pytest.approx(-0.75)
        assert predicted_rate("a2", 1.0).model == "exponential"
        assert predicted_rate("cal", 2.0) is None
        assert predicted_rate("cal", None, realizable=True).model == "exponential"

    def test_matches_prediction(self):
        fit = fit_rate(power_curve(-0.7))
        assert matches_prediction(fit, PredictedRate("power-law", -2.0 / 3.0))
        assert not matches_prediction(fit, PredictedRate("power-law", -1.0))
        assert not matches_prediction(fit, PredictedRate("exponential"))
        assert matches_prediction(None, PredictedRate("exponential")) is None
        assert PredictedRate("power-law", -0.5).describe() == "n^-0.500"


class TestReplay:

    def test_fixed_stream_trace(self, three_thresholds, cal_stream):
        trace = cal(three_thresholds, cal_stream, 10).trace
        outcome = replay(RunTrace.loads(trace.dumps()))
        assert outcome.matched
        assert outcome.lines == len(trace.to_lines())

    def test_problem_stream_trace(self, tmp_path, thresholds, noiseless):
        trace = dhm(thresholds, LabeledStream(noiseless, 3, 6), 6).trace
        path = trace.save(tmp_path / "dhm.jsonl")
        assert replay(path).matched

    def test_tampered_trace_reports_the_line(self, three_thresholds, cal_stream):
        trace = cal(three_thresholds, cal_stream, 10).trace
        trace.steps[0].index = 2
        outcome = replay(trace)
        assert not outcome.matched
        line, recorded, replayed = outcome.difference
        assert line == 2
        assert '"index":2' in recorded and '"index":1' in replayed

    def test_bad_headers(self):
        with pytest.raises(ReplayError):
            learner_from_header("qbc", {"grid_size": 8, "unlabeled_cap": 8, "class": {"kind": "threshold"}})
        with pytest.raises(ReplayError):
            learner_from_header("cal", {"grid_size": 8})
        with pytest.raises(ReplayError):
            stream_from_header({"budget": 3})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ReplayError):
            replay(tmp_path / "absent.jsonl")


class TestAcceptance:

    def test_hand_trace(self):
        trace = hand_cal_trace()
        assert trace.queried_indices() == [1, 3]
        assert trace.result["hypothesis"]["params"] == [0.5]

    def test_cheap_criteria_pass(self, fast_config):
        seen = []
        outcomes = run_acceptance([10, 9], "quick", fast_config, on_result=seen.append)
        assert [o.criterion for o in outcomes] == [9, 10]
        assert all(o.passed for o in outcomes), [o.details for o in outcomes]
        assert seen == outcomes
        assert outcomes[0].status == "PASS"

    def test_raising_criterion_fails(self, fast_config, monkeypatch):
        def broken(cfg, full):
            raise RuntimeError("no data")

        monkeypatch.setitem(ACCEPTANCE_SUITE, 9, Criterion(9, "broken", broken))
        (outcome,) = run_acceptance([9], cfg=fast_config)
        assert not outcome.passed
        assert outcome.details == {"error": "no data"}

    def test_invalid_selection(self):
        with pytest.raises(ValidationError):
            run_acceptance([42])
        with pytest.raises(ValidationError):
            run_acceptance([9], scale="medium")
