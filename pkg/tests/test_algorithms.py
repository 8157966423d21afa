"""CAL, A2, the DHM learner, model selection, passive ERM and run traces."""

import numpy as np
import pytest

from active_rates.algorithms import (
    DHMLearner,
    NestedStructure,
    RunTrace,
    TRACE_FORMAT,
    a2,
    cal,
    class_budgets,
    constrained_erm,
    dhm,
    learn_constrained,
    model_select,
    passive_erm,
)
from active_rates.bounds import BoundConfig
from active_rates.core.exceptions import ReplayError, ValidationError
from active_rates.core.models import IndexedLabel
from active_rates.hypothesis_spaces import Hypothesis, HypothesisClass, grid_above
from active_rates.noise_problems import LabeledStream

# Near-zero constants make the eq4 threshold tiny, so labels get inferred.
EAGER = BoundConfig(k_hat=1e-9, j_min=2.0 ** -20, grid_size=256)


def singleton():
    return HypothesisClass.finite([Hypothesis.threshold(0.5)], name="singleton")


class TestLearnConstrained:

    def test_only_consistent_member_wins(self, three_thresholds):
        stream = LabeledStream.from_arrays([0.3, 0.6, 0.8], [1, -1, 1], 3)
        h, mistakes = constrained_erm(three_thresholds, [IndexedLabel(1, 1)],
                                      [IndexedLabel(2, -1), IndexedLabel(3, 1)], stream)
        assert h == Hypothesis.threshold(0.25)
        assert mistakes == 1.0

    def test_unsatisfiable_constraints(self, thresholds):
        stream = LabeledStream.from_arrays([0.3, 0.8], [1, -1], 2)
        L = [IndexedLabel(1, 1), IndexedLabel(2, -1)]
        assert learn_constrained(thresholds, L, [], stream) is None

    def test_vacuous_constraints_give_the_smallest_member(self, thresholds, intervals, three_thresholds,
                                                         cal_stream):
        assert learn_constrained(thresholds, [], [], cal_stream) == Hypothesis.threshold(0.0)
        assert learn_constrained(intervals, [], [], cal_stream).params == (0.0, 2.0 ** -20)
        assert learn_constrained(three_thresholds, [], [], cal_stream) == Hypothesis.threshold(0.25)

    def test_union_takes_the_better_part(self, thresholds, intervals):
        # +1 only in the middle: no threshold fits, an interval does
        stream = LabeledStream.from_arrays([0.1, 0.5, 0.9], [-1, 1, -1], 3)
        Q = [IndexedLabel(i, y) for i, y in zip((1, 2, 3), (-1, 1, -1))]
        h, mistakes = constrained_erm(HypothesisClass.union(thresholds, intervals), [], Q, stream)
        assert mistakes == 0.0
        assert h.predict(0.5) == 1 and h.predict(0.9) == -1


class TestCAL:

    def test_hand_simulated_run(self, three_thresholds, cal_stream):
        result = cal(three_thresholds, cal_stream, 10)
        assert result.trace.queried_indices() == [1, 3]
        assert result.hypothesis == Hypothesis.threshold(0.5)
        assert result.labels_used == 2
        assert result.trace.result["stop"] == "agreement"

    def test_continuous_thresholds(self, thresholds, cal_stream):
        result = cal(thresholds, cal_stream, 10)
        # X_4 = .8 lies outside DIS once z <= .6 is known; V ends as (.45, .6]
        assert result.trace.queried_indices() == [1, 2, 3, 5]
        assert result.hypothesis == Hypothesis.threshold(grid_above(0.45))
        assert 0.45 < result.hypothesis.params[0] < 0.45 + 2.0 ** -19
        assert result.trace.result["stop"] == "stream-end"

    def test_singleton_class_needs_no_labels(self, cal_stream):
        result = cal(singleton(), cal_stream, 10)
        assert result.labels_used == 0
        assert result.hypothesis == Hypothesis.threshold(0.5)

    def test_budget_is_respected(self, thresholds, noiseless):
        for seed in range(3):
            result = cal(thresholds, LabeledStream(noiseless, seed, 7), 7)
            assert result.labels_used == 7
            assert result.succeeded

    def test_output_agrees_with_every_queried_label(self, thresholds, noiseless):
        stream = LabeledStream(noiseless, 9, 12)
        result = cal(thresholds, stream, 12)
        for step in result.trace.actions("query"):
            assert result.hypothesis.predict(stream.point(step.index)) == step.label


class TestA2:

    def test_target_never_pruned_on_noiseless_data(self, thresholds, noiseless):
        for seed in range(5):
            result = a2(thresholds, LabeledStream(noiseless, seed, 60), 60, delta=0.05)
            assert result.extras["final_version_space"].contains(Hypothesis.threshold(0.5))
            assert result.labels_used == 60

    def test_early_exit_on_an_empty_region(self, cal_stream):
        result = a2(singleton(), cal_stream, 5, delta=0.05)
        assert result.extras["early_exit"] is True
        assert result.labels_used == 0
        assert result.hypothesis == Hypothesis.threshold(0.5)
        assert len(result.trace.actions("early-exit")) == 1

    def test_monte_carlo_masses(self, thresholds, noiseless):
        result = a2(thresholds, LabeledStream(noiseless, 2, 10), 10, delta=0.05,
                    mass_mode="monte-carlo", mc_pool=2000)
        assert result.succeeded
        assert result.labels_used == 10
        assert 1 <= result.extras["t_hat"] <= 10

    def test_grid_pruner_on_a_finite_class(self, three_thresholds, noiseless):
        result = a2(three_thresholds, LabeledStream(noiseless, 3, 15), 15, delta=0.05)
        assert result.succeeded
        assert result.hypothesis in three_thresholds.members

    def test_invalid_arguments(self, thresholds, cal_stream):
        with pytest.raises(ValidationError):
            a2(thresholds, cal_stream, 5, delta=0.6)
        with pytest.raises(ValidationError):
            a2(thresholds, cal_stream, 5, mass_mode="guess")


class TestDHM:

    def test_zero_budget(self, thresholds, noiseless):
        result = dhm(thresholds, LabeledStream(noiseless, 0, 0), 0)
        assert result.hypothesis == Hypothesis.threshold(0.0)
        assert result.labels_used == 0

    def test_default_constants_query_every_point(self, thresholds, noiseless):
        result = dhm(thresholds, LabeledStream(noiseless, 1, 5), 5, delta=0.05)
        assert [p.index for p in result.Q] == [1, 2, 3, 4, 5]
        assert result.L == []
        assert result.extras["processed"] == 5

    def test_shatter_threshold_kind(self, thresholds, noiseless):
        result = dhm(thresholds, LabeledStream(noiseless, 1, 5), 5, delta=0.05,
                     threshold_kind="eq2")
        assert result.succeeded
        assert len(result.Q) == 5

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_inferred_labels_are_correct_on_noiseless_data(self, thresholds, noiseless, seed):
        stream = LabeledStream(noiseless, seed, 8)
        result = dhm(thresholds, stream, 8, delta=0.05, bound_config=EAGER)
        assert result.succeeded
        inferred = result.all_inferred()
        assert inferred, "expected some inferred labels"
        x = stream.points([p.index for p in inferred])
        np.testing.assert_array_equal([p.label for p in inferred], noiseless.bayes_label(x))

    def test_every_processed_index_is_dispatched_once(self, thresholds, noiseless):
        stream = LabeledStream(noiseless, 5, 8)
        result = dhm(thresholds, stream, 8, delta=0.05, bound_config=EAGER)
        in_L = {p.index for p in result.L}
        in_Q = {p.index for p in result.Q}
        forced = set(result.forced_indices.tolist())
        assert not in_L & in_Q and not in_L & forced and not in_Q & forced
        processed = result.extras["processed"]
        assert sorted(in_L | in_Q | forced) == list(range(1, processed + 1))
        assert result.labels_used == len(in_Q) <= 8

    def test_index_cap(self, thresholds):
        learner = DHMLearner(thresholds, unlabeled_cap=1000)
        assert learner.index_cap(3) == 8
        assert learner.index_cap(30) == 1000
        assert learner.index_cap(100) == 1000

    def test_invalid_arguments(self, thresholds):
        with pytest.raises(ValidationError):
            DHMLearner(thresholds, threshold_kind="eq3")
        with pytest.raises(ValidationError):
            DHMLearner(thresholds, delta=0.7)


def _decisions(trace):
    return {s.step: s.values for s in trace.steps if s.action in ("accept", "reject")}


class TestModelSelection:

    def test_class_budgets(self):
        assert class_budgets(20, 3) == {3: 1, 2: 2, 1: 10}
        assert list(class_budgets(20, 3)) == [3, 2, 1]
        assert class_budgets(100, 1) == {1: 50}
        assert class_budgets(1, 2) == {}

    def test_budgets_never_exceed_the_total(self):
        for n in range(2, 400):
            assert sum(class_budgets(n, 10).values()) <= n

    def test_nesting_is_verified(self, thresholds, intervals):
        NestedStructure([thresholds, intervals])
        with pytest.raises(ValidationError):
            NestedStructure([intervals, thresholds])
        with pytest.raises(ValidationError):
            NestedStructure([])
        with pytest.raises(ValidationError):
            NestedStructure([thresholds, intervals], thetas=[2.0])

    def test_from_spec(self):
        structure = NestedStructure.from_spec([{"kind": "threshold"}, {"kind": "interval"}])
        assert structure.vc_dimensions == [1, 2]
        assert structure[2].name == "intervals"

    def test_single_class_reduces_to_dhm(self, thresholds, noiseless):
        selected = model_select(NestedStructure([thresholds]), LabeledStream(noiseless, 4, 12), 12,
                                delta=0.1)
        direct = dhm(thresholds, LabeledStream(noiseless, 4, 6), 6, delta=0.05)
        assert selected.hypothesis == direct.hypothesis
        assert selected.extras["accepted"] == 1
        assert selected.extras["budgets"] == {1: 6}
        # a class is never checked against itself
        assert _decisions(selected.trace) == {1: {}}

    def test_two_classes(self, thresholds, intervals, noiseless):
        structure = NestedStructure([thresholds, intervals])
        result = model_select(structure, LabeledStream(noiseless, 6, 16), 16, delta=0.05)
        assert result.succeeded
        assert result.extras["budget_audit"] is True
        # the smallest class passes on so few labels, and accepting overwrites
        assert result.extras["accepted"] == 1
        assert result.labels_used <= 16
        assert [s.action for s in result.trace.steps].count("class-run") == 2
        decisions = _decisions(result.trace)
        assert decisions.get(2, {}) == {}
        assert "gap_1" not in decisions[1] and "bound_1" not in decisions[1]

    def test_budget_too_small(self, thresholds, noiseless):
        result = model_select(NestedStructure([thresholds]), LabeledStream(noiseless, 0, 1), 1)
        assert result.hypothesis is None
        assert result.failure == "all h_in empty"


class TestPassive:

    def test_smallest_consistent_threshold(self, thresholds):
        stream = LabeledStream.from_arrays([0.2, 0.8], [-1, 1], 2)
        h = passive_erm(thresholds, stream, 2).hypothesis
        assert 0.2 < h.params[0] < 0.21
        assert h == Hypothesis.threshold(grid_above(0.2))

    def test_smallest_consistent_interval(self, intervals):
        stream = LabeledStream.from_arrays([0.2, 0.5, 0.6, 0.9], [-1, 1, 1, -1], 4)
        h = passive_erm(intervals, stream, 4).hypothesis
        # a in (.2, .5], b in [.6, .9)
        assert h == Hypothesis.interval(grid_above(0.2), 0.6)

    def test_single_label(self, thresholds, cal_stream):
        result = passive_erm(thresholds, cal_stream, 1)
        assert result.hypothesis.predict(0.6) == 1
        assert result.labels_used == 1
        assert len(result.Q) == 1

    def test_invalid_budgets(self, thresholds, cal_stream):
        with pytest.raises(ValidationError):
            passive_erm(thresholds, cal_stream, -1)
        with pytest.raises(ValidationError):
            passive_erm(thresholds, cal_stream, 6)


class TestRunTrace:

    def test_round_trip(self, three_thresholds, cal_stream):
        trace = cal(three_thresholds, cal_stream, 10).trace
        again = RunTrace.loads(trace.dumps())
        assert again.dumps() == trace.dumps()
        assert again.algorithm == "cal"

    def test_same_run_same_bytes(self, thresholds, noiseless):
        first = a2(thresholds, LabeledStream(noiseless, 8, 12), 12).trace.dumps()
        second = a2(thresholds, LabeledStream(noiseless, 8, 12), 12).trace.dumps()
        assert first == second

    def test_header_and_non_finite_values(self):
        trace = RunTrace("demo", {"budget": 3})
        trace.record(1, "query", 4, -1, bound=float("inf"))
        trace.finish(None, 1, 4)
        lines = trace.to_lines()
        assert f'"format":"{TRACE_FORMAT}"' in lines[0]
        assert '"bound":"inf"' in lines[1]
        assert trace.queried_indices() == [4]

    def test_save_and_load(self, tmp_path, cal_stream, three_thresholds):
        trace = cal(three_thresholds, cal_stream, 10).trace
        path = trace.save(tmp_path / "traces" / "cal.jsonl")
        assert RunTrace.load(path).dumps() == trace.dumps()

    @pytest.mark.parametrize("text", [
        "",
        "not json\n",
        '{"type":"header","format":"other/9","algorithm":"cal"}\n{"type":"result"}\n',
        '{"type":"header","format":"active-rates-trace/1","algorithm":"cal"}\n',
    ])
    def test_bad_traces(self, text):
        with pytest.raises(ReplayError):
            RunTrace.loads(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ReplayError):
            RunTrace.load(tmp_path / "nope.jsonl")
