"""Noise problems, marginals and the labeled stream."""

import math

import numpy as np
import pytest

from active_rates.core.exceptions import (
    BudgetExhaustedError,
    StreamIndexError,
    ValidationError,
)
from active_rates.hypothesis_spaces import (
    Hypothesis,
    HypothesisClass,
    PiecewiseUniform,
    UniformSphere,
    marginal_from_spec,
)
from active_rates.noise_problems import (
    HalfspaceNoiseProblem,
    IntervalNoiseProblem,
    LabeledStream,
    make_tsybakov_threshold,
    problem_from_spec,
)


class TestMarginals:

    def test_zero_weight_piece_splits_the_quantiles(self):
        half = PiecewiseUniform.mixture([(1.0, 0.0, 0.5)])
        assert float(half.cdf(0.75)) == pytest.approx(1.0)
        assert float(half.ppf_left(1.0)) == pytest.approx(0.5)
        assert float(half.ppf_right(1.0)) == 1.0

    def test_mixture_mass(self):
        mix = PiecewiseUniform.mixture([(0.5, 0.0, 0.2), (0.5, 0.6, 1.0)])
        assert float(mix.interval_mass(0.0, 0.1)) == pytest.approx(0.25)
        assert float(mix.interval_mass(0.2, 0.6)) == pytest.approx(0.0)

    def test_samples_stay_in_the_support(self):
        mix = PiecewiseUniform.mixture([(0.5, 0.0, 0.2), (0.5, 0.6, 1.0)])
        x = mix.sample(np.random.default_rng(0), 5000)
        assert np.all((x <= 0.2) | (x >= 0.6))

    def test_sphere_samples_have_unit_norm(self):
        x = UniformSphere(4).sample(np.random.default_rng(1), 100)
        np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0)

    def test_from_spec(self):
        assert marginal_from_spec(None).to_spec() == {"kind": "uniform"}
        assert marginal_from_spec({"kind": "sphere", "d": 5}).dim == 5
        with pytest.raises(ValidationError):
            marginal_from_spec({"kind": "cauchy"})

    def test_bad_weights(self):
        with pytest.raises(ValidationError):
            PiecewiseUniform([0.0, 0.5, 1.0], [0.7, 0.7])
        with pytest.raises(ValidationError):
            PiecewiseUniform([0.0, 0.5, 0.9], [0.5, 0.5])


class TestThresholdProblems:

    def test_polynomial_noise_rate(self):
        problem = make_tsybakov_threshold(alpha=1.0, z_star=0.5)
        assert problem.kappa == pytest.approx(2.0)
        assert problem.nu_star == pytest.approx(0.375)
        assert problem.nu_star_closed_form() == pytest.approx(0.375)

    def test_excess_error_grows_quadratically(self):
        problem = make_tsybakov_threshold(alpha=1.0, z_star=0.5)
        # int_{1/2}^{z} (x - 1/2) dx
        assert problem.excess_error(Hypothesis.threshold(0.6)) == pytest.approx(0.005)
        assert problem.excess_error(Hypothesis.threshold(0.3)) == pytest.approx(0.02)
        assert problem.excess_error(Hypothesis.threshold(0.5)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha,z_star", [(0.5, 0.5), (2.0, 0.3), (1.0, 0.8)])
    def test_quadrature_agrees_with_closed_form(self, alpha, z_star):
        problem = make_tsybakov_threshold(alpha=alpha, z_star=z_star)
        assert problem.nu_star_quadrature() == pytest.approx(problem.nu_star_closed_form(), abs=1e-7)
        assert problem.nu_star == pytest.approx(problem.nu_star_closed_form(), abs=1e-12)
        assert problem.kappa == pytest.approx((1 + alpha) / alpha)

    def test_bounded_noise(self):
        problem = make_tsybakov_threshold(c_margin=0.25, z_star=0.5, flavor="bounded")
        assert problem.kappa == 1.0
        assert problem.nu_star == pytest.approx(0.25)
        assert problem.excess_error(Hypothesis.threshold(0.7)) == pytest.approx(0.1)

    def test_certified_tsybakov_constant(self):
        problem = make_tsybakov_threshold(c_margin=0.25, z_star=0.5, flavor="bounded")
        # diam(eps) = min(4 eps, 1)
        assert problem.tsybakov.kappa == 1.0
        assert problem.tsybakov.mu == pytest.approx(4.0, rel=1e-3)

    def test_noiseless(self, noiseless):
        assert noiseless.nu_star == 0.0
        assert noiseless.true_error(Hypothesis.threshold(0.7)) == pytest.approx(0.2)
        np.testing.assert_array_equal(noiseless.eta(np.array([0.2, 0.5, 0.9])), [0.0, 1.0, 1.0])

    def test_bayes_label_at_the_boundary(self):
        problem = make_tsybakov_threshold(alpha=1.0, z_star=0.5)
        np.testing.assert_array_equal(problem.bayes_label(np.array([0.49, 0.5])), [-1, 1])

    def test_noise_rate_of_classes(self, three_thresholds):
        problem = make_tsybakov_threshold(alpha=1.0, z_star=0.6)
        assert problem.noise_rate(HypothesisClass.thresholds()) == pytest.approx(problem.nu_star)
        # best member is h_.5, 0.1 away from z*
        expected = problem.nu_star + 0.01 / 2
        assert problem.noise_rate(three_thresholds) == pytest.approx(expected)
        assert problem.excess_error(Hypothesis.threshold(0.5), three_thresholds) == pytest.approx(0.0)

    def test_monte_carlo_error_brackets_exact(self):
        problem = make_tsybakov_threshold(alpha=1.0, z_star=0.5)
        h = Hypothesis.threshold(0.7)
        estimate = problem.true_error_estimate(h, samples=200_000, seed=5)
        assert abs(estimate.value - problem.true_error(h)) <= 4 * estimate.stderr

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            make_tsybakov_threshold(alpha=-1.0)
        with pytest.raises(ValidationError):
            make_tsybakov_threshold(c_margin=0.6, flavor="bounded")
        with pytest.raises(ValidationError):
            make_tsybakov_threshold(alpha=1.0, z_star=0.0)
        with pytest.raises(ValidationError):
            make_tsybakov_threshold(alpha=1.0, flavor="laplace")


class TestOtherProblems:

    def test_interval_problem(self):
        problem = IntervalNoiseProblem(0.3, 0.7, 0.25)
        assert problem.nu_star == pytest.approx(0.25)
        assert problem.true_error(Hypothesis.interval(0.3, 0.7)) == pytest.approx(0.25)
        # h_.3 also claims [0.7, 1]
        assert problem.true_error(Hypothesis.threshold(0.3)) == pytest.approx(0.4)

    def test_halfspace_problem(self):
        problem = HalfspaceNoiseProblem(3, c_margin=0.25)
        assert problem.nu_star == pytest.approx(0.25)
        assert problem.true_error(Hypothesis.halfspace([0, 1, 0])) == pytest.approx(0.5)
        assert problem.true_error(Hypothesis.halfspace([1, 0, 0])) == pytest.approx(0.25)

    @pytest.mark.parametrize("c_margin", [0.1, 0.25, 0.5])
    def test_halfspace_tag_bounds_the_level_set_diameter(self, c_margin):
        problem = HalfspaceNoiseProblem(2, c_margin=c_margin)
        angles = np.linspace(-math.pi, math.pi, 720, endpoint=False)
        C = HypothesisClass.finite(
            Hypothesis.halfspace([math.cos(t), math.sin(t)]) for t in angles)
        normals = C.normals()
        excess = problem.true_errors(C) - problem.nu_star
        # two normals disagree on angle / pi of the circle
        pairwise = np.arccos(np.clip(normals @ normals.T, -1.0, 1.0)) / math.pi

        tag = problem.tsybakov
        assert tag.kappa == 1.0 and tag.mu == pytest.approx(1.0 / c_margin)
        tightest = 0.0
        for k in range(1, 11):
            eps = 2.0 ** -k
            keep = excess <= eps + 1e-12
            diam = float(pairwise[np.ix_(keep, keep)].max())
            assert diam <= tag.mu * eps + 1e-9
            tightest = max(tightest, diam / (tag.mu * eps))
        assert tightest > 0.95

    @pytest.mark.parametrize("spec", [
        {"kind": "tsybakov", "alpha": 2.0, "z_star": 0.4},
        {"kind": "bounded", "c_margin": 0.1},
        {"kind": "noiseless", "z_star": 0.25},
        {"kind": "interval"},
        {"kind": "halfspace", "d": 4},
    ])
    def test_spec_round_trip(self, spec):
        problem = problem_from_spec(spec)
        assert problem_from_spec(problem.to_spec()).to_spec() == problem.to_spec()

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            problem_from_spec({"kind": "massart"})


class TestLabeledStream:

    def test_same_seed_same_stream(self, noiseless):
        a = LabeledStream(noiseless, 7, 5).sample_unlabeled(10)
        b = LabeledStream(noiseless, 7, 5).sample_unlabeled(10)
        np.testing.assert_array_equal(a, b)

    def test_pairs_do_not_depend_on_read_order(self, noiseless):
        far_first = LabeledStream(noiseless, 11, 5)
        far_first.point(3000)
        in_order = LabeledStream(noiseless, 11, 5)
        np.testing.assert_array_equal(far_first.points([1, 2, 3]), in_order.sample_unlabeled(3))

    def test_noiseless_labels_follow_bayes(self, noiseless):
        stream = LabeledStream(noiseless, 3, 20)
        labels = [stream.query_label(i) for i in range(1, 21)]
        np.testing.assert_array_equal(labels, noiseless.bayes_label(stream.sample_unlabeled(20)))

    def test_each_index_is_charged_once(self, cal_stream):
        assert cal_stream.query_label(2) == -1
        assert cal_stream.query_label(2) == -1
        assert cal_stream.labels_used == 1
        assert cal_stream.query(1).label == 1
        assert cal_stream.labels_used == 2

    def test_budget_exhaustion(self, cal_stream):
        stream = cal_stream.fresh_copy(budget=1)
        stream.query_label(1)
        with pytest.raises(BudgetExhaustedError):
            stream.query_label(2)
        # already revealed labels stay free
        assert stream.query_label(1) == 1

    def test_unlabeled_use_is_the_furthest_index(self, cal_stream):
        cal_stream.points([3])
        cal_stream.query_label(2)
        assert cal_stream.unlabeled_used == 3
        assert cal_stream.labels_used == 1

    def test_index_errors(self, cal_stream):
        with pytest.raises(StreamIndexError):
            cal_stream.points([0])
        with pytest.raises(StreamIndexError):
            cal_stream.point(6)
        assert cal_stream.length == 5
        assert not cal_stream.has(6)

    def test_fresh_copy_forgets_labels(self, cal_stream):
        cal_stream.query_label(1)
        copy = cal_stream.fresh_copy()
        assert copy.labels_used == 0
        assert copy.budget == cal_stream.budget
        np.testing.assert_array_equal(copy.to_arrays()[0], cal_stream.to_arrays()[0])

    def test_unbounded_streams_have_no_arrays(self, noiseless):
        with pytest.raises(StreamIndexError):
            LabeledStream(noiseless, 0, 1).to_arrays()

    def test_invalid_construction(self):
        with pytest.raises(ValidationError):
            LabeledStream(None, 0, -1)
        with pytest.raises(ValidationError):
            LabeledStream.from_arrays([0.1, 0.2], [1, 0], 2)

    def test_revealed_labels_sorted_by_index(self, cal_stream):
        cal_stream.query_label(4)
        cal_stream.query_label(2)
        assert [p.index for p in cal_stream.revealed_labels()] == [2, 4]
        assert math.isclose(cal_stream.remaining_budget, 8)
