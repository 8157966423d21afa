"""Disagreement coefficients and the lemma fixture suite."""

import math

import pytest

from active_rates.core.exceptions import UnsupportedError, ValidationError
from active_rates.core.models import EstimationMode
from active_rates.disagreement import (
    LEMMA_FIXTURES,
    critical_radius,
    dyadic_grid,
    lemma_checks,
    theta_analytic,
    theta_estimate,
)
from active_rates.hypothesis_spaces import (
    ClassKind,
    Hypothesis,
    PiecewiseUniform,
    UniformSphere,
    uniform,
)


class TestThetaAnalytic:

    def test_thresholds(self):
        assert theta_analytic("threshold") == 2.0
        assert theta_analytic(ClassKind.THRESHOLD, Hypothesis.threshold(0.3), uniform()) == 2.0

    def test_threshold_on_the_boundary(self):
        with pytest.raises(UnsupportedError):
            theta_analytic("threshold", Hypothesis.threshold(0.0))

    def test_intervals(self):
        assert theta_analytic("interval", Hypothesis.interval(0.4, 0.6)) == pytest.approx(5.0)
        assert theta_analytic("interval", Hypothesis.interval(0.3, 0.7)) == 4.0

    def test_sphere_bracket(self):
        low, high = theta_analytic("halfspace", marginal=UniformSphere(4))
        assert low == pytest.approx(math.pi / 2)
        assert high == pytest.approx(2 * math.pi)

    def test_no_closed_form(self):
        with pytest.raises(UnsupportedError):
            theta_analytic("halfspace", marginal=uniform())
        tilted = PiecewiseUniform.from_densities([0.0, 0.5, 1.0], [0.5, 1.5])
        with pytest.raises(UnsupportedError):
            theta_analytic("threshold", marginal=tilted)


class TestThetaEstimate:

    def test_dyadic_grid(self):
        grid = dyadic_grid(1e-6)
        assert grid[0] == 0.5
        assert len(grid) == 19
        assert min(grid) > 1e-6

    def test_threshold_matches_closed_form(self, thresholds):
        estimate = theta_estimate(thresholds, Hypothesis.threshold(0.5), uniform())
        assert estimate.value == pytest.approx(2.0)
        assert estimate.mode is EstimationMode.EXACT
        assert estimate.stderr == 0.0

    def test_threshold_near_the_edge(self, thresholds):
        # the ball is clipped at 0 for large r, but small radii still give 2
        estimate = theta_estimate(thresholds, Hypothesis.threshold(0.1), uniform())
        assert estimate.value == pytest.approx(2.0)
        assert estimate.masses[0] == pytest.approx(0.6)

    def test_interval_peaks_at_the_critical_radius(self, intervals):
        h = Hypothesis.interval(0.4, 0.6)
        assert critical_radius(intervals, h, uniform()) == pytest.approx(0.2)
        estimate = theta_estimate(intervals, h, uniform())
        assert estimate.value == pytest.approx(5.0, rel=1e-6)
        assert estimate.argmax_r == pytest.approx(0.2)

    def test_no_critical_radius_for_thresholds(self, thresholds):
        assert critical_radius(thresholds, Hypothesis.threshold(0.5), uniform()) is None

    def test_monte_carlo_mode(self, thresholds):
        estimate = theta_estimate(thresholds, Hypothesis.threshold(0.5), uniform(),
                                  r_grid=[0.25, 0.125], mc_budget=40_000, seed=1)
        assert estimate.mode is EstimationMode.MONTE_CARLO
        assert estimate.value == pytest.approx(2.0, abs=0.2)
        assert estimate.stderr > 0.0

    def test_invalid_arguments(self, thresholds):
        h = Hypothesis.threshold(0.5)
        with pytest.raises(ValidationError):
            theta_estimate(thresholds, h, uniform(), r0=-1.0)
        with pytest.raises(ValidationError):
            theta_estimate(thresholds, h, uniform(), mc_budget=100)
        with pytest.raises(ValidationError):
            theta_estimate(thresholds, h, uniform(), r0=1e-6, r_grid=[1e-7])


class TestLemmaChecks:

    def test_exact_suite_passes(self):
        checks = lemma_checks()
        assert len(checks) == 7
        assert all(c.passed for c in checks), [c for c in checks if not c.passed]
        assert {c.lemma for c in checks} == set(LEMMA_FIXTURES)

    def test_identical_marginals_give_equal_coefficients(self):
        first = lemma_checks(["close-marginals"])[0]
        assert first.fixture == "lambda=1"
        assert first.lhs == first.rhs

    def test_mixture_bound(self):
        (check,) = lemma_checks(["finite-mixture"])
        # theta is 2 under the mixture and 1 under each half
        assert check.lhs == pytest.approx(2.0)
        assert check.rhs == pytest.approx(2.0)
        assert check.passed

    def test_unknown_fixture(self):
        with pytest.raises(ValidationError):
            lemma_checks(["triangle"])
