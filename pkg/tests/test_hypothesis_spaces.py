"""Hypotheses, regions, version spaces and induced labelings."""

import numpy as np
import pytest

from active_rates.core.exceptions import (
    EmptyVersionSpaceError,
    StreamIndexError,
    ValidationError,
)
from active_rates.core.models import EstimationMode, IndexedLabel
from active_rates.hypothesis_spaces import (
    TIE_BREAK_STEP,
    BandRegion,
    GridVersionSpace,
    Hypothesis,
    HypothesisClass,
    IntervalRegion,
    PiecewiseUniform,
    PointTable,
    ThresholdLabelings,
    ThresholdVersionSpace,
    UniformSphere,
    ZInterval,
    ball,
    band_measure,
    disagreement_mass,
    empirical_error,
    eps_minimal_diameter,
    full_version_space,
    grid_above,
    region_mass,
    stream_points,
    uniform,
)
from active_rates.noise_problems import LabeledStream, make_tsybakov_threshold


class TestPredict:

    def test_threshold_is_positive_at_and_above_z(self):
        h = Hypothesis.threshold(0.5)
        assert h.predict(0.6) == 1
        assert h.predict(0.5) == 1
        assert h.predict(0.49) == -1

    def test_interval_includes_its_endpoints(self):
        h = Hypothesis.interval(0.4, 0.6)
        assert h.predict(0.4) == 1
        assert h.predict(0.6) == 1
        assert h.predict(0.61) == -1

    def test_halfspace_sign_of_inner_product(self):
        x = np.array([0.3, -0.2, 0.9])
        x = x / np.linalg.norm(x)
        assert Hypothesis.halfspace([0, 1, 0]).predict(x) == -1

    def test_vectorized_labels(self):
        labels = Hypothesis.threshold(0.5).predict(np.array([0.1, 0.5, 0.9]))
        np.testing.assert_array_equal(labels, [-1, 1, 1])

    def test_threshold_is_the_interval_up_to_one(self):
        x = np.array([0.0, 0.2, 0.3, 0.7, 1.0])
        np.testing.assert_array_equal(Hypothesis.interval(0.3, 1.0).predict(x),
                                      Hypothesis.threshold(0.3).predict(x))
        assert Hypothesis.threshold(0.3).interval_form() == (0.3, 1.0)
        assert Hypothesis.interval(0.0, 0.5).predict(0.0) == 1

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            Hypothesis.threshold(1.5)
        with pytest.raises(ValidationError):
            Hypothesis.interval(0.6, 0.4)
        with pytest.raises(ValidationError):
            Hypothesis.halfspace([0, 0, 0])


class TestEmpiricalError:

    def test_agreeing_labels(self):
        stream = LabeledStream.from_arrays([0.7, 0.2], [1, -1], 2)
        S = [IndexedLabel(1, 1), IndexedLabel(2, -1)]
        assert empirical_error(Hypothesis.threshold(0.5), S, stream) == 0.0

    def test_single_disagreement(self):
        stream = LabeledStream.from_arrays([0.7], [-1], 1)
        assert empirical_error(Hypothesis.threshold(0.5), [IndexedLabel(1, -1)], stream) == 1.0

    def test_empty_sample_has_zero_error(self):
        assert empirical_error(Hypothesis.threshold(0.5), [], np.zeros(0)) == 0.0

    def test_indices_outside_an_array_stream(self):
        with pytest.raises(StreamIndexError):
            stream_points(np.array([0.1, 0.2]), [3])


class TestHypothesisClass:

    def test_shatter_coefficients(self, thresholds, intervals):
        for m in (0, 1, 5, 40):
            assert thresholds.shatter_coefficient(m) == m + 1
            assert intervals.shatter_coefficient(m) == m * (m + 1) // 2 + 1

    def test_halfspace_growth_function(self):
        # homogeneous halfspaces in R^2 realize 2m labelings of m points
        assert HypothesisClass.halfspaces(2).shatter_coefficient(7) == 14

    def test_finite_members_keep_their_index(self, three_thresholds):
        assert [h.grid_index for h in three_thresholds.members] == [0, 1, 2]
        assert three_thresholds.representative() == Hypothesis.threshold(0.25)

    def test_grid_prediction_matrix(self, thresholds):
        grid = thresholds.to_grid(11)
        matrix = grid.prediction_matrix(np.array([0.0, 0.55, 1.0]))
        assert matrix.shape == (11, 3)
        # every threshold labels x = 1 positive
        assert np.all(matrix[:, 2] == 1)
        assert matrix[:, 1].tolist() == [1] * 6 + [-1] * 5

    def test_class_description_round_trip(self, thresholds, intervals):
        union = HypothesisClass.union(thresholds, intervals)
        rebuilt = HypothesisClass.from_spec(union.to_spec())
        assert rebuilt.to_spec() == union.to_spec()
        assert rebuilt.vc_dimension == 4

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            HypothesisClass.from_spec({"kind": "parabola"})


class TestRegions:

    def test_threshold_version_space_region(self, thresholds):
        V = ThresholdVersionSpace(thresholds, [ZInterval(0.3, 0.5)])
        region = V.disagreement_region()
        assert region == IntervalRegion([(0.3, 0.5)])
        assert region_mass(region, uniform()).value == pytest.approx(0.2)
        assert V.diameter(uniform()) == pytest.approx(0.2)

    def test_singleton_version_space_has_empty_region(self, thresholds):
        V = ThresholdVersionSpace(thresholds, [ZInterval(0.4, 0.4)])
        assert V.disagreement_region().is_empty
        assert V.diameter(uniform()) == 0.0

    def test_empty_region_mass(self):
        assert region_mass(IntervalRegion.empty(), uniform()).value == 0.0

    def test_region_contains_is_half_open(self):
        region = IntervalRegion([(0.3, 0.5)])
        np.testing.assert_array_equal(region.contains(np.array([0.3, 0.4, 0.5])),
                                      [True, True, False])

    def test_band_measure_against_monte_carlo(self):
        band = BandRegion([0.0, 0.0, 1.0], 0.1)
        exact = band_measure(0.1, 3)
        # x_1 is uniform on [-1, 1] on the 2-sphere
        assert exact == pytest.approx(0.1)
        estimate = region_mass(band, UniformSphere(3), EstimationMode.MONTE_CARLO,
                               samples=200_000, seed=3)
        assert estimate.mode is EstimationMode.MONTE_CARLO
        assert abs(estimate.value - exact) <= 4 * estimate.stderr

    def test_disagreement_mass_of_thresholds(self):
        assert disagreement_mass(Hypothesis.threshold(0.2), Hypothesis.threshold(0.7),
                                 uniform()) == pytest.approx(0.5)

    def test_nonuniform_marginal_mass(self):
        tilted = PiecewiseUniform.from_densities([0.0, 0.5, 1.0], [0.5, 1.5])
        assert region_mass(IntervalRegion([(0.0, 0.5)]), tilted).value == pytest.approx(0.25)


class TestBalls:

    def test_threshold_ball(self, thresholds):
        V = ball(thresholds, Hypothesis.threshold(0.5), 0.1, uniform())
        assert V.z_min == pytest.approx(0.4)
        assert V.z_max == pytest.approx(0.6)

    def test_zero_radius_ball(self, thresholds):
        V = ball(thresholds, Hypothesis.threshold(0.5), 0.0, uniform())
        assert V.contains(Hypothesis.threshold(0.5))
        assert not V.contains(Hypothesis.threshold(0.5001))

    def test_small_interval_ball_region(self, intervals):
        V = ball(intervals, Hypothesis.interval(0.4, 0.6), 0.05, uniform())
        assert region_mass(V.disagreement_region(), uniform()).value == pytest.approx(0.2)

    def test_wide_interval_ball_holds_every_narrow_interval(self, intervals):
        V = ball(intervals, Hypothesis.interval(0.4, 0.6), 0.3, uniform())
        for a in (0.0, 0.3, 0.55, 0.9):
            assert V.contains(Hypothesis.interval(a, a + 0.1))

    def test_negative_radius(self, thresholds):
        with pytest.raises(ValidationError):
            ball(thresholds, Hypothesis.threshold(0.5), -0.1, uniform())

    def test_finite_ball(self, three_thresholds):
        V = ball(three_thresholds, Hypothesis.threshold(0.5), 0.25, uniform())
        assert V.size == 3
        V = ball(three_thresholds, Hypothesis.threshold(0.5), 0.2, uniform())
        assert [h.params[0] for h in V.survivors()] == [0.5]


class TestVersionSpaces:

    def test_restrict_thresholds(self, thresholds):
        V = full_version_space(thresholds).restrict(0.6, 1).restrict(0.3, -1)
        assert V.contains(Hypothesis.threshold(0.5))
        assert V.contains(Hypothesis.threshold(0.6))
        assert not V.contains(Hypothesis.threshold(0.3))

    def test_contradiction_empties_thresholds(self, thresholds):
        V = full_version_space(thresholds).restrict(0.3, 1).restrict(0.8, -1)
        assert V.is_empty
        with pytest.raises(EmptyVersionSpaceError):
            V.disagreement_region()

    def test_interval_version_space_region(self, intervals):
        V = full_version_space(intervals).restrict(0.5, 1).restrict(0.2, -1).restrict(0.9, -1)
        # (n_left, p_min) and (p_max, n_right) touch at the single positive
        assert V.disagreement_region() == IntervalRegion([(0.2, 0.9)])

    def test_grid_version_space(self, three_thresholds):
        V = full_version_space(three_thresholds).restrict(0.6, 1)
        assert V.size == 2
        assert V.disagreement_region() == IntervalRegion([(0.25, 0.5)])
        assert V.representative() == Hypothesis.threshold(0.25)

    def test_eps_minimal_diameter_by_dense_grid(self, thresholds):
        problem = make_tsybakov_threshold(c_margin=0.25, z_star=0.5, flavor="bounded")
        # er(h_z) - nu = |z - 1/2| / 2 under bounded noise c = 1/4
        value = eps_minimal_diameter(0.05, thresholds, problem)
        assert value == pytest.approx(0.2, abs=1e-4)


class TestTieBreak:

    def test_whole_classes_give_their_smallest_member(self, thresholds, intervals):
        assert thresholds.representative() == Hypothesis.threshold(0.0)
        assert intervals.representative() == Hypothesis.interval(0.0, TIE_BREAK_STEP)
        assert full_version_space(thresholds).representative() == Hypothesis.threshold(0.0)

    def test_open_lower_end_moves_to_the_next_grid_point(self, thresholds):
        V = full_version_space(thresholds).restrict(0.6, 1).restrict(0.3, -1)
        h = V.representative()
        assert h == Hypothesis.threshold(grid_above(0.3))
        assert 0.3 < h.params[0] <= 0.3 + TIE_BREAK_STEP
        assert V.contains(h)

    def test_closed_lower_end_is_kept(self, thresholds):
        V = full_version_space(thresholds).restrict(0.7, 1)
        assert V.representative() == Hypothesis.threshold(0.0)

    def test_narrow_piece_falls_back_to_its_midpoint(self):
        piece = ZInterval(0.3, 0.3 + 1e-9, False, True)
        z = piece.smallest()
        assert piece.contains(z)
        assert z == pytest.approx(0.3 + 5e-10, abs=1e-15)

    def test_interval_with_a_positive(self, intervals):
        V = full_version_space(intervals).restrict(0.5, 1).restrict(0.2, -1).restrict(0.9, -1)
        h = V.representative()
        assert h == Hypothesis.interval(grid_above(0.2), 0.5)
        assert V.contains(h)

    def test_interval_without_positives(self, intervals):
        V = full_version_space(intervals).restrict(0.4, -1)
        assert V.representative() == Hypothesis.interval(0.0, TIE_BREAK_STEP)

        V = full_version_space(intervals).restrict(0.0, -1)
        h = V.representative()
        assert h == Hypothesis.interval(TIE_BREAK_STEP, 2 * TIE_BREAK_STEP)
        assert V.contains(h)

    def test_grid_gives_the_lowest_index(self, three_thresholds):
        V = full_version_space(three_thresholds).restrict(0.6, 1)
        assert V.representative().grid_index == 0
        assert full_version_space(three_thresholds).restrict(0.3, -1).representative() \
            == Hypothesis.threshold(0.5)


def _grid(kind):
    if kind == "halfspace":
        return HypothesisClass.halfspaces(3).to_grid(200, seed=4), UniformSphere(3)
    base = HypothesisClass.thresholds() if kind == "threshold" else HypothesisClass.intervals()
    return base.to_grid(200), uniform()


class TestNestedVersionSpaces:

    @pytest.mark.parametrize("kind", ["threshold", "interval", "halfspace"])
    def test_shrinking_never_grows_the_region_or_the_diameter(self, kind):
        C, marginal = _grid(kind)
        rng = np.random.default_rng(11)
        x = marginal.sample(rng, 4000)
        n = len(C)
        for _ in range(10):
            outer = rng.random(n) < rng.uniform(0.05, 1.0)
            outer[rng.integers(n)] = True
            inner = outer & (rng.random(n) < rng.uniform(0.05, 1.0))
            inner[rng.choice(np.flatnonzero(outer))] = True

            V, W = GridVersionSpace(C, outer), GridVersionSpace(C, inner)
            dis_outer = V.disagreement_region().contains(x)
            dis_inner = W.disagreement_region().contains(x)
            assert not np.any(dis_inner & ~dis_outer)
            assert W.diameter(marginal) <= V.diameter(marginal) + 1e-12


class TestLabelings:

    def test_empty_table_has_one_labeling(self, thresholds):
        labelings = ThresholdLabelings(thresholds, PointTable.build(np.zeros(0), [], []))
        assert labelings.size == 1
        assert labelings.erm_hypothesis() == Hypothesis.threshold(0.0)

    def test_mistake_counts(self, thresholds):
        stream = LabeledStream.from_arrays([0.2, 0.4, 0.6, 0.8], [-1, -1, 1, 1], 4)
        S = [IndexedLabel(i, y) for i, y in zip(range(1, 5), (-1, -1, 1, 1))]
        labelings = ThresholdLabelings(thresholds, PointTable.build(stream, [], S))
        np.testing.assert_array_equal(labelings.mistakes(), [2, 1, 0, 1, 2])
        assert labelings.cell(2).contains(0.5)
        assert not labelings.cell(2).contains(0.4)

    def test_labeled_points_constrain_the_cells(self, thresholds):
        stream = LabeledStream.from_arrays([0.3, 0.7], [1, 1], 2)
        table = PointTable.build(stream, [IndexedLabel(1, 1)], [IndexedLabel(2, 1)])
        labelings = ThresholdLabelings(thresholds, table)
        # z must be <= 0.3, which leaves only the all-positive labeling
        assert labelings.size == 1
        assert labelings.erm_hypothesis() == Hypothesis.threshold(0.0)
