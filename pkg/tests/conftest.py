"""Shared fixtures: small classes, hand-built streams and a fast configuration."""

import pytest

from active_rates.core.config import ExperimentConfig
from active_rates.hypothesis_spaces import Hypothesis, HypothesisClass
from active_rates.noise_problems import LabeledStream, make_noiseless_threshold


@pytest.fixture
def thresholds():
    return HypothesisClass.thresholds()


@pytest.fixture
def intervals():
    return HypothesisClass.intervals()


@pytest.fixture
def three_thresholds():
    """C = {h_.25, h_.5, h_.75}."""
    return HypothesisClass.finite([Hypothesis.threshold(z) for z in (0.25, 0.5, 0.75)],
                                  name="three-thresholds")


@pytest.fixture
def noiseless():
    return make_noiseless_threshold(0.5)


@pytest.fixture
def cal_stream():
    """X = 0.6, 0.1, 0.3, 0.8, 0.45 labeled by h_.5."""
    xs = [0.6, 0.1, 0.3, 0.8, 0.45]
    return LabeledStream.from_arrays(xs, [1 if x >= 0.5 else -1 for x in xs], 10)


@pytest.fixture
def fast_config(tmp_path):
    """Two cheap learners on a noiseless problem, writing under tmp_path."""
    return ExperimentConfig(
        name="fast",
        problem={"kind": "noiseless", "z_star": 0.5, "marginal": "uniform"},
        algorithms=[{"kind": "cal"}, {"kind": "passive"}],
        budgets=[5, 10, 20],
        trials=3,
        max_workers=2,
        output_dir=str(tmp_path / "out"),
        enable_console_logging=False,
    )
