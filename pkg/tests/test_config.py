"""Experiment configuration: YAML files, environment overrides and validation."""

from dataclasses import replace
from pathlib import Path

import pytest

from active_rates.core.config import (
    ENV_OUTPUT_DIR,
    ENV_THREADS,
    ExperimentConfig,
    get_config,
    load_config,
)
from active_rates.core.exceptions import ConfigurationError


class TestExperimentConfig:

    def test_defaults_are_valid(self):
        cfg = ExperimentConfig()
        cfg.validate()
        assert cfg.problem["kind"] == "tsybakov"
        assert cfg.budgets == sorted(cfg.budgets)
        assert not cfg.uses_structure

    def test_home_is_expanded(self):
        cfg = ExperimentConfig(output_dir="~/rates", log_file="~/rates/run.log")
        assert cfg.output_dir == str(Path.home() / "rates")
        assert cfg.log_file == str(Path.home() / "rates" / "run.log")

    def test_yaml_round_trip(self, fast_config, tmp_path):
        path = tmp_path / "conf" / "fast.yaml"
        fast_config.save_to_file(path)
        assert ExperimentConfig.from_file(path) == fast_config

    def test_partial_file_keeps_defaults(self, tmp_path):
        path = tmp_path / "partial.yaml"
        path.write_text("name: partial\nbudgets: [8, 16]\ntrials: 2\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.name == "partial"
        assert cfg.budgets == [8, 16]
        assert cfg.delta == ExperimentConfig().delta

    @pytest.mark.parametrize("text", [
        "budgets: [1, 2",
        "- just\n- a list\n",
        "unknown_key: 3\n",
    ])
    def test_bad_files(self, tmp_path, text):
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_file(tmp_path / "nope.yaml")

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert ExperimentConfig.from_file(path) == ExperimentConfig()


class TestEnvironment:

    def test_overrides(self, monkeypatch, tmp_path):
        monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "env-out"))
        monkeypatch.setenv(ENV_THREADS, "3")
        cfg = ExperimentConfig.from_env()
        assert cfg.output_dir == str(tmp_path / "env-out")
        assert cfg.max_workers == 3

    def test_bad_thread_count(self, monkeypatch):
        monkeypatch.setenv(ENV_THREADS, "many")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_env()

    def test_load_config_applies_overrides_and_sets_global(self, monkeypatch, fast_config, tmp_path):
        path = tmp_path / "fast.yaml"
        fast_config.save_to_file(path)
        monkeypatch.setenv(ENV_THREADS, "1")
        cfg = load_config(path)
        assert cfg.max_workers == 1
        assert cfg.name == "fast"
        assert get_config() is cfg


class TestValidation:

    @pytest.mark.parametrize("changes", [
        {"budgets": []},
        {"budgets": [10, 5]},
        {"budgets": [4, 4]},
        {"budgets": [-1, 4]},
        {"budgets": [2.5, 4]},
        {"trials": 0},
        {"delta": 1.5},
        {"max_workers": 0},
        {"max_workers": 65},
        {"grid_size": 1},
        {"unlabeled_cap": 0},
        {"problem": {"kind": "massart"}},
        {"algorithms": []},
        {"algorithms": [{"kind": "qbc"}]},
        {"algorithms": [{"kind": "dhm", "threshold_kind": "eq3"}]},
        {"algorithms": [{"kind": "a2", "mass_mode": "guess"}]},
        {"hypothesis_class": {"kind": "parabola"}},
        {"structure": [{"kind": "threshold"}, {"kind": "spline"}]},
        {"algorithms": [{"kind": "model_select"}]},
    ])
    def test_invalid(self, fast_config, changes):
        with pytest.raises(ConfigurationError):
            replace(fast_config, **changes).validate()

    def test_model_select_with_structure(self, fast_config):
        cfg = replace(fast_config, algorithms=[{"kind": "model_select"}],
                      structure=[{"kind": "threshold"}, {"kind": "interval"}])
        cfg.validate()
        assert cfg.uses_structure
