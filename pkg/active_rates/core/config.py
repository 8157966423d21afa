"""Configuration management for Active Rates experiments."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .exceptions import ConfigurationError

ALGORITHM_KINDS = ("cal", "a2", "dhm", "model_select", "passive")
PROBLEM_KINDS = ("tsybakov", "bounded", "noiseless", "interval", "halfspace")
CLASS_KINDS = ("threshold", "interval", "halfspace", "grid")
THRESHOLD_KINDS = ("eq2", "eq4")
MASS_MODES = ("exact", "monte-carlo")

ENV_OUTPUT_DIR = "ACTIVE_RATES_OUTPUT_DIR"
ENV_THREADS = "ACTIVE_RATES_THREADS"


@dataclass
class ExperimentConfig:
    """Configuration of one batch experiment."""

    name: str = "experiment"

    # Problem: kind plus alpha, c_margin, z_star, a, b, marginal, d as the kind needs
    problem: Dict[str, Any] = field(default_factory=lambda: {
        "kind": "tsybakov",
        "alpha": 1.0,
        "z_star": 0.5,
        "marginal": "uniform",
    })

    # Hypothesis class, or the nested structure used by model selection
    hypothesis_class: Dict[str, Any] = field(default_factory=lambda: {"kind": "threshold"})
    structure: List[Dict[str, Any]] = field(default_factory=list)

    # Algorithms compared on the same streams
    algorithms: List[Dict[str, Any]] = field(default_factory=lambda: [
        {"kind": "dhm", "threshold_kind": "eq4"},
        {"kind": "passive"},
    ])
    delta: float = 0.05

    # Budget grid and repetitions
    budgets: List[int] = field(default_factory=lambda: [64, 128, 256, 512])
    trials: int = 20
    base_seed: int = 20100501

    # Approximation knobs
    grid_size: int = 4096
    unlabeled_cap: int = 1_000_000
    mc_pool: int = 100_000
    bounds: Dict[str, Any] = field(default_factory=dict)

    # Output settings
    output_dir: str = "./active_rates_output"
    write_traces: bool = False

    # Logging settings
    log_level: str = "INFO"
    log_file: Optional[str] = None
    enable_console_logging: bool = True

    # Execution
    max_workers: int = 4

    # Acceptance tolerances, keyed by criterion name
    acceptance: Dict[str, float] = field(default_factory=lambda: {
        "passive_slope_tolerance": 0.15,
        "active_slope_max": -0.8,
        "exponential_r_squared": 0.85,
        "realizable_r_squared": 0.9,
        "adaptivity_factor": 4.0,
    })

    custom: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Normalize paths."""
        self.output_dir = str(Path(self.output_dir).expanduser())
        if self.log_file:
            self.log_file = str(Path(self.log_file).expanduser())

    @classmethod
    def from_file(cls, config_path: str | Path) -> ExperimentConfig:
        """Load configuration from YAML file."""
        config_path = Path(config_path)

        if not config_path.exists():
            raise ConfigurationError(f"Configuration file not found: {config_path}")

        try:
            with open(config_path, "r") as f:
                data = yaml.safe_load(f) or {}
            if not isinstance(data, dict):
                raise ConfigurationError("Configuration root must be a mapping")
            return cls(**data)
        except ConfigurationError:
            raise
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in config file: {e}", e)
        except Exception as e:
            raise ConfigurationError(f"Failed to load configuration: {e}", e)

    @classmethod
    def from_env(cls) -> ExperimentConfig:
        """Default configuration with environment overrides applied."""
        return cls().apply_env_overrides()

    def apply_env_overrides(self) -> ExperimentConfig:
        """Apply the output directory and thread count environment overrides."""
        if os.getenv(ENV_OUTPUT_DIR):
            self.output_dir = str(Path(os.environ[ENV_OUTPUT_DIR]).expanduser())

        if os.getenv(ENV_THREADS):
            try:
                self.max_workers = int(os.environ[ENV_THREADS])
            except ValueError as e:
                raise ConfigurationError(
                    f"{ENV_THREADS} must be an integer, got {os.environ[ENV_THREADS]!r}", e
                )
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return asdict(self)

    def save_to_file(self, config_path: str | Path) -> None:
        """Save configuration to YAML file."""
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, indent=2,
                           sort_keys=False)

    @property
    def uses_structure(self) -> bool:
        return any(spec.get("kind") == "model_select" for spec in self.algorithms)

    def validate(self) -> None:
        """Validate configuration settings."""
        if not self.budgets:
            raise ConfigurationError("budgets must not be empty")

        if any(int(n) != n or n < 0 for n in self.budgets):
            raise ConfigurationError("budgets must be nonnegative integers")

        if any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ConfigurationError("budgets must be strictly increasing")

        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")

        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must be in (0, 1)")

        if self.max_workers < 1 or self.max_workers > 64:
            raise ConfigurationError("max_workers must be between 1 and 64")

        if self.grid_size < 2:
            raise ConfigurationError("grid_size must be at least 2")

        if self.unlabeled_cap < 1 or self.mc_pool < 1:
            raise ConfigurationError("unlabeled_cap and mc_pool must be positive")

        if self.problem.get("kind") not in PROBLEM_KINDS:
            raise ConfigurationError(f"Unknown problem kind: {self.problem.get('kind')}")

        if not self.algorithms:
            raise ConfigurationError("at least one algorithm is required")

        for spec in self.algorithms:
            kind = spec.get("kind")
            if kind not in ALGORITHM_KINDS:
                raise ConfigurationError(f"Unknown algorithm kind: {kind}")
            if spec.get("threshold_kind", "eq4") not in THRESHOLD_KINDS:
                raise ConfigurationError(
                    f"Unknown DHM threshold: {spec.get('threshold_kind')}"
                )
            if spec.get("mass_mode", "exact") not in MASS_MODES:
                raise ConfigurationError(f"Unknown mass mode: {spec.get('mass_mode')}")

        for spec in [self.hypothesis_class, *self.structure]:
            if spec.get("kind") not in CLASS_KINDS:
                raise ConfigurationError(f"Unknown hypothesis class kind: {spec.get('kind')}")

        if self.uses_structure and not self.structure:
            raise ConfigurationError("model_select needs a nonempty structure")


# Global configuration instance
_config: ExperimentConfig | None = None


def get_config() -> ExperimentConfig:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = ExperimentConfig()
    return _config


def set_config(config: ExperimentConfig) -> None:
    """Set the global configuration instance."""
    global _config
    _config = config


def load_config(config_path: str | Path | None = None) -> ExperimentConfig:
    """Load configuration from file or defaults, then environment overrides."""
    if config_path:
        config = ExperimentConfig.from_file(config_path).apply_env_overrides()
    else:
        config = ExperimentConfig.from_env()

    config.validate()
    set_config(config)
    return config
