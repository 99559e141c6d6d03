"""Experiment harness: configs, the regret runner, log replay, and the CLI."""

from .config import (format_environment, load_environment_section,
                     load_experiment_config, load_genlog_config,
                     load_replay_config)
from .experiment import ExperimentConfig, PolicyConfig, RegretTrace, run_experiment
from .replay import (InteractionLog, ReplayResult, generate_synthetic_log,
                     read_log, replay_evaluate, write_log)

__all__ = [
    "ExperimentConfig",
    "InteractionLog",
    "PolicyConfig",
    "RegretTrace",
    "ReplayResult",
    "format_environment",
    "generate_synthetic_log",
    "load_environment_section",
    "load_experiment_config",
    "load_genlog_config",
    "load_replay_config",
    "read_log",
    "replay_evaluate",
    "run_experiment",
    "write_log",
]
