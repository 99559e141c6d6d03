"""Regret experiments: run policies against environments over many realizations.

Every realization derives its own substreams from (seed, realization index),
so results are identical whatever the parallelism degree, and all policies
within a realization face the same true parameter trajectory and contexts.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..distributions import substream
from ..environments import BanditEnvironment, EnvironmentSpec
from ..errors import ConfigurationError, NumericError
from ..policies import Policy, PolicySpec
from ..dynamics import DynamicsSpec
from ..reward_models import RewardModelSpec

REGRET_MODES = ("pseudo", "realized")

REGRET_CSV = "cumulative_regret.csv"
RAW_CSV = "raw_regret.csv"


@dataclass(frozen=True)
class PolicyConfig:
    """One policy entry of an experiment.

    ``spec`` None selects the oracle diagnostic, which cheats by reading the
    environment's true means and therefore has pseudo regret exactly zero.
    ``dynamics`` holds the transition model the policy assumes, either one
    spec shared by all arms or one per arm; ``reward`` overrides the
    environment's reward model (for deliberately misspecified baselines).
    """

    label: str
    spec: PolicySpec | None
    dynamics: DynamicsSpec | tuple[DynamicsSpec, ...] | None = None
    reward: RewardModelSpec | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec
    policies: tuple[PolicyConfig, ...]
    horizon: int
    realizations: int
    seed: int
    regret_mode: str = "pseudo"
    jobs: int = 1
    name: str = ""
    output_dir: str | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        if self.realizations < 1:
            raise ConfigurationError("realizations must be at least 1")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be at least 1")
        if self.regret_mode not in REGRET_MODES:
            raise ConfigurationError(f"regret_mode must be one of {REGRET_MODES}")
        labels = [p.label for p in self.policies]
        if not labels or len(set(labels)) != len(labels):
            raise ConfigurationError("policies must be nonempty with unique labels")


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class RegretTrace:
    """Aggregated and raw regret for one experiment run.

    Arrays are indexed (policy, realization, round); aggregates are over the
    completed realizations only.
    """

    labels: tuple[str, ...]
    horizon: int
    seed: int
    realizations: int
    realization_ids: np.ndarray
    aborted: int
    mean_instant: np.ndarray
    mean_cum: np.ndarray
    std_cum: np.ndarray
    chosen: np.ndarray
    oracle: np.ndarray
    instant: np.ndarray
    degenerate_events: np.ndarray

    @property
    def completed(self) -> int:
        return int(self.realization_ids.size)

    def write_regret_csv(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("policy,t,mean_instant_regret,mean_cum_regret,std_cum_regret\n")
            for p, label in enumerate(self.labels):
                for t in range(self.horizon):
                    fh.write(f"{label},{t + 1},{_fmt(self.mean_instant[p, t])},"
                             f"{_fmt(self.mean_cum[p, t])},{_fmt(self.std_cum[p, t])}\n")

    def write_raw_csv(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("policy,realization,t,chosen_arm,oracle_arm,instant_regret\n")
            for p, label in enumerate(self.labels):
                for i, r in enumerate(self.realization_ids):
                    for t in range(self.horizon):
                        fh.write(f"{label},{r},{t + 1},{self.chosen[p, i, t]},"
                                 f"{self.oracle[p, i, t]},{_fmt(self.instant[p, i, t])}\n")

    def write(self, out_dir: str) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        regret_path = os.path.join(out_dir, REGRET_CSV)
        raw_path = os.path.join(out_dir, RAW_CSV)
        self.write_regret_csv(regret_path)
        self.write_raw_csv(raw_path)
        return regret_path, raw_path


@dataclass
class _RealizationResult:
    realization: int
    chosen: np.ndarray | None = None
    oracle: np.ndarray | None = None
    instant: np.ndarray | None = None
    degenerate: np.ndarray | None = None
    abort_reason: str | None = None


def _build_policy(cfg: PolicyConfig, env_spec: EnvironmentSpec,
                  rng: np.random.Generator) -> Policy | None:
    if cfg.spec is None:
        return None
    reward = cfg.reward if cfg.reward is not None else env_spec.reward
    return Policy(cfg.spec, reward, env_spec.n_arms, rng, dynamics=cfg.dynamics)


def _run_realization(config: ExperimentConfig, r: int) -> _RealizationResult:
    n_pol = len(config.policies)
    horizon = config.horizon
    realized = config.regret_mode == "realized"
    chosen = np.zeros((n_pol, horizon), dtype=np.int16)
    oracle = np.zeros((n_pol, horizon), dtype=np.int16)
    instant = np.zeros((n_pol, horizon))
    degenerate = np.zeros(n_pol, dtype=np.int64)
    try:
        for p, pcfg in enumerate(config.policies):
            env = BanditEnvironment(config.environment, substream(config.seed, r, 0),
                                    sample_oracle=realized)
            policy = _build_policy(pcfg, config.environment,
                                   substream(config.seed, r, 1 + p))
            for t in range(horizon):
                x, means = env.begin_round()
                best = int(np.argmax(means))
                arm = best if policy is None else policy.select(x, t + 1)
                rec = env.finish_round(arm)
                if policy is not None:
                    policy.update(arm, x, rec.reward)
                chosen[p, t] = arm
                oracle[p, t] = best
                if realized:
                    instant[p, t] = rec.oracle_reward - rec.reward
                else:
                    instant[p, t] = means[best] - means[arm]
            if policy is not None:
                degenerate[p] = policy.degenerate_events
    except NumericError as exc:
        return _RealizationResult(r, abort_reason=str(exc))
    return _RealizationResult(r, chosen, oracle, instant, degenerate)


def run_experiment(config: ExperimentConfig) -> RegretTrace:
    """Run the full grid of (policy, realization) and aggregate regret.

    Realizations failing with a numeric error are dropped from aggregation
    and counted in ``aborted``; everything else is deterministic in
    ``config.seed`` alone, including under parallel execution.
    """
    runner = partial(_run_realization, config)
    if config.jobs > 1:
        chunk = max(1, config.realizations // (config.jobs * 4))
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(runner, range(config.realizations), chunksize=chunk))
    else:
        results = [runner(r) for r in range(config.realizations)]

    done = [res for res in results if res.abort_reason is None]
    aborted = len(results) - len(done)
    if not done:
        raise NumericError("every realization aborted; nothing to aggregate")
    instant = np.stack([res.instant for res in done], axis=1)
    cum = np.cumsum(instant, axis=2)
    return RegretTrace(
        labels=tuple(p.label for p in config.policies),
        horizon=config.horizon,
        seed=config.seed,
        realizations=config.realizations,
        realization_ids=np.array([res.realization for res in done]),
        aborted=aborted,
        mean_instant=instant.mean(axis=1),
        mean_cum=cum.mean(axis=1),
        std_cum=cum.std(axis=1),
        chosen=np.stack([res.chosen for res in done], axis=1),
        oracle=np.stack([res.oracle for res in done], axis=1),
        instant=instant,
        degenerate_events=np.stack([res.degenerate for res in done], axis=1),
    )
