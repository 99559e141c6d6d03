"""Simulated bandit environments with optionally drifting arm parameters.

A round proceeds as: every arm's true parameter vector takes one step of its
dynamics, the pending context is revealed, the policy picks an arm, and the
reward is drawn from the played arm's fresh parameters. Parameter evolution,
context generation, and reward noise use three separate substreams, so the
true trajectory never depends on which arms a policy happens to play.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import DynamicsSpec, TransitionStats, propagate
from .errors import ConfigurationError, ContractError
from .reward_models import RewardKind, RewardModelSpec, expected_reward, sample_reward


class ContextKind(enum.Enum):
    CONSTANT = "constant"
    GAUSSIAN_IID = "gaussian"
    UNIFORM_IID = "uniform"


@dataclass(frozen=True)
class ContextSource:
    """Where round contexts come from; uniform draws live on [0, 1)."""

    kind: ContextKind
    dim: int
    value: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("context dimension must be at least 1")
        if self.kind is ContextKind.CONSTANT:
            if self.value is None:
                raise ConfigurationError("constant context needs a value")
            value = np.asarray(self.value, dtype=float)
            if value.shape != (self.dim,):
                raise ConfigurationError("constant context value has the wrong shape")
            object.__setattr__(self, "value", value)

    @staticmethod
    def constant(value) -> "ContextSource":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return ContextSource(ContextKind.CONSTANT, value.size, value)

    @staticmethod
    def gaussian(dim: int) -> "ContextSource":
        return ContextSource(ContextKind.GAUSSIAN_IID, dim)

    @staticmethod
    def uniform(dim: int) -> "ContextSource":
        return ContextSource(ContextKind.UNIFORM_IID, dim)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind is ContextKind.CONSTANT:
            return self.value
        if self.kind is ContextKind.GAUSSIAN_IID:
            return rng.standard_normal(self.dim)
        return rng.random(self.dim)


@dataclass(frozen=True)
class EnvironmentSpec:
    """True data-generating process: reward family, per-arm dynamics, contexts.

    ``theta0`` pins the initial parameter matrix (arms x param_dim); None
    draws it fresh from a standard Gaussian at every reset.
    """

    reward: RewardModelSpec
    dynamics: tuple[DynamicsSpec, ...]
    context: ContextSource
    theta0: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if len(self.dynamics) < 1:
            raise ConfigurationError("need at least one arm")
        for dyn in self.dynamics:
            if dyn.dim != self.reward.param_dim:
                raise ConfigurationError(
                    "every arm's dynamics dim must equal the reward parameter dim")
        if self.context.dim != self.reward.context_dim:
            raise ConfigurationError("context source dim must match the reward model")
        if self.theta0 is not None:
            theta0 = np.asarray(self.theta0, dtype=float)
            if theta0.shape != (len(self.dynamics), self.reward.param_dim):
                raise ConfigurationError(
                    f"theta0 must have shape {(len(self.dynamics), self.reward.param_dim)}")
            object.__setattr__(self, "theta0", theta0)

    @property
    def n_arms(self) -> int:
        return len(self.dynamics)


@dataclass(frozen=True)
class StepRecord:
    """Everything observable (and the hidden means) about one played round."""

    t: int
    context: np.ndarray
    true_means: np.ndarray
    arm: int
    reward: float
    oracle_reward: float | None = None


def oracle_arm(record: StepRecord) -> int:
    """Arm with the highest true mean this round; first index wins ties."""
    return int(np.argmax(record.true_means))


class BanditEnvironment:
    """One realization of an environment spec, driven round by round.

    ``begin_round`` evolves the truth and reveals the context (and, to the
    harness, the true means); ``finish_round`` samples the played arm's
    reward and readies the next context. ``step`` does both for callers that
    already know their arm choice.
    """

    def __init__(self, spec: EnvironmentSpec, rng: np.random.Generator,
                 sample_oracle: bool = False):
        self.spec = spec
        self.sample_oracle = sample_oracle
        self._dyn_rng, self._ctx_rng, self._rew_rng = rng.spawn(3)
        self.reset()

    def reset(self) -> np.ndarray:
        """Draw fresh initial parameters; returns the first round's context."""
        spec = self.spec
        if spec.theta0 is None:
            self._thetas = self._dyn_rng.standard_normal(
                (spec.n_arms, spec.reward.param_dim))
        else:
            self._thetas = spec.theta0.copy()
        self._stats = [TransitionStats.initial(1, dyn) for dyn in spec.dynamics]
        self._context = spec.context.draw(self._ctx_rng)
        self._means = None
        self._round = 0
        return self._context

    @property
    def rounds_played(self) -> int:
        return self._round

    @property
    def true_thetas(self) -> np.ndarray:
        return self._thetas.copy()

    def begin_round(self) -> tuple[np.ndarray, np.ndarray]:
        """Advance the truth one step; returns (context, true means)."""
        if self._means is not None:
            raise ContractError("finish_round must be called before the next begin_round")
        nxt = np.empty_like(self._thetas)
        for a, dyn in enumerate(self.spec.dynamics):
            stepped, self._stats[a] = propagate(dyn, self._thetas[a:a + 1],
                                                self._stats[a], self._dyn_rng)
            nxt[a] = stepped[0]
        self._thetas = nxt
        self._means = expected_reward(self.spec.reward, self._thetas, self._context)
        return self._context, self._means

    def finish_round(self, arm: int) -> StepRecord:
        """Sample the played arm's reward and stage the next context."""
        if self._means is None:
            raise ContractError("begin_round must be called before finish_round")
        if not 0 <= arm < self.spec.n_arms:
            raise ContractError("arm index out of range")
        reward = float(sample_reward(self.spec.reward, self._thetas[arm],
                                     self._context, self._rew_rng))
        oracle_reward = None
        if self.sample_oracle:
            best = int(np.argmax(self._means))
            oracle_reward = reward if best == arm else float(
                sample_reward(self.spec.reward, self._thetas[best],
                              self._context, self._rew_rng))
        self._round += 1
        record = StepRecord(self._round, self._context, self._means, int(arm),
                            reward, oracle_reward)
        self._context = self.spec.context.draw(self._ctx_rng)
        self._means = None
        return record

    def step(self, arm: int) -> StepRecord:
        """Evolve, then play ``arm`` against the context emitted last round."""
        self.begin_round()
        return self.finish_round(arm)


_MIX_COUPLED_NEG = np.array([[0.9, -0.1], [-0.1, 0.9]])
_MIX_COUPLED_POS = np.array([[0.9, 0.1], [0.1, 0.9]])
_MIX_DAMPED = np.array([[0.5, 0.0], [0.0, 0.5]])
_DRIFT_NOISE = 0.1

SCENARIO_NAMES = (
    "scenario_a",
    "scenario_b",
    "categorical_2arm",
    "categorical_3arm",
    "static_bernoulli",
    "static_linear_gaussian",
    "static_logistic",
)


def _drift(mix: np.ndarray, blocks: int = 1) -> DynamicsSpec:
    full = np.kron(np.eye(blocks), mix) if blocks > 1 else mix
    return DynamicsSpec.known_linear(full, _DRIFT_NOISE * np.eye(full.shape[0]))


def scenario_catalog(name: str, reward_kind: str | None = None,
                     theta0=None) -> EnvironmentSpec:
    """Build one of the named benchmark environments.

    ``reward_kind`` switches the two drifting 2-arm scenarios between
    linear_gaussian (default) and logistic rewards; ``theta0`` overrides the
    initial parameters where the scenario does not already pin them.
    """
    if name not in SCENARIO_NAMES:
        raise ConfigurationError(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}")
    if name in ("scenario_a", "scenario_b"):
        if reward_kind in (None, "linear_gaussian"):
            reward = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2,
                                     known_variance=1.0)
        elif reward_kind == "logistic":
            reward = RewardModelSpec(RewardKind.LOGISTIC, context_dim=2)
        else:
            raise ConfigurationError(
                "drifting scenarios support linear_gaussian or logistic rewards")
        first = _MIX_COUPLED_NEG if name == "scenario_a" else _MIX_DAMPED
        return EnvironmentSpec(
            reward=reward,
            dynamics=(_drift(first), _drift(_MIX_COUPLED_POS)),
            context=ContextSource.constant(np.ones(2)),
            theta0=theta0,
            name=name,
        )
    if reward_kind is not None:
        raise ConfigurationError(f"{name} does not take a reward_kind override")
    if name in ("categorical_2arm", "categorical_3arm"):
        reward = RewardModelSpec(RewardKind.CATEGORICAL, context_dim=2, categories=3)
        arms = [_drift(_MIX_COUPLED_NEG, blocks=3), _drift(_MIX_COUPLED_POS, blocks=3)]
        if name == "categorical_3arm":
            arms.append(_drift(_MIX_COUPLED_POS, blocks=3))
        return EnvironmentSpec(
            reward=reward,
            dynamics=tuple(arms),
            context=ContextSource.constant(np.ones(2)),
            theta0=theta0,
            name=name,
        )
    if name == "static_bernoulli":
        theta0 = np.array([[0.4], [0.8]]) if theta0 is None else np.asarray(theta0, float)
        return EnvironmentSpec(
            reward=RewardModelSpec(RewardKind.BERNOULLI),
            dynamics=tuple(DynamicsSpec.static(1) for _ in range(theta0.shape[0])),
            context=ContextSource.constant(np.ones(1)),
            theta0=theta0,
            name=name,
        )
    if name == "static_linear_gaussian":
        reward = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2,
                                 known_variance=1.0)
    else:
        reward = RewardModelSpec(RewardKind.LOGISTIC, context_dim=2)
    return EnvironmentSpec(
        reward=reward,
        dynamics=(DynamicsSpec.static(2), DynamicsSpec.static(2)),
        context=ContextSource.gaussian(2),
        theta0=theta0,
        name=name,
    )
