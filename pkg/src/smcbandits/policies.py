"""Arm-selection policies over per-arm posterior state.

Two families: particle policies, which hold a weighted particle set per arm
and rate arms through one-step-ahead previews of the propagated posterior,
and exact policies, which hold conjugate sufficient statistics and only apply
to static arms. Selection never mutates arm state; all posterior movement
happens in the update step, which resamples and propagates every arm and
reweights the played one by its reward likelihood.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import reward_models as rm
from .distributions import quantile, sample_mvn
from .dynamics import (DynamicsKind, DynamicsSpec, TransitionStats,
                       predictive_mixture_sample, propagate)
from .errors import ConfigurationError, ContractError, DegenerateWeightsError
from .smc import (RESAMPLE_SCHEMES, WeightedParticleSet, init_particles,
                  resample, resample_indexes, reweight, uniform_weights,
                  weighted_quantile)

ArmDynamics = DynamicsSpec | tuple[DynamicsSpec, ...]


def _per_arm(dynamics: ArmDynamics, n_arms: int) -> tuple[DynamicsSpec, ...]:
    """Normalize to one dynamics spec per arm."""
    if isinstance(dynamics, DynamicsSpec):
        return (dynamics,) * n_arms
    dynamics = tuple(dynamics)
    if len(dynamics) != n_arms:
        raise ContractError(f"expected {n_arms} dynamics specs, got {len(dynamics)}")
    return dynamics


class PolicyKind(enum.Enum):
    THOMPSON_SMC = "thompson_smc"
    BAYES_UCB_SMC = "bayes_ucb_smc"
    THOMPSON_EXACT = "thompson_exact"
    BAYES_UCB_EXACT = "bayes_ucb_exact"
    UNIFORM_RANDOM = "uniform_random"


SMC_KINDS = (PolicyKind.THOMPSON_SMC, PolicyKind.BAYES_UCB_SMC)
EXACT_KINDS = (PolicyKind.THOMPSON_EXACT, PolicyKind.BAYES_UCB_EXACT)


@dataclass(frozen=True)
class PolicySpec:
    """Policy kind plus its sampling knobs."""

    kind: PolicyKind
    particles: int = 1000
    resample_scheme: str = "multinomial"
    prior_scale: float = 1.0

    def __post_init__(self):
        if self.particles < 1:
            raise ConfigurationError("particles must be at least 1")
        if self.resample_scheme not in RESAMPLE_SCHEMES:
            raise ConfigurationError(f"unknown resample scheme {self.resample_scheme!r}")
        if self.prior_scale <= 0.0:
            raise ConfigurationError("prior_scale must be positive")


def default_alpha(t: int, particles: int | None = None) -> float:
    """Shrinking quantile level 1/t, clipped away from 0 and 1.

    Particle policies clip at the atom resolution 1/particles; exact
    policies only need to stay inside the open interval.
    """
    if t < 1:
        raise ContractError("round index must be at least 1")
    lo = 1.0 / particles if particles else 1e-9
    return min(max(1.0 / t, lo), 1.0 - lo)


def argmax_tiebreak(values, rng: np.random.Generator) -> int:
    """Index of the maximum, drawn uniformly among exact ties."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ContractError("values must be a nonempty vector")
    if np.any(np.isnan(values)):
        raise ContractError("values must not contain NaN")
    ties = np.flatnonzero(values == values.max())
    if ties.size == 1:
        return int(ties[0])
    return int(ties[rng.integers(ties.size)])


@dataclass(frozen=True)
class SmcArmState:
    """Particle posterior for one arm."""

    particles: WeightedParticleSet
    plays: int = 0


@dataclass(frozen=True)
class ExactArmState:
    """Conjugate posterior for one arm."""

    stats: rm.BetaStats | rm.NigStats
    plays: int = 0


def _stacked(arm_states: list[SmcArmState]):
    """Stack per-arm particle arrays along a leading arm axis."""
    counts = {st.particles.count for st in arm_states}
    steps = {st.particles.stats.steps for st in arm_states}
    if len(counts) != 1 or len(steps) != 1:
        raise ContractError("arms must share particle count and step count")
    thetas = np.stack([st.particles.thetas for st in arm_states])
    weights = np.stack([st.particles.weights for st in arm_states])
    return thetas, weights, steps.pop()


def select_thompson_smc(reward: rm.RewardModelSpec, dynamics: ArmDynamics,
                        arm_states: list[SmcArmState], x,
                        rng: np.random.Generator) -> int:
    """One posterior draw per arm, propagated a step ahead; play the best.

    The previews are drawn from each arm's one-step-ahead mixture and
    discarded afterwards; stored state is untouched.
    """
    dyn = _per_arm(dynamics, len(arm_states))
    if any(d is not dyn[0] for d in dyn):
        scores = [
            float(rm.expected_reward(
                reward,
                predictive_mixture_sample(dyn[a], st.particles.thetas,
                                          st.particles.weights, st.particles.stats,
                                          rng),
                x))
            for a, st in enumerate(arm_states)
        ]
        return argmax_tiebreak(scores, rng)
    # Shared dynamics: draw all arms' previews in one propagation batch.
    thetas, weights, steps = _stacked(arm_states)
    n_arms = thetas.shape[0]
    u = rng.random(n_arms)
    cum = np.cumsum(weights, axis=1)
    idx = np.empty(n_arms, dtype=np.intp)
    for a in range(n_arms):
        idx[a] = min(np.searchsorted(cum[a], u[a], side="right"), cum.shape[1] - 1)
    picked = thetas[np.arange(n_arms), idx]
    stats0 = arm_states[0].particles.stats
    if stats0.s00 is None:
        picked_stats = TransitionStats(steps)
    else:
        s00 = np.stack([st.particles.stats.s00[idx[a]] for a, st in enumerate(arm_states)])
        s10 = np.stack([st.particles.stats.s10[idx[a]] for a, st in enumerate(arm_states)])
        s11 = np.stack([st.particles.stats.s11[idx[a]] for a, st in enumerate(arm_states)])
        picked_stats = TransitionStats(steps, s00, s10, s11)
    previews, _ = propagate(dyn[0], picked, picked_stats, rng)
    scores = rm.expected_reward(reward, previews, x)
    return argmax_tiebreak(scores, rng)


def select_bayes_ucb_smc(reward: rm.RewardModelSpec, dynamics: ArmDynamics,
                         arm_states: list[SmcArmState], x, t: int,
                         rng: np.random.Generator, alpha: float | None = None) -> int:
    """Upper-quantile scores from propagated candidate clouds.

    Per arm, a full resample of candidates is propagated one step and the
    level-alpha upper quantile of their mean rewards (equal candidate
    weights) is the arm's score. alpha defaults to 1/t clipped at the
    particle resolution.
    """
    dyn = _per_arm(dynamics, len(arm_states))
    count = arm_states[0].particles.count
    if alpha is None:
        alpha = default_alpha(t, count)
    flat = np.full(count, 1.0 / count)
    scores = np.empty(len(arm_states))
    for a, st in enumerate(arm_states):
        ps = st.particles
        idx = resample_indexes(ps.weights, count, rng)
        cand, _ = propagate(dyn[a], ps.thetas[idx], ps.stats.take(idx), rng)
        scores[a] = weighted_quantile(rm.expected_reward(reward, cand, x), flat, alpha)
    return argmax_tiebreak(scores, rng)


def select_exact(reward: rm.RewardModelSpec, arm_states: list[ExactArmState], x,
                 t: int, rng: np.random.Generator, kind: PolicyKind,
                 alpha: float | None = None) -> int:
    """Conjugate counterparts: posterior draws or exact predictive quantiles."""
    if kind not in EXACT_KINDS:
        raise ContractError("select_exact handles only the exact policy kinds")
    scores = np.empty(len(arm_states))
    if kind is PolicyKind.THOMPSON_EXACT:
        for a, st in enumerate(arm_states):
            scores[a] = _exact_posterior_draw(reward, st.stats, x, rng)
    else:
        if alpha is None:
            alpha = default_alpha(t)
        for a, st in enumerate(arm_states):
            scores[a] = quantile(rm.exact_predictive(reward, st.stats, x), 1.0 - alpha)
    return argmax_tiebreak(scores, rng)


def _exact_posterior_draw(reward: rm.RewardModelSpec, stats, x,
                          rng: np.random.Generator) -> float:
    if reward.kind is rm.RewardKind.BERNOULLI:
        return float(rng.beta(stats.a, stats.b))
    if reward.kind is rm.RewardKind.LINEAR_GAUSSIAN:
        if reward.known_variance is not None:
            sigma2 = reward.known_variance
        else:
            sigma2 = stats.b / rng.standard_gamma(stats.a)
        w = sample_mvn(stats.u, sigma2 * stats.v, rng)
        return float(np.asarray(x, dtype=float) @ w)
    raise ConfigurationError(f"exact policies do not support {reward.kind.value} rewards")


def update_arms(reward: rm.RewardModelSpec, dynamics: ArmDynamics | None,
                arm_states: list, played: int, x, y,
                rng: np.random.Generator, scheme: str = "multinomial"):
    """Advance every arm one round after playing ``played`` and observing ``y``.

    Particle arms: resample by current weights, propagate, and reweight the
    played arm by its likelihood of ``y``. A degenerate reweight (all-zero
    mass) recovers with uniform weights instead of aborting; the number of
    such recoveries is returned next to the new states.

    Exact arms: conjugate update of the played arm only.
    """
    if not 0 <= played < len(arm_states):
        raise ContractError("played arm index out of range")
    degenerate = 0
    new_states = []
    if isinstance(arm_states[0], SmcArmState):
        dyn = _per_arm(dynamics, len(arm_states))
        for a, st in enumerate(arm_states):
            ps = resample(st.particles, rng, scheme)
            thetas, stats = propagate(dyn[a], ps.thetas, ps.stats, rng)
            ps = WeightedParticleSet(thetas, ps.weights, stats)
            if a == played:
                try:
                    ps = reweight(ps, rm.log_likelihood(reward, thetas, x, y))
                except DegenerateWeightsError:
                    ps = uniform_weights(ps)
                    degenerate += 1
            new_states.append(SmcArmState(ps, st.plays + (a == played)))
    else:
        for a, st in enumerate(arm_states):
            if a != played:
                new_states.append(st)
                continue
            if reward.kind is rm.RewardKind.BERNOULLI:
                stats = rm.beta_update(st.stats, y)
            elif reward.kind is rm.RewardKind.LINEAR_GAUSSIAN:
                stats = rm.nig_update(st.stats, x, y)
            else:
                raise ConfigurationError(
                    f"exact policies do not support {reward.kind.value} rewards")
            new_states.append(ExactArmState(stats, st.plays + 1))
    return new_states, degenerate


class Policy:
    """Stateful driver tying a policy spec to per-arm posteriors and a stream.

    Args:
        spec: policy kind and knobs.
        reward: observation model the policy assumes.
        n_arms: number of arms.
        rng: private stream; all of the policy's randomness comes from here.
        dynamics: parameter dynamics the policy assumes. Required for the
            particle kinds; exact kinds demand static (or absent) dynamics.
    """

    def __init__(self, spec: PolicySpec, reward: rm.RewardModelSpec, n_arms: int,
                 rng: np.random.Generator, dynamics: ArmDynamics | None = None):
        if n_arms < 1:
            raise ConfigurationError("need at least one arm")
        self.spec = spec
        self.reward = reward
        self.dynamics = None if dynamics is None else _per_arm(dynamics, n_arms)
        self.n_arms = n_arms
        self.rng = rng
        self.degenerate_events = 0
        self.arm_states: list = []
        if spec.kind in SMC_KINDS:
            if self.dynamics is None:
                raise ConfigurationError("particle policies need a dynamics spec")
            if any(d.dim != reward.param_dim for d in self.dynamics):
                raise ConfigurationError("dynamics dim must equal the parameter dim")
            sampler = _prior_sampler(reward, spec.prior_scale)
            self.arm_states = [
                SmcArmState(init_particles(sampler, spec.particles, d, rng))
                for d in self.dynamics
            ]
        elif spec.kind in EXACT_KINDS:
            if self.dynamics is not None and any(
                    d.kind is not DynamicsKind.STATIC for d in self.dynamics):
                raise ConfigurationError(
                    "exact conjugate policies assume static parameters")
            if reward.kind is rm.RewardKind.BERNOULLI:
                self.arm_states = [ExactArmState(rm.BetaStats()) for _ in range(n_arms)]
            elif reward.kind is rm.RewardKind.LINEAR_GAUSSIAN:
                self.arm_states = [ExactArmState(rm.NigStats.default(reward.context_dim))
                                   for _ in range(n_arms)]
            else:
                raise ConfigurationError(
                    f"exact policies do not support {reward.kind.value} rewards")

    def select(self, x, t: int) -> int:
        """Choose an arm for round ``t`` given context ``x``."""
        kind = self.spec.kind
        if kind is PolicyKind.UNIFORM_RANDOM:
            return int(self.rng.integers(self.n_arms))
        if kind is PolicyKind.THOMPSON_SMC:
            return select_thompson_smc(self.reward, self.dynamics, self.arm_states,
                                       x, self.rng)
        if kind is PolicyKind.BAYES_UCB_SMC:
            return select_bayes_ucb_smc(self.reward, self.dynamics, self.arm_states,
                                        x, t, self.rng)
        return select_exact(self.reward, self.arm_states, x, t, self.rng, kind)

    def update(self, arm: int, x, y: float) -> None:
        """Fold the observed (arm, context, reward) triple into the posterior."""
        if self.spec.kind is PolicyKind.UNIFORM_RANDOM:
            return
        self.arm_states, events = update_arms(
            self.reward, self.dynamics, self.arm_states, arm, x, y,
            self.rng, self.spec.resample_scheme)
        self.degenerate_events += events


def _prior_sampler(reward: rm.RewardModelSpec, scale: float):
    dim = reward.param_dim
    if reward.kind is rm.RewardKind.BERNOULLI:
        return lambda rng, count: rng.random((count, 1))
    return lambda rng, count: scale * rng.standard_normal((count, dim))
