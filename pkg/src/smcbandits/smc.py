"""Weighted particle sets and the operations the filtering loop needs.

Weights are handled in log space where it matters: reweighting subtracts the
largest log-likelihood before exponentiating, so a uniform shift of the
log-likelihoods leaves the normalized weights bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import DynamicsSpec, TransitionStats
from .errors import ContractError, DegenerateWeightsError

RESAMPLE_SCHEMES = ("multinomial", "systematic")


@dataclass(frozen=True)
class WeightedParticleSet:
    """Particles (count, dim), normalized weights (count,), and transition stats."""

    thetas: np.ndarray
    weights: np.ndarray
    stats: TransitionStats

    @property
    def count(self) -> int:
        return self.thetas.shape[0]


def init_particles(prior_sampler, count: int, dynamics: DynamicsSpec,
                   rng: np.random.Generator) -> WeightedParticleSet:
    """Draw ``count`` particles from the prior with uniform weights.

    ``prior_sampler(rng, count)`` must return an array of shape (count, dim).
    """
    if count < 1:
        raise ContractError("particle count must be at least 1")
    thetas = np.asarray(prior_sampler(rng, count), dtype=float)
    if thetas.shape != (count, dynamics.dim):
        raise ContractError(
            f"prior sampler returned shape {thetas.shape}, expected {(count, dynamics.dim)}")
    weights = np.full(count, 1.0 / count)
    return WeightedParticleSet(thetas, weights, TransitionStats.initial(count, dynamics))


def _check_weights(weights: np.ndarray) -> None:
    if np.any(weights < 0.0):
        raise ContractError("weights must be nonnegative")
    total = weights.sum()
    if total <= 0.0:
        raise DegenerateWeightsError("all weights are zero")
    if abs(total - 1.0) > 1e-9:
        raise ContractError("weights must be normalized")


def resample_indexes(weights: np.ndarray, count: int, rng: np.random.Generator,
                     scheme: str = "multinomial") -> np.ndarray:
    """Draw ``count`` ancestor indexes proportional to ``weights``."""
    _check_weights(weights)
    cum = np.cumsum(weights)
    if scheme == "multinomial":
        u = rng.random(count)
    elif scheme == "systematic":
        u = (rng.random() + np.arange(count)) / count
    else:
        raise ContractError(f"unknown resampling scheme {scheme!r}")
    return np.minimum(np.searchsorted(cum, u, side="right"), weights.size - 1)


def resample(pset: WeightedParticleSet, rng: np.random.Generator,
             scheme: str = "multinomial") -> WeightedParticleSet:
    """Replace the set by offspring drawn by weight; weights become uniform.

    Offspring carry copies of their parent's parameter vector and transition
    accumulators.
    """
    idx = resample_indexes(pset.weights, pset.count, rng, scheme)
    return WeightedParticleSet(pset.thetas[idx],
                               np.full(pset.count, 1.0 / pset.count),
                               pset.stats.take(idx))


def reweight(pset: WeightedParticleSet, log_lik: np.ndarray) -> WeightedParticleSet:
    """Multiply weights by exp(log_lik) and renormalize.

    log_lik entries must be finite or -inf. When every particle lands on
    -inf (zero likelihood everywhere) a DegenerateWeightsError is raised so
    the caller can decide how to recover.
    """
    ll = np.asarray(log_lik, dtype=float)
    if ll.shape != (pset.count,):
        raise ContractError("log_lik must have one entry per particle")
    if np.any(np.isnan(ll)) or np.any(ll == np.inf):
        raise ContractError("log-likelihoods must be finite or -inf")
    shift = ll.max()
    if shift == -np.inf:
        raise DegenerateWeightsError("all particles have zero likelihood")
    raw = pset.weights * np.exp(ll - shift)
    total = raw.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateWeightsError("weights collapsed to zero mass")
    return replace(pset, weights=raw / total)


def uniform_weights(pset: WeightedParticleSet) -> WeightedParticleSet:
    """Reset to uniform weights; the recovery move for degenerate reweights."""
    return replace(pset, weights=np.full(pset.count, 1.0 / pset.count))


def weighted_estimate(pset: WeightedParticleSet, f) -> float:
    """Posterior expectation of ``f`` under the particle approximation.

    ``f`` is either a vectorized callable mapping the (count, dim) particle
    array to (count,) values, or a precomputed value array.
    """
    values = f(pset.thetas) if callable(f) else np.asarray(f, dtype=float)
    if values.shape != (pset.count,):
        raise ContractError("estimate values must have one entry per particle")
    return float(pset.weights @ values)


def weighted_quantile(values, weights, alpha: float) -> float:
    """Largest value v whose atoms at or above v carry total weight >= alpha.

    The atom at v counts toward its own tail mass. alpha must lie in (0, 1)
    and the weights must be a normalized probability vector.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.ndim != 1 or values.size == 0 or values.shape != weights.shape:
        raise ContractError("values and weights must be matching nonempty vectors")
    if not 0.0 < alpha < 1.0:
        raise ContractError("alpha must lie strictly inside (0, 1)")
    _check_weights(weights)
    order = np.argsort(-values, kind="stable")
    tail = np.cumsum(weights[order])
    pos = min(int(np.searchsorted(tail, alpha, side="left")), values.size - 1)
    return float(values[order[pos]])


def effective_sample_size(pset: WeightedParticleSet) -> float:
    """1 / sum of squared weights; equals count for uniform weights."""
    return float(1.0 / np.sum(pset.weights ** 2))
