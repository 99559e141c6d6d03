"""Observation models for arm rewards.

Each model maps an arm parameter vector and a context to a reward law.
Likelihoods and means are vectorized over a leading particle axis, since the
filtering loop evaluates them for every particle of the played arm. The
conjugate sufficient statistics (Beta and normal-inverse-gamma) used by the
closed-form baseline policies live here as well.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import Beta, Distribution, Gaussian, StudentT, sample_categorical
from .errors import ContractError, ConfigurationError, UnsupportedModelError

# Success probabilities are clamped here before any Bernoulli computation;
# parameter dynamics are free to push particles outside (0, 1).
_P_FLOOR = 1e-12


class RewardKind(enum.Enum):
    BERNOULLI = "bernoulli"
    LINEAR_GAUSSIAN = "linear_gaussian"
    LOGISTIC = "logistic"
    CATEGORICAL = "categorical_softmax"


@dataclass(frozen=True)
class RewardModelSpec:
    """Reward family plus its shape parameters.

    Args:
        kind: observation family.
        context_dim: context dimension d (1 for the non-contextual Bernoulli,
            where a constant context is conventional).
        categories: number of reward categories C, categorical family only.
        known_variance: observation variance for the linear-Gaussian family;
            None means the variance is treated as unknown, which only the
            conjugate (normal-inverse-gamma) machinery supports.
    """

    kind: RewardKind
    context_dim: int = 1
    categories: int = 2
    known_variance: float | None = None

    def __post_init__(self):
        if self.context_dim < 1:
            raise ConfigurationError("context_dim must be at least 1")
        if self.kind is RewardKind.BERNOULLI and self.context_dim != 1:
            raise ConfigurationError("Bernoulli rewards use context_dim = 1")
        if self.kind is RewardKind.CATEGORICAL and self.categories < 2:
            raise ConfigurationError("categorical rewards need at least 2 categories")
        if self.known_variance is not None and self.known_variance <= 0.0:
            raise ConfigurationError("known_variance must be positive")

    @property
    def param_dim(self) -> int:
        """Length of one arm's parameter vector."""
        if self.kind is RewardKind.BERNOULLI:
            return 1
        if self.kind is RewardKind.CATEGORICAL:
            return self.categories * self.context_dim
        return self.context_dim


def _as_batch(spec: RewardModelSpec, theta) -> tuple[np.ndarray, bool]:
    th = np.asarray(theta, dtype=float)
    single = th.ndim == 1
    if single:
        th = th[None, :]
    if th.ndim != 2 or th.shape[1] != spec.param_dim:
        raise ContractError(
            f"theta must have {spec.param_dim} columns for {spec.kind.value}")
    return th, single


def _check_context(spec: RewardModelSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.context_dim,):
        raise ContractError(f"context must have shape ({spec.context_dim},)")
    return x


def _check_binary(y: float) -> float:
    if y not in (0.0, 1.0):
        raise ContractError("reward must be 0 or 1 for this model")
    return float(y)


def _known_sigma2(spec: RewardModelSpec) -> float:
    if spec.known_variance is None:
        raise ConfigurationError(
            "linear-Gaussian likelihood needs known_variance; leave it unset "
            "only for the conjugate unknown-variance path")
    return spec.known_variance


def _category_logits(spec: RewardModelSpec, th: np.ndarray, x: np.ndarray) -> np.ndarray:
    # One parameter block of length d per category, stacked row-major.
    blocks = th.reshape(th.shape[0], spec.categories, spec.context_dim)
    return blocks @ x


def log_likelihood(spec: RewardModelSpec, theta, x, y):
    """Log p(y | theta, x), vectorized over a leading particle axis of theta."""
    th, single = _as_batch(spec, theta)
    x = _check_context(spec, x)
    if spec.kind is RewardKind.BERNOULLI:
        y = _check_binary(y)
        p = np.clip(th[:, 0], _P_FLOOR, 1.0 - _P_FLOOR)
        out = y * np.log(p) + (1.0 - y) * np.log1p(-p)
    elif spec.kind is RewardKind.LINEAR_GAUSSIAN:
        sigma2 = _known_sigma2(spec)
        resid = float(y) - th @ x
        # Squared residuals may overflow to inf; that is the legal -inf
        # log-likelihood, so keep numpy quiet about it.
        with np.errstate(over="ignore"):
            out = -0.5 * math.log(2.0 * math.pi * sigma2) - resid * resid / (2.0 * sigma2)
    elif spec.kind is RewardKind.LOGISTIC:
        y = _check_binary(y)
        z = th @ x
        out = y * z - np.logaddexp(0.0, z)
    else:
        c = int(y)
        if c != y or not 0 <= c < spec.categories:
            raise ContractError("categorical reward must be an integer category index")
        z = _category_logits(spec, th, x)
        out = z[:, c] - special.logsumexp(z, axis=1)
    return float(out[0]) if single else out


def expected_reward(spec: RewardModelSpec, theta, x):
    """Mean reward under the model, vectorized like log_likelihood."""
    th, single = _as_batch(spec, theta)
    x = _check_context(spec, x)
    if spec.kind is RewardKind.BERNOULLI:
        out = np.clip(th[:, 0], 0.0, 1.0)
    elif spec.kind is RewardKind.LINEAR_GAUSSIAN:
        out = th @ x
    elif spec.kind is RewardKind.LOGISTIC:
        out = special.expit(th @ x)
    else:
        probs = special.softmax(_category_logits(spec, th, x), axis=1)
        out = probs @ np.arange(spec.categories, dtype=float)
    return float(out[0]) if single else out


def sample_reward(spec: RewardModelSpec, theta, x, rng: np.random.Generator,
                  size: int | None = None):
    """Draw rewards for a single parameter vector theta."""
    th, single = _as_batch(spec, theta)
    if not single:
        raise ContractError("sample_reward takes one parameter vector at a time")
    x = _check_context(spec, x)
    n = 1 if size is None else int(size)
    if spec.kind is RewardKind.BERNOULLI:
        p = float(np.clip(th[0, 0], 0.0, 1.0))
        out = (rng.random(n) < p).astype(float)
    elif spec.kind is RewardKind.LINEAR_GAUSSIAN:
        sigma2 = _known_sigma2(spec)
        out = float(th[0] @ x) + math.sqrt(sigma2) * rng.standard_normal(n)
    elif spec.kind is RewardKind.LOGISTIC:
        p = float(special.expit(th[0] @ x))
        out = (rng.random(n) < p).astype(float)
    else:
        probs = special.softmax(_category_logits(spec, th, x)[0])
        out = sample_categorical(probs, rng, size=n).astype(float)
    return float(out[0]) if size is None else out


@dataclass(frozen=True)
class BetaStats:
    """Beta(a, b) posterior over a Bernoulli success probability."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise ContractError("Beta counts must stay positive")


def beta_update(stats: BetaStats, y: float) -> BetaStats:
    """One conjugate step: success bumps a, failure bumps b."""
    y = _check_binary(y)
    return BetaStats(stats.a + y, stats.b + 1.0 - y)


@dataclass(frozen=True)
class NigStats:
    """Normal-inverse-gamma posterior over regression weights and noise variance.

    Fields are the mean ``u``, covariance shape ``v`` with its inverse kept
    alongside, and inverse-gamma parameters ``a``, ``b``.
    """

    u: np.ndarray
    v: np.ndarray
    v_inv: np.ndarray
    a: float
    b: float

    @staticmethod
    def default(dim: int, a: float = 1.0, b: float = 1.0) -> "NigStats":
        eye = np.eye(dim)
        return NigStats(np.zeros(dim), eye.copy(), eye.copy(), a, b)


def nig_update(stats: NigStats, x, y: float) -> NigStats:
    """One conjugate regression step with context x and observation y.

    Rank-1 update; the covariance downdate uses the Sherman-Morrison form so
    ``v`` and ``v_inv`` stay consistent without a matrix inversion.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != stats.u.shape:
        raise ContractError("context dimension does not match the statistics")
    y = float(y)
    vx = stats.v @ x
    denom = 1.0 + float(x @ vx)
    v_new = stats.v - np.outer(vx, vx) / denom
    v_new = 0.5 * (v_new + v_new.T)
    v_inv_new = stats.v_inv + np.outer(x, x)
    u_new = v_new @ (stats.v_inv @ stats.u + x * y)
    resid = y - float(x @ stats.u)
    return NigStats(u_new, v_new, v_inv_new,
                    stats.a + 0.5, stats.b + resid * resid / (2.0 * denom))


def exact_predictive(spec: RewardModelSpec, stats, x) -> Distribution:
    """Closed-form posterior law of the mean reward, where one exists."""
    if spec.kind is RewardKind.BERNOULLI:
        if not isinstance(stats, BetaStats):
            raise ContractError("Bernoulli predictive needs BetaStats")
        return Beta(stats.a, stats.b)
    if spec.kind is RewardKind.LINEAR_GAUSSIAN:
        if not isinstance(stats, NigStats):
            raise ContractError("linear-Gaussian predictive needs NigStats")
        x = _check_context(spec, x)
        loc = float(x @ stats.u)
        shape = float(x @ stats.v @ x)
        if spec.known_variance is not None:
            return Gaussian(loc, spec.known_variance * shape)
        return StudentT(2.0 * stats.a, loc, (stats.b / stats.a) * shape)
    raise UnsupportedModelError(
        f"no closed-form predictive for {spec.kind.value} rewards")
