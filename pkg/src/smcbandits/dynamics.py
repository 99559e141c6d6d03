"""Parameter transition models for restless arms.

Four kinds are supported: frozen parameters, frozen plus a small Gaussian
jitter, a linear-Gaussian evolution with known mixing matrix and noise, and
the same evolution with unknown matrices, marginalized in closed form so that
each particle only carries running second-moment accumulators of its own
trajectory instead of the trajectory itself.

All propagation is vectorized over a leading particle axis, and every function
here is pure: propagating returns fresh arrays, never touching its inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .distributions import cholesky, cholesky_batch, inv_spd
from .errors import ConfigurationError, ContractError, NumericError

# Ridge added to predictive scale matrices after symmetrization.
_SCALE_RIDGE = 1e-9


class DynamicsKind(enum.Enum):
    STATIC = "static"
    STATIC_JITTER = "static_jitter"
    KNOWN_LINEAR = "known_linear"
    UNKNOWN_LINEAR = "unknown_linear"


def _check_spd(name: str, mat: np.ndarray, dim: int, allow_zero: bool = False) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (dim, dim):
        raise ConfigurationError(f"{name} must be a {dim}x{dim} matrix")
    if np.abs(mat - mat.T).max(initial=0.0) > 1e-9 * max(1.0, np.abs(mat).max()):
        raise ConfigurationError(f"{name} must be symmetric")
    if allow_zero and not np.any(mat):
        return mat
    try:
        cholesky(mat)
    except NumericError as exc:
        raise ConfigurationError(f"{name} must be positive definite") from exc
    return mat


@dataclass(frozen=True)
class DynamicsSpec:
    """Transition model for one arm's parameter vector.

    For the known linear kind, ``mixing`` is the transition matrix and
    ``noise_cov`` the innovation covariance (the zero matrix is allowed and
    means a noiseless evolution). For the unknown linear kind the prior is
    matrix-normal-inverse-Wishart shaped: ``prior_mixing`` with column scale
    ``prior_mixing_scale``, and noise shape ``prior_noise_shape`` with
    ``prior_dof`` degrees of freedom.
    """

    kind: DynamicsKind
    dim: int
    jitter: float = 0.01
    mixing: np.ndarray | None = None
    noise_cov: np.ndarray | None = None
    prior_mixing: np.ndarray | None = None
    prior_mixing_scale: np.ndarray | None = None
    prior_noise_shape: np.ndarray | None = None
    prior_dof: float | None = None
    _noise_root: np.ndarray | None = field(default=None, init=False, repr=False)
    _scale_inv: np.ndarray | None = field(default=None, init=False, repr=False)
    _mixing_scale_inv: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("dim must be at least 1")
        if self.kind is DynamicsKind.STATIC_JITTER and self.jitter < 0.0:
            raise ConfigurationError("jitter must be nonnegative")
        if self.kind is DynamicsKind.KNOWN_LINEAR:
            if self.mixing is None or self.noise_cov is None:
                raise ConfigurationError("known linear dynamics need mixing and noise_cov")
            mixing = np.asarray(self.mixing, dtype=float)
            if mixing.shape != (self.dim, self.dim):
                raise ConfigurationError("mixing must be a dim x dim matrix")
            object.__setattr__(self, "mixing", mixing)
            noise = _check_spd("noise_cov", self.noise_cov, self.dim, allow_zero=True)
            object.__setattr__(self, "noise_cov", noise)
            root = cholesky(noise) if np.any(noise) else None
            object.__setattr__(self, "_noise_root", root)
        if self.kind is DynamicsKind.UNKNOWN_LINEAR:
            d = self.dim
            pm = np.eye(d) if self.prior_mixing is None else np.asarray(self.prior_mixing, float)
            if pm.shape != (d, d):
                raise ConfigurationError("prior_mixing must be a dim x dim matrix")
            scale = np.eye(d) if self.prior_mixing_scale is None else self.prior_mixing_scale
            scale = _check_spd("prior_mixing_scale", scale, d)
            shape = np.eye(d) if self.prior_noise_shape is None else self.prior_noise_shape
            shape = _check_spd("prior_noise_shape", shape, d)
            dof = float(d + 2) if self.prior_dof is None else float(self.prior_dof)
            if dof <= d - 1:
                raise ConfigurationError("prior_dof must exceed dim - 1")
            object.__setattr__(self, "prior_mixing", pm)
            object.__setattr__(self, "prior_mixing_scale", scale)
            object.__setattr__(self, "prior_noise_shape", shape)
            object.__setattr__(self, "prior_dof", dof)
            scale_inv = np.linalg.inv(scale)
            object.__setattr__(self, "_scale_inv", scale_inv)
            object.__setattr__(self, "_mixing_scale_inv", pm @ scale_inv)

    @staticmethod
    def static(dim: int) -> "DynamicsSpec":
        return DynamicsSpec(DynamicsKind.STATIC, dim)

    @staticmethod
    def static_jitter(dim: int, jitter: float = 0.01) -> "DynamicsSpec":
        return DynamicsSpec(DynamicsKind.STATIC_JITTER, dim, jitter=jitter)

    @staticmethod
    def known_linear(mixing, noise_cov) -> "DynamicsSpec":
        mixing = np.asarray(mixing, dtype=float)
        return DynamicsSpec(DynamicsKind.KNOWN_LINEAR, mixing.shape[0],
                            mixing=mixing, noise_cov=np.asarray(noise_cov, dtype=float))

    @staticmethod
    def unknown_linear(dim: int, prior_mixing=None, prior_mixing_scale=None,
                       prior_noise_shape=None, prior_dof=None) -> "DynamicsSpec":
        return DynamicsSpec(DynamicsKind.UNKNOWN_LINEAR, dim,
                            prior_mixing=prior_mixing,
                            prior_mixing_scale=prior_mixing_scale,
                            prior_noise_shape=prior_noise_shape,
                            prior_dof=prior_dof)


@dataclass(frozen=True)
class TransitionStats:
    """Per-particle trajectory accumulators, stored with a leading particle axis.

    ``steps`` counts completed propagations (shared by the whole set, since
    all particles of one arm advance in lockstep). The second-moment arrays
    are only allocated for unknown-linear dynamics: for a trajectory
    theta_0 .. theta_k they hold sums of outer products of consecutive states,
    enough to recover the regression of each state on its predecessor.
    """

    steps: int
    s00: np.ndarray | None = None
    s10: np.ndarray | None = None
    s11: np.ndarray | None = None

    @staticmethod
    def initial(count: int, spec: DynamicsSpec) -> "TransitionStats":
        if spec.kind is DynamicsKind.UNKNOWN_LINEAR:
            zeros = np.zeros((count, spec.dim, spec.dim))
            return TransitionStats(0, zeros, zeros.copy(), zeros.copy())
        return TransitionStats(0)

    def take(self, idx) -> "TransitionStats":
        """Row-gather: offspring inherit their parent's accumulators."""
        if self.s00 is None:
            return TransitionStats(self.steps)
        return TransitionStats(self.steps, self.s00[idx], self.s10[idx], self.s11[idx])


def _check_thetas(spec: DynamicsSpec, thetas) -> np.ndarray:
    th = np.asarray(thetas, dtype=float)
    if th.ndim != 2 or th.shape[1] != spec.dim:
        raise ContractError(f"thetas must have shape (count, {spec.dim})")
    return th


def transition_regression(spec: DynamicsSpec, stats: TransitionStats):
    """Posterior regression quantities (scale, mixing estimate, noise shape).

    Returns batched arrays (count, d, d). The mixing estimate shrinks toward
    the prior when the trajectory is short and tends to the least-squares
    solution as evidence accumulates.
    """
    if spec.kind is not DynamicsKind.UNKNOWN_LINEAR:
        raise ContractError("regression posterior exists only for unknown linear dynamics")
    if stats.s00 is None:
        raise ContractError("stats were not built for unknown linear dynamics")
    scale = inv_spd(stats.s00 + spec._scale_inv)
    mix = (stats.s10 + spec._mixing_scale_inv) @ scale
    mix_t = mix.transpose(0, 2, 1)
    resid = stats.s11 - stats.s10 @ mix_t - mix @ stats.s10.transpose(0, 2, 1) \
        + mix @ stats.s00 @ mix_t
    delta = mix - spec.prior_mixing
    shape = resid + delta @ spec._scale_inv @ delta.transpose(0, 2, 1) + spec.prior_noise_shape
    return scale, mix, shape


def transition_posterior_params(spec: DynamicsSpec, stats: TransitionStats, thetas):
    """Predictive Student-t parameters (dof, location, squared-scale) per particle.

    ``thetas`` are the current states; the predictive describes each
    particle's next state after marginalizing the unknown mixing matrix and
    noise covariance against that particle's own trajectory.
    """
    th = _check_thetas(spec, thetas)
    scale, mix, shape = transition_regression(spec, stats)
    dof = spec.prior_dof + (stats.steps + 1) - spec.dim
    if dof <= 0.0:
        raise ConfigurationError("predictive degrees of freedom must be positive")
    loc = np.einsum("mij,mj->mi", mix, th)
    quad = np.einsum("mi,mij,mj->m", th, scale, th)
    pred = shape * ((1.0 + quad) / dof)[:, None, None]
    pred = 0.5 * (pred + pred.transpose(0, 2, 1))
    pred[:, np.arange(spec.dim), np.arange(spec.dim)] += _SCALE_RIDGE
    return dof, loc, pred


def propagate(spec: DynamicsSpec, thetas, stats: TransitionStats,
              rng: np.random.Generator):
    """Advance a batch of particles one step; returns (new thetas, new stats).

    Inputs are left untouched, so callers can propagate previews and discard
    them. Accumulators advance with the (previous, next) state pair and the
    step count always advances by one.
    """
    th = _check_thetas(spec, thetas)
    count = th.shape[0]
    if spec.kind is DynamicsKind.STATIC:
        nxt = th
    elif spec.kind is DynamicsKind.STATIC_JITTER:
        nxt = th + spec.jitter * rng.standard_normal(th.shape)
    elif spec.kind is DynamicsKind.KNOWN_LINEAR:
        nxt = th @ spec.mixing.T
        if spec._noise_root is not None:
            nxt = nxt + rng.standard_normal(th.shape) @ spec._noise_root.T
    else:
        dof, loc, pred = transition_posterior_params(spec, stats, th)
        root = cholesky_batch(pred)
        z = np.einsum("mij,mj->mi", root, rng.standard_normal(th.shape))
        chi2 = 2.0 * rng.standard_gamma(dof / 2.0, size=count)
        nxt = loc + z * np.sqrt(dof / chi2)[:, None]
    if spec.kind is DynamicsKind.UNKNOWN_LINEAR:
        new_stats = TransitionStats(
            stats.steps + 1,
            stats.s00 + th[:, :, None] * th[:, None, :],
            stats.s10 + nxt[:, :, None] * th[:, None, :],
            stats.s11 + nxt[:, :, None] * nxt[:, None, :],
        )
    else:
        new_stats = TransitionStats(stats.steps + 1, stats.s00, stats.s10, stats.s11)
    return nxt, new_stats


def predictive_mixture_sample(spec: DynamicsSpec, thetas, weights,
                              stats: TransitionStats, rng: np.random.Generator) -> np.ndarray:
    """Draw one particle by weight and preview its next state.

    This samples the one-step-ahead parameter mixture without touching the
    stored set: the drawn particle is propagated on a copy of its own
    accumulators and the result returned.
    """
    from .distributions import sample_categorical

    th = _check_thetas(spec, thetas)
    idx = sample_categorical(weights, rng)
    preview, _ = propagate(spec, th[idx:idx + 1], stats.take([idx]), rng)
    return preview[0]
