"""Random number streams, samplers, and small numeric kernels.

Everything downstream draws randomness through the generators built here, so
experiments stay reproducible: streams are counter-based (Philox) and derived
from an integer seed plus an optional tuple key, which makes per-realization
substreams independent of scheduling order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ContractError, DomainError, NumericError

_QUANTILE_MAX_ITER = 200


def stream(seed: int) -> np.random.Generator:
    """Return a counter-based generator for the given seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return a generator derived from (seed, key).

    Distinct keys give statistically independent streams; the same
    (seed, key) always reproduces the same sequence.
    """
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(seq))


def cholesky(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix.

    Raises NumericError when the matrix is not positive definite.
    """
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"matrix is not positive definite: {exc}") from exc


def inv_spd(mats: np.ndarray) -> np.ndarray:
    """Inverse of a stack (..., d, d) of SPD matrices.

    Small dimensions use closed forms, which matters in the particle loops;
    anything larger falls back to LAPACK.
    """
    d = mats.shape[-1]
    if d == 1:
        diag = mats[..., 0, 0]
        if np.any(diag <= 0.0):
            raise NumericError("1x1 matrix not positive definite")
        return (1.0 / diag)[..., None, None]
    if d == 2:
        a = mats[..., 0, 0]
        b = mats[..., 0, 1]
        c = mats[..., 1, 0]
        e = mats[..., 1, 1]
        det = a * e - b * c
        if np.any(det <= 0.0) or np.any(a <= 0.0):
            raise NumericError("2x2 matrix not positive definite")
        out = np.empty_like(mats)
        out[..., 0, 0] = e
        out[..., 0, 1] = -b
        out[..., 1, 0] = -c
        out[..., 1, 1] = a
        out /= det[..., None, None]
        return out
    try:
        return np.linalg.inv(mats)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular matrix in batched inverse: {exc}") from exc


def cholesky_batch(mats: np.ndarray) -> np.ndarray:
    """Lower Cholesky factors of a stack (..., d, d) of SPD matrices."""
    d = mats.shape[-1]
    if d == 1:
        diag = mats[..., 0, 0]
        if np.any(diag <= 0.0):
            raise NumericError("1x1 matrix not positive definite")
        return np.sqrt(diag)[..., None, None]
    if d == 2:
        a = mats[..., 0, 0]
        b = mats[..., 1, 0]
        e = mats[..., 1, 1]
        if np.any(a <= 0.0):
            raise NumericError("2x2 matrix not positive definite")
        l11 = np.sqrt(a)
        l21 = b / l11
        rem = e - l21 * l21
        if np.any(rem <= 0.0):
            raise NumericError("2x2 matrix not positive definite")
        out = np.zeros_like(mats)
        out[..., 0, 0] = l11
        out[..., 1, 0] = l21
        out[..., 1, 1] = np.sqrt(rem)
        return out
    try:
        return np.linalg.cholesky(mats)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"matrix not positive definite in batched Cholesky: {exc}") from exc


def sample_mvn(mean, cov, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw from a multivariate Gaussian.

    Args:
        mean: location, shape (d,).
        cov: SPD covariance, shape (d, d); the all-zero matrix is accepted
            and treated as a point mass at ``mean``.
        rng: generator consumed by the draw.
        size: optional number of draws; None returns a single (d,) vector,
            an integer returns (size, d).
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
        raise ContractError("mean must be (d,) and cov (d, d)")
    d = mean.size
    n = 1 if size is None else int(size)
    if not np.any(cov):
        out = np.broadcast_to(mean, (n, d)).copy()
    else:
        root = cholesky(cov)
        out = mean + rng.standard_normal((n, d)) @ root.T
    return out[0] if size is None else out


def sample_mvt(dof: float, loc, scale, rng: np.random.Generator,
               size: int | None = None) -> np.ndarray:
    """Draw from a multivariate Student-t with squared-scale matrix ``scale``.

    Uses the scale-mixture construction: a Gaussian draw with covariance
    ``scale`` divided by the square root of an independent chi-square over
    ``dof``. The all-zero scale matrix degenerates to a point mass at ``loc``.
    """
    if dof <= 0.0:
        raise DomainError("degrees of freedom must be positive")
    loc = np.asarray(loc, dtype=float)
    n = 1 if size is None else int(size)
    gauss = sample_mvn(np.zeros_like(loc), scale, rng, size=n)
    chi2 = 2.0 * rng.standard_gamma(dof / 2.0, size=n)
    out = loc + gauss * np.sqrt(dof / chi2)[:, None]
    return out[0] if size is None else out


def sample_categorical(weights, rng: np.random.Generator, size: int | None = None):
    """Draw category indexes proportional to ``weights``.

    Weights must be nonnegative and sum to 1 within 1e-9. Implemented by
    inverting the cumulative sum, so zero-weight categories are never drawn.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ContractError("weights must be a nonempty vector")
    if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-9:
        raise ContractError("weights must be nonnegative and sum to 1")
    cum = np.cumsum(w)
    u = rng.random() if size is None else rng.random(size)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), w.size - 1)
    return int(idx) if size is None else idx


@dataclass(frozen=True)
class Beta:
    """Beta(a, b) on (0, 1)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise DomainError("Beta parameters must be positive")

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return float(special.betainc(self.a, self.b, x))

    def mean(self) -> float:
        return self.a / (self.a + self.b)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian with mean and variance (not standard deviation)."""

    mean: float
    var: float

    def __post_init__(self):
        if self.var < 0.0:
            raise DomainError("variance must be nonnegative")

    def cdf(self, x: float) -> float:
        if self.var == 0.0:
            return 0.0 if x < self.mean else 1.0
        return float(special.ndtr((x - self.mean) / math.sqrt(self.var)))


@dataclass(frozen=True)
class StudentT:
    """Student-t with dof, location, and squared scale."""

    dof: float
    loc: float
    scale: float

    def __post_init__(self):
        if self.dof <= 0.0:
            raise DomainError("degrees of freedom must be positive")
        if self.scale < 0.0:
            raise DomainError("squared scale must be nonnegative")

    def cdf(self, x: float) -> float:
        if self.scale == 0.0:
            return 0.0 if x < self.loc else 1.0
        return float(special.stdtr(self.dof, (x - self.loc) / math.sqrt(self.scale)))


Distribution = Beta | Gaussian | StudentT


def _bracket(dist, p: float) -> tuple[float, float]:
    """Find [lo, hi] with cdf(lo) < p <= cdf(hi)."""
    if isinstance(dist, Beta):
        return 0.0, 1.0
    if isinstance(dist, Gaussian):
        center, width = dist.mean, math.sqrt(dist.var)
    else:
        center, width = dist.loc, math.sqrt(dist.scale)
    width = max(width, 1e-12) * 8.0
    lo, hi = center - width, center + width
    while dist.cdf(lo) >= p:
        lo = center - (center - lo) * 2.0
    while dist.cdf(hi) < p:
        hi = center + (hi - center) * 2.0
    return lo, hi


def quantile(dist: Distribution, p: float) -> float:
    """Invert the CDF of ``dist`` at probability ``p`` in (0, 1).

    Bracketed bisection; converges to well below 1e-10 in at most
    200 halvings for every supported family.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie strictly inside (0, 1)")
    if isinstance(dist, Gaussian) and dist.var == 0.0:
        return dist.mean
    if isinstance(dist, StudentT) and dist.scale == 0.0:
        return dist.loc
    lo, hi = _bracket(dist, p)
    for _ in range(_QUANTILE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if dist.cdf(mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)
