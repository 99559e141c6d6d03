"""Sampler and quantile checks against analytic values and scipy oracles."""

import numpy as np
import pytest
from scipy import stats

from smcbandits.distributions import (Beta, Gaussian, StudentT, cholesky,
                                      cholesky_batch, inv_spd, quantile,
                                      sample_categorical, sample_mvn,
                                      sample_mvt, stream, substream)
from smcbandits.errors import ContractError, DomainError, NumericError


def test_stream_deterministic():
    a = stream(123).standard_normal(8)
    b = stream(123).standard_normal(8)
    assert np.array_equal(a, b)


def test_substream_keys_are_distinct():
    base = substream(5).standard_normal(4)
    k0 = substream(5, 0).standard_normal(4)
    k1 = substream(5, 1).standard_normal(4)
    nested = substream(5, 0, 3).standard_normal(4)
    assert not np.array_equal(base, k0)
    assert not np.array_equal(k0, k1)
    assert not np.array_equal(k0, nested)
    assert np.array_equal(k0, substream(5, 0).standard_normal(4))


def test_cholesky_identity():
    assert np.array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_diagonal():
    assert np.allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_cholesky_reconstruction():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    root = cholesky(m)
    assert np.abs(root @ root.T - m).max() < 1e-12
    assert np.allclose(np.triu(root, 1), 0.0)


def test_cholesky_rejects_non_spd():
    with pytest.raises(NumericError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_batched_inverse_and_cholesky_match_numpy(dim):
    rng = stream(7)
    a = rng.standard_normal((40, dim, dim))
    mats = a @ a.transpose(0, 2, 1) + 0.5 * np.eye(dim)
    assert np.allclose(inv_spd(mats), np.linalg.inv(mats), atol=1e-10)
    assert np.allclose(cholesky_batch(mats), np.linalg.cholesky(mats), atol=1e-10)


def test_batched_kernels_reject_non_positive():
    bad = np.array([[[1.0, 2.0], [2.0, 1.0]]])
    with pytest.raises(NumericError):
        inv_spd(bad)
    with pytest.raises(NumericError):
        cholesky_batch(bad)


def test_mvn_zero_cov_is_point_mass():
    x = sample_mvn(np.array([1.0, -2.0]), np.zeros((2, 2)), stream(0))
    assert np.array_equal(x, [1.0, -2.0])


def test_mvn_sample_mean():
    # CLT bound: 3 sigma / sqrt(n) < 0.02 per coordinate.
    draws = sample_mvn(np.array([1.0, 2.0]), np.eye(2), stream(11), size=100_000)
    assert np.abs(draws.mean(axis=0) - [1.0, 2.0]).max() < 0.02


def test_mvn_deterministic():
    mean, cov = np.zeros(2), np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.array_equal(sample_mvn(mean, cov, stream(3), size=5),
                          sample_mvn(mean, cov, stream(3), size=5))


def test_mvt_zero_scale_is_loc():
    x = sample_mvt(3.0, np.array([4.0, 5.0]), np.zeros((2, 2)), stream(0))
    assert np.array_equal(x, [4.0, 5.0])


def test_mvt_large_dof_covariance():
    draws = sample_mvt(1e6, np.zeros(2), np.eye(2), stream(13), size=100_000)
    cov = np.cov(draws.T)
    assert np.abs(cov - np.eye(2)).max() < 0.05


def test_mvt_dof3_tail_mass():
    # 3.182 is the two-sided 5% critical value of a t with 3 dof.
    draws = sample_mvt(3.0, np.zeros(1), np.eye(1), stream(17), size=1_000_000)
    assert abs(np.mean(np.abs(draws[:, 0]) > 3.182) - 0.05) < 0.002


def test_mvt_large_dof_matches_gaussian():
    n = 100_000
    t_draws = sample_mvt(1e6, np.zeros(1), np.eye(1), stream(19), size=n)[:, 0]
    n_draws = sample_mvn(np.zeros(1), np.eye(1), stream(23), size=n)[:, 0]
    statistic = stats.ks_2samp(t_draws, n_draws).statistic
    # Two-sample KS rejection threshold at the 0.01 level.
    assert statistic < 1.628 * np.sqrt(2.0 / n)


def test_mvt_rejects_bad_dof():
    with pytest.raises(DomainError):
        sample_mvt(0.0, np.zeros(1), np.eye(1), stream(0))


@pytest.mark.parametrize("weights,index", [([1.0, 0.0, 0.0], 0), ([0.0, 0.0, 1.0], 2)])
def test_categorical_point_mass(weights, index):
    rng = stream(29)
    assert all(sample_categorical(np.array(weights), rng) == index for _ in range(20))


def test_categorical_frequencies():
    draws = sample_categorical(np.array([0.5, 0.5]), stream(31), size=10_000)
    assert 4800 <= np.sum(draws == 0) <= 5200


def test_categorical_rejects_bad_weights():
    with pytest.raises(ContractError):
        sample_categorical(np.array([0.5, -0.5, 1.0]), stream(0))
    with pytest.raises(ContractError):
        sample_categorical(np.array([0.4, 0.4]), stream(0))


def test_quantile_uniform_median():
    assert quantile(Beta(1.0, 1.0), 0.5) == pytest.approx(0.5, abs=1e-10)


def test_quantile_beta_2_1_median():
    # CDF is x^2, so the median is sqrt(0.5).
    assert quantile(Beta(2.0, 1.0), 0.5) == pytest.approx(np.sqrt(0.5), abs=1e-10)


def test_quantile_standard_normal():
    assert quantile(Gaussian(0.0, 1.0), 0.975) == pytest.approx(1.959964, abs=1e-5)


def test_quantile_degenerate_gaussian():
    assert quantile(Gaussian(3.0, 0.0), 0.9) == 3.0


def test_quantile_rejects_bad_p():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(DomainError):
            quantile(Beta(2.0, 2.0), p)


def test_quantile_matches_scipy_ppf():
    cases = [
        (Beta(2.5, 1.5), stats.beta(2.5, 1.5)),
        (Gaussian(-1.0, 4.0), stats.norm(-1.0, 2.0)),
        (StudentT(5.0, 2.0, 9.0), stats.t(5.0, loc=2.0, scale=3.0)),
    ]
    for dist, oracle in cases:
        for p in (0.05, 0.3, 0.5, 0.7, 0.95):
            assert quantile(dist, p) == pytest.approx(oracle.ppf(p), abs=1e-8)


def test_quantile_inverts_cdf():
    rng = stream(37)
    levels = (0.01, 0.1, 0.5, 0.9, 0.99)
    for _ in range(100):
        dist = [
            Beta(0.5 + 4.0 * rng.random(), 0.5 + 4.0 * rng.random()),
            Gaussian(rng.standard_normal(), 0.1 + 3.0 * rng.random()),
            StudentT(2.0 + 10.0 * rng.random(), rng.standard_normal(),
                     0.1 + 3.0 * rng.random()),
        ][int(rng.integers(3))]
        for p in levels:
            assert dist.cdf(quantile(dist, p)) == pytest.approx(p, abs=1e-8)


def test_quantile_strictly_increasing_in_p():
    rng = stream(41)
    for _ in range(20):
        dist = Beta(0.5 + rng.random(), 0.5 + rng.random())
        values = [quantile(dist, p) for p in np.linspace(0.05, 0.95, 10)]
        assert all(a < b for a, b in zip(values, values[1:]))
