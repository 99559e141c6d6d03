"""Reward likelihoods, moments, and conjugate updates against hand oracles."""

import math

import numpy as np
import pytest
from scipy import special

from smcbandits.distributions import Beta, Gaussian, StudentT, stream
from smcbandits.errors import (ConfigurationError, ContractError,
                               UnsupportedModelError)
from smcbandits.reward_models import (BetaStats, NigStats, RewardKind,
                                      RewardModelSpec, beta_update,
                                      exact_predictive, expected_reward,
                                      log_likelihood, nig_update, sample_reward)

BERN = RewardModelSpec(RewardKind.BERNOULLI)
LG2 = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2, known_variance=1.0)
LOGIT2 = RewardModelSpec(RewardKind.LOGISTIC, context_dim=2)
CAT32 = RewardModelSpec(RewardKind.CATEGORICAL, context_dim=2, categories=3)


def test_param_dims():
    assert BERN.param_dim == 1
    assert LG2.param_dim == 2
    assert LOGIT2.param_dim == 2
    assert CAT32.param_dim == 6


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        RewardModelSpec(RewardKind.BERNOULLI, context_dim=2)
    with pytest.raises(ConfigurationError):
        RewardModelSpec(RewardKind.CATEGORICAL, categories=1)
    with pytest.raises(ConfigurationError):
        RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, known_variance=-1.0)


def test_bernoulli_log_likelihood():
    assert log_likelihood(BERN, [0.5], [1.0], 1.0) == pytest.approx(math.log(0.5))
    assert log_likelihood(BERN, [0.25], [1.0], 0.0) == pytest.approx(math.log(0.75))


def test_bernoulli_clamps_out_of_range_parameters():
    # Dynamics can push success probabilities outside (0, 1); the likelihood
    # clamps instead of raising so the filter keeps running.
    assert np.isfinite(log_likelihood(BERN, [1.3], [1.0], 1.0))
    assert np.isfinite(log_likelihood(BERN, [-0.2], [1.0], 0.0))
    assert log_likelihood(BERN, [1.3], [1.0], 0.0) <= math.log(1e-12) + 1e-9
    assert expected_reward(BERN, [1.3], [1.0]) == 1.0
    assert expected_reward(BERN, [-0.2], [1.0]) == 0.0


def test_logistic_log_likelihood_at_zero_score():
    assert log_likelihood(LOGIT2, [1.0, -1.0], [1.0, 1.0], 1.0) \
        == pytest.approx(math.log(0.5))


def test_categorical_symmetric_likelihood():
    for c in (0.0, 1.0, 2.0):
        assert log_likelihood(CAT32, np.zeros(6), [0.3, -0.7], c) \
            == pytest.approx(math.log(1.0 / 3.0))


def test_categorical_likelihood_normalizes():
    rng = stream(43)
    for _ in range(100):
        th = rng.standard_normal(6)
        x = rng.standard_normal(2)
        total = sum(math.exp(log_likelihood(CAT32, th, x, float(c))) for c in range(3))
        assert total == pytest.approx(1.0, abs=1e-10)


def test_logistic_equals_two_category_softmax():
    # Category-0 block pinned at zero, category-1 block carrying the weights.
    cat2 = RewardModelSpec(RewardKind.CATEGORICAL, context_dim=2, categories=2)
    rng = stream(47)
    for _ in range(50):
        th = rng.standard_normal(2)
        x = rng.standard_normal(2)
        stacked = np.concatenate([np.zeros(2), th])
        for y in (0.0, 1.0):
            assert log_likelihood(LOGIT2, th, x, y) \
                == pytest.approx(log_likelihood(cat2, stacked, x, y), abs=1e-12)


def test_categorical_shift_invariance():
    rng = stream(53)
    for _ in range(50):
        th = rng.standard_normal(6)
        x = rng.standard_normal(2)
        # Add the same constant to every category score by shifting each block
        # along a direction whose inner product with x is fixed.
        shift = np.tile(x / float(x @ x), 3) * 100.0
        for c in (0.0, 1.0, 2.0):
            assert log_likelihood(CAT32, th, x, c) \
                == pytest.approx(log_likelihood(CAT32, th + shift, x, c), abs=1e-10)


def test_expected_reward_values():
    assert expected_reward(BERN, [0.7], [1.0]) == pytest.approx(0.7)
    assert expected_reward(CAT32, np.zeros(6), [1.0, 1.0]) == pytest.approx(1.0)
    assert expected_reward(LOGIT2, [1.0, -1.0], [1.0, 1.0]) == pytest.approx(0.5)
    assert expected_reward(LG2, [3.0, 5.0], [1.0, 0.0]) == pytest.approx(3.0)


def test_dimension_mismatch_raises():
    with pytest.raises(ContractError):
        log_likelihood(LG2, [1.0, 2.0, 3.0], [1.0, 0.0], 0.5)
    with pytest.raises(ContractError):
        expected_reward(LG2, [1.0, 2.0], [1.0], )
    with pytest.raises(ContractError):
        log_likelihood(BERN, [0.5], [1.0], 0.5)


def test_linear_gaussian_needs_variance_for_likelihood():
    unknown = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2)
    with pytest.raises(ConfigurationError):
        log_likelihood(unknown, [1.0, 0.0], [1.0, 0.0], 0.3)


def test_sample_reward_degenerate_cases():
    assert all(sample_reward(BERN, [1.0], [1.0], stream(0)) == 1.0 for _ in range(10))
    noiseless = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2,
                                known_variance=1e-30)
    draw = sample_reward(noiseless, [3.0, 5.0], [1.0, 0.0], stream(1))
    assert draw == pytest.approx(3.0, abs=1e-9)


def test_logistic_click_rate_at_score_four():
    draws = sample_reward(LOGIT2, [4.0, 0.0], [1.0, 1.0], stream(59), size=100_000)
    assert abs(draws.mean() - 0.98201) < 0.005


@pytest.mark.parametrize("spec", [BERN, LG2, LOGIT2, CAT32],
                         ids=[s.kind.value for s in (BERN, LG2, LOGIT2, CAT32)])
def test_sample_mean_matches_expected_reward(spec):
    rng = stream(61)
    n = 100_000
    for _ in range(20):
        th = rng.standard_normal(spec.param_dim)
        if spec.kind is RewardKind.BERNOULLI:
            th = rng.random(1)
        x = np.ones(spec.context_dim) if spec.kind is RewardKind.BERNOULLI \
            else rng.standard_normal(spec.context_dim)
        draws = sample_reward(spec, th, x, rng, size=n)
        mean = expected_reward(spec, th, x)
        # 4 sigma / sqrt(n) with the model's own reward variance.
        sigma = max(draws.std(), 1e-3)
        assert abs(draws.mean() - mean) < 4.0 * sigma / math.sqrt(n) + 1e-6


def test_beta_update_steps():
    assert beta_update(BetaStats(1.0, 1.0), 1.0) == BetaStats(2.0, 1.0)
    assert beta_update(BetaStats(1.0, 1.0), 0.0) == BetaStats(1.0, 2.0)


def test_beta_update_matches_batch():
    stats = BetaStats(1.0, 1.0)
    for y in (1.0, 1.0, 1.0, 0.0, 0.0):
        stats = beta_update(stats, y)
    assert stats == BetaStats(4.0, 3.0)


def test_nig_update_hand_example():
    stats = nig_update(NigStats.default(2), [1.0, 0.0], 2.0)
    assert np.allclose(stats.v_inv, [[2.0, 0.0], [0.0, 1.0]])
    assert np.allclose(stats.u, [1.0, 0.0])
    assert np.allclose(stats.v, np.linalg.inv(stats.v_inv))
    assert stats.a == pytest.approx(1.5)
    # Residual 2 against prior mean 0, denominator 1 + x V x = 2.
    assert stats.b == pytest.approx(1.0 + 4.0 / 4.0)


def test_nig_update_zero_context():
    prior = NigStats.default(2)
    stats = nig_update(prior, [0.0, 0.0], 3.0)
    assert np.array_equal(stats.u, prior.u)
    assert np.array_equal(stats.v, prior.v)
    assert stats.a == pytest.approx(prior.a + 0.5)
    assert stats.b == pytest.approx(prior.b + 4.5)


def _nig_batch(xs: np.ndarray, ys: np.ndarray, dim: int) -> NigStats:
    # Batch conjugate formulas, the independent oracle for the recursion.
    v0_inv = np.eye(dim)
    vn_inv = v0_inv + xs.T @ xs
    vn = np.linalg.inv(vn_inv)
    un = vn @ (xs.T @ ys)
    an = 1.0 + xs.shape[0] / 2.0
    bn = 1.0 + 0.5 * (ys @ ys - un @ vn_inv @ un)
    return NigStats(un, vn, vn_inv, an, bn)


@pytest.mark.parametrize("steps", [5, 50])
def test_nig_sequential_matches_batch(steps):
    rng = stream(67)
    xs = rng.standard_normal((steps, 3))
    ys = rng.standard_normal(steps)
    stats = NigStats.default(3)
    for x, y in zip(xs, ys):
        stats = nig_update(stats, x, float(y))
    oracle = _nig_batch(xs, ys, 3)
    assert np.allclose(stats.u, oracle.u, atol=1e-10)
    assert np.allclose(stats.v, oracle.v, atol=1e-10)
    assert np.allclose(stats.v_inv, oracle.v_inv, atol=1e-10)
    assert stats.a == pytest.approx(oracle.a, abs=1e-10)
    assert stats.b == pytest.approx(oracle.b, abs=1e-10)


def test_exact_predictive_beta():
    dist = exact_predictive(BERN, BetaStats(2.0, 3.0), [1.0])
    assert isinstance(dist, Beta)
    assert dist.mean() == pytest.approx(0.4)


def test_exact_predictive_gaussian():
    stats = NigStats(np.array([1.0, 0.0]), np.eye(2), np.eye(2), 1.0, 1.0)
    dist = exact_predictive(LG2, stats, [1.0, 0.0])
    assert dist == Gaussian(1.0, 1.0)


def test_exact_predictive_student_t():
    unknown = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN, context_dim=2)
    stats = NigStats(np.zeros(2), np.eye(2), np.eye(2), 2.0, 2.0)
    dist = exact_predictive(unknown, stats, [1.0, 0.0])
    assert dist == StudentT(4.0, 0.0, 1.0)


def test_exact_predictive_unsupported():
    with pytest.raises(UnsupportedModelError):
        exact_predictive(LOGIT2, NigStats.default(2), [1.0, 0.0])


def test_sample_reward_logistic_matches_expit():
    th, x = np.array([0.5, -1.5]), np.array([2.0, 1.0])
    draws = sample_reward(LOGIT2, th, x, stream(71), size=50_000)
    assert abs(draws.mean() - special.expit(th @ x)) < 0.01
