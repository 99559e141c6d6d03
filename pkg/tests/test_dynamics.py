"""Transition kernels, with a brute-force trajectory oracle for the
marginalized unknown-dynamics predictive."""

import numpy as np
import pytest

from smcbandits.distributions import stream
from smcbandits.dynamics import (DynamicsKind, DynamicsSpec, TransitionStats,
                                 predictive_mixture_sample, propagate,
                                 transition_posterior_params,
                                 transition_regression)
from smcbandits.errors import ConfigurationError, ContractError, NumericError


def _random_spd(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim))
    return scale * (a @ a.T + dim * np.eye(dim))


def _path_oracle(spec: DynamicsSpec, path: list[np.ndarray]):
    """Predictive (dof, m, R) recomputed from the explicitly stored trajectory.

    Uses the division form R = V / (dof * (1 - theta (U U^T)^{-1} theta))
    with U U^T = theta theta^T + B^{-1}, so it shares no algebra with the
    accumulator implementation beyond the shared ridge constant.
    """
    d = spec.dim
    prev = np.stack(path[:-1])
    nxt = np.stack(path[1:])
    s00 = prev.T @ prev
    s10 = nxt.T @ prev
    s11 = nxt.T @ nxt
    b0_inv = np.linalg.inv(spec.prior_mixing_scale)
    b = np.linalg.inv(s00 + b0_inv)
    mix = (s10 + spec.prior_mixing @ b0_inv) @ b
    shape = s11 - s10 @ mix.T - mix @ s10.T + mix @ s00 @ mix.T \
        + (mix - spec.prior_mixing) @ b0_inv @ (mix - spec.prior_mixing).T \
        + spec.prior_noise_shape
    theta = path[-1]
    dof = spec.prior_dof + len(path) - d
    uut = np.outer(theta, theta) + np.linalg.inv(b)
    denom = 1.0 - theta @ np.linalg.inv(uut) @ theta
    pred = shape / (dof * denom)
    pred = 0.5 * (pred + pred.T) + 1e-9 * np.eye(d)
    return dof, mix @ theta, pred


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        DynamicsSpec(DynamicsKind.KNOWN_LINEAR, 2)
    with pytest.raises(ConfigurationError):
        DynamicsSpec.known_linear(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ConfigurationError):
        DynamicsSpec.unknown_linear(2, prior_dof=0.5)
    with pytest.raises(ConfigurationError):
        DynamicsSpec.static(0)
    with pytest.raises(ConfigurationError):
        DynamicsSpec.static_jitter(1, jitter=-0.1)


def test_static_propagation_is_identity():
    spec = DynamicsSpec.static(1)
    thetas = np.array([[0.3], [0.9]])
    stats = TransitionStats.initial(2, spec)
    out = thetas
    for _ in range(5):
        out, stats = propagate(spec, out, stats, stream(0))
    assert np.array_equal(out, thetas)
    assert stats.steps == 5


def test_jitter_moves_particles():
    spec = DynamicsSpec.static_jitter(2, jitter=0.5)
    thetas = np.zeros((100, 2))
    out, _ = propagate(spec, thetas, TransitionStats.initial(100, spec), stream(3))
    assert out.std() == pytest.approx(0.5, rel=0.2)
    zero = DynamicsSpec.static_jitter(2, jitter=0.0)
    same, _ = propagate(zero, thetas, TransitionStats.initial(100, zero), stream(3))
    assert np.array_equal(same, thetas)


def test_known_linear_noiseless_contraction():
    spec = DynamicsSpec.known_linear(0.5 * np.eye(2), np.zeros((2, 2)))
    out, _ = propagate(spec, np.array([[2.0, 4.0]]),
                       TransitionStats.initial(1, spec), stream(0))
    assert np.array_equal(out, [[1.0, 2.0]])


def test_coupled_mixing_eigenvalues():
    # The coupled drift matrix used by the benchmark scenarios.
    values = np.linalg.eigvalsh(np.array([[0.9, 0.1], [0.1, 0.9]]))
    assert np.allclose(np.sort(values), [0.8, 1.0])


def test_propagation_is_pure_and_deterministic():
    spec = DynamicsSpec.known_linear(np.array([[0.9, 0.1], [0.1, 0.9]]),
                                     0.1 * np.eye(2))
    thetas = stream(5).standard_normal((50, 2))
    before = thetas.copy()
    out1, _ = propagate(spec, thetas, TransitionStats.initial(50, spec), stream(7))
    out2, _ = propagate(spec, thetas, TransitionStats.initial(50, spec), stream(7))
    assert np.array_equal(thetas, before)
    assert np.array_equal(out1, out2)


def test_unknown_prior_only_predictive():
    spec = DynamicsSpec.unknown_linear(2)
    stats = TransitionStats.initial(1, spec)
    dof, loc, pred = transition_posterior_params(spec, stats, np.zeros((1, 2)))
    assert dof == pytest.approx(spec.prior_dof + 1 - 2)
    assert np.array_equal(loc, np.zeros((1, 2)))
    assert np.allclose(pred[0], np.eye(2) / dof, atol=2e-9)


def _bounded_trajectory(rng, max_norm=50.0):
    """Random unknown-dynamics trajectory, redrawn if it explodes.

    The marginalized transition has heavy tails, so occasional draws blow up
    to 1e5+; at those magnitudes the squared-sum accumulators are inherently
    ill conditioned and no evaluation order keeps nine digits (extreme cases
    overflow outright and propagate refuses them). The contract under test
    only binds on bounded trajectories.
    """
    while True:
        d = int(rng.integers(1, 4))
        spec = DynamicsSpec.unknown_linear(
            d,
            prior_mixing=rng.standard_normal((d, d)) * 0.3 / np.sqrt(d),
            prior_mixing_scale=_random_spd(rng, d, scale=0.2),
            prior_noise_shape=_random_spd(rng, d, scale=0.5),
            prior_dof=d + 3.0 + 3.0 * rng.random(),
        )
        steps = int(rng.integers(2, 21))
        theta = rng.standard_normal((1, d))
        stats = TransitionStats.initial(1, spec)
        path = [theta[0].copy()]
        try:
            for _ in range(steps):
                theta, stats = propagate(spec, theta, stats, rng)
                path.append(theta[0].copy())
        except NumericError:
            continue
        if max(np.abs(p).max() for p in path) <= max_norm:
            return spec, theta, stats, path


def test_unknown_predictive_matches_path_oracle():
    rng = stream(73)
    for case in range(100):
        spec, theta, stats, path = _bounded_trajectory(rng)
        dof, loc, pred = transition_posterior_params(spec, stats, theta)
        odof, oloc, opred = _path_oracle(spec, path)
        assert dof == pytest.approx(odof, abs=1e-12)
        assert np.allclose(loc[0], oloc, atol=1e-9)
        assert np.allclose(pred[0], opred, atol=1e-9, rtol=1e-9)


def test_sherman_morrison_identity():
    rng = stream(79)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        theta = rng.standard_normal(d)
        b = _random_spd(rng, d)
        uut = np.outer(theta, theta) + np.linalg.inv(b)
        lhs = 1.0 - theta @ np.linalg.inv(uut) @ theta
        rhs = 1.0 / (1.0 + theta @ b @ theta)
        assert lhs == pytest.approx(rhs, abs=1e-8)
        assert 0.0 < lhs <= 1.0 + 1e-12


def test_mixing_estimate_converges():
    # Statistical consistency: the regression estimate of the mixing matrix
    # should be closer to the truth at t=500 than at t=50 for most runs.
    true_mix = np.array([[0.9, 0.05], [-0.05, 0.9]])
    spec = DynamicsSpec.unknown_linear(2)
    improved = 0
    for seed in range(50):
        rng = stream(1000 + seed)
        theta = np.zeros(2)
        s00 = np.zeros((2, 2))
        s10 = np.zeros((2, 2))
        s11 = np.zeros((2, 2))
        errors = {}
        for t in range(1, 501):
            nxt = true_mix @ theta + 0.3 * rng.standard_normal(2)
            s00 += np.outer(theta, theta)
            s10 += np.outer(nxt, theta)
            s11 += np.outer(nxt, nxt)
            theta = nxt
            if t in (50, 500):
                stats = TransitionStats(t, s00[None], s10[None], s11[None])
                _, mix, _ = transition_regression(spec, stats)
                errors[t] = np.linalg.norm(mix[0] - true_mix)
        improved += errors[500] < errors[50]
    assert improved >= 45


def test_stats_take_inherits_rows():
    spec = DynamicsSpec.unknown_linear(2)
    thetas = stream(83).standard_normal((4, 2))
    _, stats = propagate(spec, thetas, TransitionStats.initial(4, spec), stream(89))
    picked = stats.take(np.array([2, 2, 0]))
    assert picked.steps == stats.steps
    assert np.array_equal(picked.s00[0], stats.s00[2])
    assert np.array_equal(picked.s00[1], stats.s00[2])
    assert np.array_equal(picked.s10[2], stats.s10[0])


def test_unknown_propagation_advances_accumulators():
    spec = DynamicsSpec.unknown_linear(2)
    thetas = np.array([[1.0, 2.0]])
    out, stats = propagate(spec, thetas, TransitionStats.initial(1, spec), stream(97))
    assert stats.steps == 1
    assert np.allclose(stats.s00[0], np.outer([1.0, 2.0], [1.0, 2.0]))
    assert np.allclose(stats.s10[0], np.outer(out[0], [1.0, 2.0]))
    assert np.allclose(stats.s11[0], np.outer(out[0], out[0]))


def test_mixture_sample_single_particle():
    spec = DynamicsSpec.static(2)
    theta = np.array([[0.4, -0.2]])
    stats = TransitionStats.initial(1, spec)
    draw = predictive_mixture_sample(spec, theta, np.array([1.0]), stats, stream(0))
    assert np.array_equal(draw, [0.4, -0.2])


def test_mixture_sample_respects_weights():
    spec = DynamicsSpec.known_linear(np.eye(2), np.zeros((2, 2)))
    thetas = np.array([[1.0, 0.0], [0.0, 1.0]])
    stats = TransitionStats.initial(2, spec)
    draw = predictive_mixture_sample(spec, thetas, np.array([1.0, 0.0]), stats, stream(2))
    assert np.array_equal(draw, [1.0, 0.0])


def test_mixture_sample_frequencies():
    spec = DynamicsSpec.static(1)
    thetas = np.arange(5, dtype=float)[:, None]
    stats = TransitionStats.initial(5, spec)
    weights = np.full(5, 0.2)
    rng = stream(101)
    draws = np.array([predictive_mixture_sample(spec, thetas, weights, stats, rng)[0]
                      for _ in range(10_000)])
    counts = np.array([(draws == v).sum() for v in range(5)])
    # 4 sigma binomial band around 2000.
    assert np.all(np.abs(counts - 2000) < 4 * np.sqrt(10_000 * 0.2 * 0.8))


def test_regression_requires_unknown_kind():
    spec = DynamicsSpec.static(2)
    with pytest.raises(ContractError):
        transition_regression(spec, TransitionStats.initial(1, spec))
