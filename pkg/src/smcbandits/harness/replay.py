"""Offline evaluation on logged interactions via rejection replay.

A logged record is usable for evaluating a policy only when the policy,
shown the logged context, proposes exactly the logged arm; matched records
contribute their logged reward and feed the policy update. With uniformly
random logging this estimates the policy's online reward rate. A uniform
proposer is scored in the same pass from an independent stream, and the
headline number is the ratio of the two reward rates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import ContractError
from ..policies import Policy

_HEADER_RE = re.compile(r"^#arms=(\d+) dim=(\d+)$")


@dataclass(frozen=True)
class InteractionLog:
    """Logged rounds: ids, played arms, binary rewards, and contexts (n, dim)."""

    n_arms: int
    context_dim: int
    rounds: np.ndarray
    arms: np.ndarray
    rewards: np.ndarray
    contexts: np.ndarray

    def __post_init__(self):
        n = self.rounds.size
        if self.arms.shape != (n,) or self.rewards.shape != (n,) \
                or self.contexts.shape != (n, self.context_dim):
            raise ContractError("log arrays have inconsistent shapes")
        if n and (self.arms.min() < 0 or self.arms.max() >= self.n_arms):
            raise ContractError("logged arm index out of range")
        if not np.all(np.isin(self.rewards, (0.0, 1.0))):
            raise ContractError("logged rewards must be 0 or 1")

    def __len__(self) -> int:
        return int(self.rounds.size)


def write_log(log: InteractionLog, path: str) -> None:
    """Tab-separated rows under a '#arms=A dim=d' header; byte-deterministic."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"#arms={log.n_arms} dim={log.context_dim}\n")
        for i in range(len(log)):
            ctx = "\t".join(repr(float(v)) for v in log.contexts[i])
            fh.write(f"{log.rounds[i]}\t{log.arms[i]}\t{int(log.rewards[i])}\t{ctx}\n")


def read_log(path: str) -> InteractionLog:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        match = _HEADER_RE.match(header)
        if not match:
            raise ContractError(f"bad log header {header!r}")
        n_arms, dim = int(match.group(1)), int(match.group(2))
        rounds, arms, rewards, contexts = [], [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 + dim:
                raise ContractError(f"line {lineno}: expected {3 + dim} fields")
            rounds.append(int(parts[0]))
            arms.append(int(parts[1]))
            rewards.append(float(parts[2]))
            contexts.append([float(v) for v in parts[3:]])
    return InteractionLog(n_arms, dim,
                          np.asarray(rounds, dtype=np.int64),
                          np.asarray(arms, dtype=np.int64),
                          np.asarray(rewards, dtype=float),
                          np.asarray(contexts, dtype=float).reshape(len(rounds), dim))


def generate_synthetic_log(n_arms: int, context_dim: int, n_records: int,
                           rng: np.random.Generator, theta: np.ndarray | None = None,
                           theta_scale: float = 1.0) -> tuple[InteractionLog, np.ndarray]:
    """Uniformly-logged Bernoulli rewards from per-arm logistic models.

    Contexts are iid standard Gaussian, logged arms uniform, and the click
    probability of arm a at context x is the logistic of their inner product
    under that arm's weight vector. Returns the log and the weights used
    (drawn N(0, theta_scale^2 I) when not supplied).
    """
    if n_arms < 1 or context_dim < 1 or n_records < 1:
        raise ContractError("arms, dim, and record count must be positive")
    if theta is None:
        theta = theta_scale * rng.standard_normal((n_arms, context_dim))
    else:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (n_arms, context_dim):
            raise ContractError("theta must have shape (n_arms, context_dim)")
    contexts = rng.standard_normal((n_records, context_dim))
    arms = rng.integers(n_arms, size=n_records)
    probs = special.expit(np.einsum("nd,nd->n", contexts, theta[arms]))
    rewards = (rng.random(n_records) < probs).astype(float)
    log = InteractionLog(n_arms, context_dim, np.arange(n_records, dtype=np.int64),
                         arms.astype(np.int64), rewards, contexts)
    return log, theta


@dataclass(frozen=True)
class ReplayResult:
    """Match counts and reward rates for the policy and the uniform baseline."""

    records: int
    matches: int
    clicks: float
    baseline_matches: int
    baseline_clicks: float

    @property
    def ctr(self) -> float:
        return self.clicks / self.matches if self.matches else float("nan")

    @property
    def baseline_ctr(self) -> float:
        return self.baseline_clicks / self.baseline_matches \
            if self.baseline_matches else float("nan")

    @property
    def normalized_ctr(self) -> float:
        base = self.baseline_ctr
        return self.ctr / base if base and base == base else float("nan")


def replay_evaluate(log: InteractionLog, policy: Policy,
                    baseline_rng: np.random.Generator) -> ReplayResult:
    """Stream the log once; score the policy and a uniform proposer together.

    The policy's internal round counter only advances on matched records,
    mirroring the online process it approximates. The baseline proposals
    come from ``baseline_rng`` so they cannot perturb the policy's stream.
    """
    if log.n_arms != policy.n_arms:
        raise ContractError("policy arm count does not match the log")
    baseline_picks = baseline_rng.integers(log.n_arms, size=len(log))
    matches = 0
    clicks = 0.0
    t = 1
    for i in range(len(log)):
        x = log.contexts[i]
        if policy.select(x, t) == log.arms[i]:
            matches += 1
            clicks += log.rewards[i]
            policy.update(int(log.arms[i]), x, float(log.rewards[i]))
            t += 1
    base_match = baseline_picks == log.arms
    return ReplayResult(len(log), matches, clicks,
                        int(base_match.sum()), float(log.rewards[base_match].sum()))
