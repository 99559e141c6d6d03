"""Classic two-arm Bernoulli bandit: particle policies against their
conjugate counterparts.

The environment pays out with probabilities 0.4 and 0.8. Thompson sampling
and Bayes-UCB each come in two flavors here: an exact version backed by a
Beta posterior and a sequential Monte Carlo version that approximates the
same posterior with particles. At this scale their regret curves should be
hard to tell apart, which is the point.
"""

import numpy as np

from smcbandits.dynamics import DynamicsSpec
from smcbandits.environments import scenario_catalog
from smcbandits.harness import ExperimentConfig, PolicyConfig, run_experiment
from smcbandits.policies import PolicyKind, PolicySpec

HORIZON = 300
REALIZATIONS = 15
PARTICLES = 400


def main():
    env = scenario_catalog("static_bernoulli")
    static = DynamicsSpec.static(1)
    config = ExperimentConfig(
        environment=env,
        policies=(
            PolicyConfig("thompson_smc",
                         PolicySpec(PolicyKind.THOMPSON_SMC, particles=PARTICLES),
                         dynamics=static),
            PolicyConfig("thompson_exact", PolicySpec(PolicyKind.THOMPSON_EXACT)),
            PolicyConfig("bayes_ucb_smc",
                         PolicySpec(PolicyKind.BAYES_UCB_SMC, particles=PARTICLES),
                         dynamics=static),
            PolicyConfig("bayes_ucb_exact", PolicySpec(PolicyKind.BAYES_UCB_EXACT)),
            PolicyConfig("uniform", PolicySpec(PolicyKind.UNIFORM_RANDOM)),
        ),
        horizon=HORIZON,
        realizations=REALIZATIONS,
        seed=42,
    )
    print(f"arms pay 0.4 / 0.8, T={HORIZON}, {REALIZATIONS} realizations, "
          f"M={PARTICLES} particles")
    trace = run_experiment(config)
    print()
    print(f"{'policy':>16}  cumulative regret at T (mean +/- se)")
    for p, label in enumerate(trace.labels):
        se = trace.std_cum[p, -1] / np.sqrt(trace.completed)
        print(f"{label:>16}  {trace.mean_cum[p, -1]:7.1f} +/- {se:.1f}")
    print()
    print("the four Bayesian policies should cluster well below uniform play")


if __name__ == "__main__":
    main()
