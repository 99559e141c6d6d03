"""Sequential Monte Carlo posteriors for static and restless bandits.

Per-arm posteriors are particle approximations refreshed by a
resample-propagate-reweight loop, which lets Thompson sampling and
Bayes-UCB run against arms whose parameters drift over time. Conjugate
(Beta and normal-inverse-gamma) baselines, simulation environments, and a
regret/replay harness round out the package.
"""

from .distributions import (Beta, Gaussian, StudentT, cholesky, quantile,
                            sample_categorical, sample_mvn, sample_mvt, stream,
                            substream)
from .dynamics import (DynamicsKind, DynamicsSpec, TransitionStats,
                       predictive_mixture_sample, propagate, transition_posterior_params)
from .environments import (BanditEnvironment, ContextSource, EnvironmentSpec,
                           SCENARIO_NAMES, StepRecord, oracle_arm, scenario_catalog)
from .errors import (BanditError, ConfigurationError, ContractError,
                     DegenerateWeightsError, DomainError, NumericError,
                     UnsupportedModelError)
from .harness import (ExperimentConfig, InteractionLog, PolicyConfig, RegretTrace,
                      ReplayResult, generate_synthetic_log, load_experiment_config,
                      read_log, replay_evaluate, run_experiment, write_log)
from .policies import (ExactArmState, Policy, PolicyKind, PolicySpec, SmcArmState,
                       argmax_tiebreak, default_alpha, select_bayes_ucb_smc,
                       select_exact, select_thompson_smc, update_arms)
from .reward_models import (BetaStats, NigStats, RewardKind, RewardModelSpec,
                            beta_update, exact_predictive, expected_reward,
                            log_likelihood, nig_update, sample_reward)
from .smc import (WeightedParticleSet, effective_sample_size, init_particles,
                  resample, reweight, weighted_estimate, weighted_quantile)

__version__ = "0.1.0"
