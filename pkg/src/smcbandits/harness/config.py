"""Plain-text experiment configuration.

Files are INI-style: one [experiment] section naming either a catalog
scenario or an inline [environment] section, plus one [policy.<label>]
section per policy. Vectors and matrices are comma-separated numbers,
matrices row-major. Every parse error names the offending section and key.
"""

from __future__ import annotations

import os
import configparser
from dataclasses import dataclass

import numpy as np

from ..dynamics import DynamicsKind, DynamicsSpec
from ..environments import (ContextKind, ContextSource, EnvironmentSpec,
                            SCENARIO_NAMES, scenario_catalog)
from ..errors import ConfigurationError
from ..policies import PolicyKind, PolicySpec, SMC_KINDS
from ..reward_models import RewardKind, RewardModelSpec
from .experiment import REGRET_MODES, ExperimentConfig, PolicyConfig

_EXPERIMENT_KEYS = {"name", "scenario", "reward", "horizon", "realizations",
                    "particles", "seed", "regret_mode", "jobs", "output_dir"}
_ENVIRONMENT_KEYS = {"reward", "arms", "context_dim", "categories", "known_variance",
                     "context", "context_value", "theta0", "dynamics", "jitter",
                     "mixing", "noise_scale"}
_POLICY_KEYS = {"kind", "particles", "resample", "prior_scale", "dynamics",
                "jitter", "prior_dof", "variance"}
_REPLAY_KEYS = {"log", "arms", "context_dim", "kind", "particles", "dynamics",
                "jitter", "prior_scale", "seed"}
_GENLOG_KEYS = {"output", "arms", "context_dim", "records", "theta_scale", "seed"}

_ENV_DYNAMICS = ("static", "static_jitter", "known_linear")
_POLICY_DYNAMICS = ("true", "static", "static_jitter", "unknown_linear")


class _Section:
    """Typed access to one INI section with section.key error reporting."""

    def __init__(self, name: str, raw, allowed: set[str]):
        self.name = name
        self.raw = dict(raw)
        for key in self.raw:
            base = key.split("_")[0]
            if key not in allowed and not (base == "mixing" and "mixing" in allowed):
                raise ConfigurationError(f"{name}.{key}: unknown key")

    def _fail(self, key: str, message: str):
        raise ConfigurationError(f"{self.name}.{key}: {message}")

    def has(self, key: str) -> bool:
        return key in self.raw

    def get_str(self, key: str, default: str | None = None) -> str | None:
        return self.raw.get(key, default)

    def get_int(self, key: str, default: int | None = None, minimum: int = 1) -> int:
        if key not in self.raw:
            if default is None:
                self._fail(key, "required")
            return default
        try:
            value = int(self.raw[key])
        except ValueError:
            self._fail(key, f"not an integer: {self.raw[key]!r}")
        if value < minimum:
            self._fail(key, f"must be at least {minimum}")
        return value

    def get_float(self, key: str, default: float | None = None) -> float:
        if key not in self.raw:
            if default is None:
                self._fail(key, "required")
            return default
        try:
            return float(self.raw[key])
        except ValueError:
            self._fail(key, f"not a number: {self.raw[key]!r}")

    def get_choice(self, key: str, choices, default: str | None = None) -> str:
        value = self.raw.get(key, default)
        if value is None:
            self._fail(key, "required")
        if value not in choices:
            self._fail(key, f"must be one of {', '.join(choices)}")
        return value

    def get_floats(self, key: str) -> np.ndarray:
        try:
            return np.array([float(v) for v in self.raw[key].replace(",", " ").split()])
        except ValueError:
            self._fail(key, f"not a number list: {self.raw[key]!r}")

    def get_matrix(self, key: str, dim: int) -> np.ndarray:
        values = self.get_floats(key)
        if values.size != dim * dim:
            self._fail(key, f"needs {dim * dim} entries for a {dim}x{dim} matrix")
        return values.reshape(dim, dim)


def _read_ini(path: str) -> configparser.ConfigParser:
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    return parser


def _reward_from(section: _Section) -> RewardModelSpec:
    kind_name = section.get_choice("reward", [k.value for k in RewardKind])
    kind = RewardKind(kind_name)
    if kind is RewardKind.BERNOULLI:
        return RewardModelSpec(kind)
    dim = section.get_int("context_dim", 2)
    if kind is RewardKind.LINEAR_GAUSSIAN:
        return RewardModelSpec(kind, context_dim=dim,
                               known_variance=section.get_float("known_variance", 1.0))
    if kind is RewardKind.CATEGORICAL:
        return RewardModelSpec(kind, context_dim=dim,
                               categories=section.get_int("categories"))
    return RewardModelSpec(kind, context_dim=dim)


def _environment_from(section: _Section) -> EnvironmentSpec:
    reward = _reward_from(section)
    n_arms = section.get_int("arms", 2)
    dim = reward.param_dim

    kind = section.get_choice("dynamics", _ENV_DYNAMICS, "static")
    if kind == "static":
        dynamics = (DynamicsSpec.static(dim),) * n_arms
    elif kind == "static_jitter":
        dynamics = (DynamicsSpec.static_jitter(dim, section.get_float("jitter", 0.01)),) * n_arms
    else:
        noise = section.get_float("noise_scale", 0.1) * np.eye(dim)
        mats = []
        for arm in range(n_arms):
            key = f"mixing_{arm}" if section.has(f"mixing_{arm}") else "mixing"
            if not section.has(key):
                section._fail(f"mixing_{arm}", "required for known_linear dynamics")
            mats.append(section.get_matrix(key, dim))
        dynamics = tuple(DynamicsSpec.known_linear(mat, noise) for mat in mats)

    ctx_kind = section.get_choice("context", ("constant", "gaussian", "uniform"),
                                  "constant")
    if ctx_kind == "constant":
        value = section.get_floats("context_value") if section.has("context_value") \
            else np.ones(reward.context_dim)
        context = ContextSource.constant(value)
    elif ctx_kind == "gaussian":
        context = ContextSource.gaussian(reward.context_dim)
    else:
        context = ContextSource.uniform(reward.context_dim)

    theta0 = None
    if section.has("theta0"):
        values = section.get_floats("theta0")
        if values.size != n_arms * dim:
            section._fail("theta0", f"needs {n_arms * dim} entries ({n_arms} x {dim})")
        theta0 = values.reshape(n_arms, dim)

    return EnvironmentSpec(reward=reward, dynamics=dynamics, context=context,
                           theta0=theta0, name="inline")


def load_environment_section(path: str) -> EnvironmentSpec:
    """Parse just the [environment] section of a config file."""
    parser = _read_ini(path)
    if not parser.has_section("environment"):
        raise ConfigurationError("environment: section required")
    return _environment_from(
        _Section("environment", parser["environment"], _ENVIRONMENT_KEYS))


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(values: np.ndarray) -> str:
    return ", ".join(_fmt(v) for v in np.asarray(values, dtype=float).ravel())


def format_environment(spec: EnvironmentSpec) -> str:
    """Render an environment as an [environment] config section.

    Inverse of the inline-environment parser: parsing the returned text
    reproduces the spec. Arms must share a dynamics kind and, for the linear
    kind, an isotropic noise covariance, which covers every catalog scenario.
    """
    lines = ["[environment]"]
    reward = spec.reward
    lines.append(f"reward = {reward.kind.value}")
    if reward.kind is not RewardKind.BERNOULLI:
        lines.append(f"context_dim = {reward.context_dim}")
    if reward.kind is RewardKind.CATEGORICAL:
        lines.append(f"categories = {reward.categories}")
    if reward.kind is RewardKind.LINEAR_GAUSSIAN:
        if reward.known_variance is None:
            raise ConfigurationError(
                "environment: linear_gaussian environments need known_variance")
        lines.append(f"known_variance = {_fmt(reward.known_variance)}")
    lines.append(f"arms = {spec.n_arms}")

    kinds = {dyn.kind for dyn in spec.dynamics}
    if len(kinds) != 1:
        raise ConfigurationError("environment: arms must share a dynamics kind")
    kind = kinds.pop()
    if kind is DynamicsKind.STATIC:
        lines.append("dynamics = static")
    elif kind is DynamicsKind.STATIC_JITTER:
        jitters = {dyn.jitter for dyn in spec.dynamics}
        if len(jitters) != 1:
            raise ConfigurationError("environment: arms must share a jitter scale")
        lines.append("dynamics = static_jitter")
        lines.append(f"jitter = {_fmt(jitters.pop())}")
    elif kind is DynamicsKind.KNOWN_LINEAR:
        scales = set()
        for dyn in spec.dynamics:
            scale = float(dyn.noise_cov[0, 0])
            if not np.allclose(dyn.noise_cov, scale * np.eye(dyn.dim)):
                raise ConfigurationError(
                    "environment: only isotropic noise covariances serialize")
            scales.add(scale)
        if len(scales) != 1:
            raise ConfigurationError("environment: arms must share a noise scale")
        lines.append("dynamics = known_linear")
        lines.append(f"noise_scale = {_fmt(scales.pop())}")
        for a, dyn in enumerate(spec.dynamics):
            lines.append(f"mixing_{a} = {_fmt_list(dyn.mixing)}")
    else:
        raise ConfigurationError(
            "environment: unknown-linear dynamics describe a policy's belief, "
            "not a simulator")

    if spec.context.kind is ContextKind.CONSTANT:
        lines.append("context = constant")
        lines.append(f"context_value = {_fmt_list(spec.context.value)}")
    elif spec.context.kind is ContextKind.GAUSSIAN_IID:
        lines.append("context = gaussian")
    else:
        lines.append("context = uniform")

    if spec.theta0 is not None:
        lines.append(f"theta0 = {_fmt_list(spec.theta0)}")
    return "\n".join(lines) + "\n"


def _policy_from(label: str, section: _Section, env: EnvironmentSpec,
                 default_particles: int) -> PolicyConfig:
    kind_name = section.get_choice(
        "kind", [k.value for k in PolicyKind] + ["oracle"])
    if kind_name == "oracle":
        return PolicyConfig(label, None)
    kind = PolicyKind(kind_name)
    spec = PolicySpec(kind,
                      particles=section.get_int("particles", default_particles),
                      resample_scheme=section.get_choice(
                          "resample", ("multinomial", "systematic"), "multinomial"),
                      prior_scale=section.get_float("prior_scale", 1.0))
    if kind is PolicyKind.UNIFORM_RANDOM:
        return PolicyConfig(label, spec)

    reward = None
    variance = section.get_choice("variance", ("known", "unknown"), "known")
    if variance == "unknown":
        if env.reward.kind is not RewardKind.LINEAR_GAUSSIAN or kind in SMC_KINDS:
            section._fail("variance", "unknown variance needs an exact policy "
                                      "on linear_gaussian rewards")
        reward = RewardModelSpec(RewardKind.LINEAR_GAUSSIAN,
                                 context_dim=env.reward.context_dim)

    dim = env.reward.param_dim
    default_dyn = "true" if kind in SMC_KINDS else "static"
    dyn_name = section.get_choice("dynamics", _POLICY_DYNAMICS, default_dyn)
    if kind not in SMC_KINDS and dyn_name != "static":
        section._fail("dynamics", "exact policies assume static parameters")
    if dyn_name == "true":
        dynamics: DynamicsSpec | tuple[DynamicsSpec, ...] | None = env.dynamics
    elif dyn_name == "static":
        dynamics = DynamicsSpec.static(dim) if kind in SMC_KINDS else None
    elif dyn_name == "static_jitter":
        dynamics = DynamicsSpec.static_jitter(dim, section.get_float("jitter", 0.01))
    else:
        prior_dof = section.get_float("prior_dof", 0.0)
        dynamics = DynamicsSpec.unknown_linear(
            dim, prior_dof=prior_dof if prior_dof else None)
    return PolicyConfig(label, spec, dynamics=dynamics, reward=reward)


def load_experiment_config(path: str, *, seed: int | None = None,
                           horizon: int | None = None,
                           realizations: int | None = None,
                           particles: int | None = None,
                           output_dir: str | None = None,
                           jobs: int | None = None) -> ExperimentConfig:
    """Parse an experiment file; keyword arguments override file values."""
    parser = _read_ini(path)
    if not parser.has_section("experiment"):
        raise ConfigurationError("experiment: section required")
    exp = _Section("experiment", parser["experiment"], _EXPERIMENT_KEYS)

    scenario = exp.get_str("scenario")
    has_inline = parser.has_section("environment")
    if scenario and has_inline:
        raise ConfigurationError(
            "environment: give either experiment.scenario or an [environment] "
            "section, not both")
    if scenario:
        if scenario not in SCENARIO_NAMES:
            exp._fail("scenario", f"must be one of {', '.join(SCENARIO_NAMES)}")
        env = scenario_catalog(scenario, reward_kind=exp.get_str("reward"))
    elif has_inline:
        env = _environment_from(
            _Section("environment", parser["environment"], _ENVIRONMENT_KEYS))
    else:
        raise ConfigurationError(
            "experiment.scenario: required (or provide an [environment] section)")

    default_particles = particles if particles is not None else exp.get_int("particles", 1000)
    policies = []
    for sec_name in parser.sections():
        if not sec_name.startswith("policy."):
            continue
        label = sec_name[len("policy."):]
        if not label:
            raise ConfigurationError(f"{sec_name}: policy label must be nonempty")
        policies.append(_policy_from(
            label, _Section(sec_name, parser[sec_name], _POLICY_KEYS),
            env, default_particles))
    if not policies:
        raise ConfigurationError("policy: at least one [policy.<label>] section required")

    return ExperimentConfig(
        environment=env,
        policies=tuple(policies),
        horizon=horizon if horizon is not None else exp.get_int("horizon"),
        realizations=realizations if realizations is not None
        else exp.get_int("realizations"),
        seed=seed if seed is not None else exp.get_int("seed", minimum=0),
        regret_mode=exp.get_choice("regret_mode", REGRET_MODES, "pseudo"),
        jobs=jobs if jobs is not None else exp.get_int("jobs", 1),
        name=exp.get_str("name", ""),
        output_dir=output_dir if output_dir is not None else exp.get_str("output_dir"),
    )


@dataclass(frozen=True)
class ReplaySettings:
    log_path: str
    n_arms: int
    context_dim: int
    policy_spec: PolicySpec
    dynamics: DynamicsSpec
    reward: RewardModelSpec
    seed: int


def load_replay_config(path: str, *, seed: int | None = None,
                       particles: int | None = None,
                       log: str | None = None) -> ReplaySettings:
    parser = _read_ini(path)
    if not parser.has_section("replay"):
        raise ConfigurationError("replay: section required")
    sec = _Section("replay", parser["replay"], _REPLAY_KEYS)
    log_path = log if log is not None else sec.get_str("log")
    if not log_path:
        raise ConfigurationError("replay.log: required")
    n_arms = sec.get_int("arms")
    dim = sec.get_int("context_dim")
    kind = PolicyKind(sec.get_choice(
        "kind", [k.value for k in SMC_KINDS] + ["uniform_random"], "thompson_smc"))
    spec = PolicySpec(kind,
                      particles=particles if particles is not None
                      else sec.get_int("particles", 500),
                      prior_scale=sec.get_float("prior_scale", 1.0))
    dyn_name = sec.get_choice("dynamics", ("static", "static_jitter", "unknown_linear"),
                              "static_jitter")
    if dyn_name == "static":
        dynamics = DynamicsSpec.static(dim)
    elif dyn_name == "static_jitter":
        dynamics = DynamicsSpec.static_jitter(dim, sec.get_float("jitter", 0.01))
    else:
        dynamics = DynamicsSpec.unknown_linear(dim)
    return ReplaySettings(
        log_path=log_path,
        n_arms=n_arms,
        context_dim=dim,
        policy_spec=spec,
        dynamics=dynamics,
        reward=RewardModelSpec(RewardKind.LOGISTIC, context_dim=dim),
        seed=seed if seed is not None else sec.get_int("seed", 0, minimum=0),
    )


@dataclass(frozen=True)
class GenLogSettings:
    output: str
    n_arms: int
    context_dim: int
    records: int
    theta_scale: float
    seed: int


def load_genlog_config(path: str, *, seed: int | None = None,
                       output: str | None = None,
                       records: int | None = None) -> GenLogSettings:
    parser = _read_ini(path)
    if not parser.has_section("genlog"):
        raise ConfigurationError("genlog: section required")
    sec = _Section("genlog", parser["genlog"], _GENLOG_KEYS)
    out = output if output is not None else sec.get_str("output")
    if not out:
        raise ConfigurationError("genlog.output: required")
    return GenLogSettings(
        output=out,
        n_arms=sec.get_int("arms"),
        context_dim=sec.get_int("context_dim"),
        records=records if records is not None else sec.get_int("records"),
        theta_scale=sec.get_float("theta_scale", 1.0),
        seed=seed if seed is not None else sec.get_int("seed", 0, minimum=0),
    )
