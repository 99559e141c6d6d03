"""Command line front end.

Subcommands: run (regret experiment from a config file), replay (score a
policy against a logged dataset), gen-log (write a synthetic logged dataset),
and scenarios (list the built-in environments). Exit status 0 on success,
1 on configuration or usage errors, 2 when more than 1% of a run's
realizations aborted on numeric failures.
"""

from __future__ import annotations

import argparse
import sys

from ..distributions import substream
from ..environments import SCENARIO_NAMES
from ..errors import BanditError, ConfigurationError
from ..policies import Policy
from .config import load_experiment_config, load_genlog_config, load_replay_config
from .experiment import run_experiment
from .replay import generate_synthetic_log, read_log, replay_evaluate, write_log


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we want 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="smcbandits",
                     description="Sequential Monte Carlo bandit experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a regret experiment")
    run_p.add_argument("config", help="experiment config file")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--horizon", type=int)
    run_p.add_argument("--realizations", type=int)
    run_p.add_argument("--particles", type=int)
    run_p.add_argument("--output-dir")
    run_p.add_argument("--jobs", type=int)

    rep_p = sub.add_parser("replay", help="evaluate a policy on a logged dataset")
    rep_p.add_argument("log", help="logged interaction data file")
    rep_p.add_argument("config", help="replay config file")
    rep_p.add_argument("--seed", type=int)
    rep_p.add_argument("--particles", type=int)

    gen_p = sub.add_parser("gen-log", help="generate a synthetic logged dataset")
    gen_p.add_argument("config", help="generator config file")
    gen_p.add_argument("--seed", type=int)
    gen_p.add_argument("--output")
    gen_p.add_argument("--records", type=int)

    sub.add_parser("scenarios", help="list built-in scenario names")
    return parser


def _cmd_run(args) -> int:
    config = load_experiment_config(
        args.config, seed=args.seed, horizon=args.horizon,
        realizations=args.realizations, particles=args.particles,
        output_dir=args.output_dir, jobs=args.jobs)
    trace = run_experiment(config)
    regret_path, raw_path = trace.write(config.output_dir or "results")
    for p, label in enumerate(trace.labels):
        print(f"{label}: mean cumulative regret at T={trace.horizon} "
              f"is {trace.mean_cum[p, -1]:.4f} "
              f"(+/- {trace.std_cum[p, -1]:.4f} across realizations)")
    print(f"wrote {regret_path} and {raw_path}")
    if trace.aborted:
        print(f"warning: {trace.aborted} of {trace.realizations} realizations aborted",
              file=sys.stderr)
        if trace.aborted > 0.01 * trace.realizations:
            return 2
    return 0


def _cmd_replay(args) -> int:
    settings = load_replay_config(args.config, seed=args.seed,
                                  particles=args.particles, log=args.log)
    log = read_log(settings.log_path)
    if log.n_arms != settings.n_arms or log.context_dim != settings.context_dim:
        raise ConfigurationError(
            f"replay.arms/context_dim: log file has arms={log.n_arms} "
            f"dim={log.context_dim}")
    policy = Policy(settings.policy_spec, settings.reward, settings.n_arms,
                    substream(settings.seed, 0), dynamics=settings.dynamics)
    result = replay_evaluate(log, policy, substream(settings.seed, 1))
    print(f"records: {result.records}")
    print(f"policy matches: {result.matches}, CTR: {result.ctr:.4f}")
    print(f"uniform matches: {result.baseline_matches}, "
          f"CTR: {result.baseline_ctr:.4f}")
    print(f"normalized CTR: {result.normalized_ctr:.4f}")
    return 0


def _cmd_genlog(args) -> int:
    settings = load_genlog_config(args.config, seed=args.seed,
                                  output=args.output, records=args.records)
    log, _ = generate_synthetic_log(settings.n_arms, settings.context_dim,
                                    settings.records, substream(settings.seed, 0),
                                    theta_scale=settings.theta_scale)
    write_log(log, settings.output)
    print(f"wrote {len(log)} records to {settings.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "gen-log":
            return _cmd_genlog(args)
        for name in SCENARIO_NAMES:
            print(name)
        return 0
    except (BanditError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
