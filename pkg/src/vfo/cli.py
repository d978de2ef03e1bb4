"""Command-line entry points: train, gen-bench, self-improve, eval, report.

Every subcommand is deterministic given its seed and flags: repeated runs
produce byte-identical checkpoints, CSVs, and SVGs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .benchgen import (BimodalSpec, DESK_FRACTIONS, DESK_LADDER, SiBenchSpec,
                       generate_bimodal, generate_sibench)
from .data import load_dataset
from .evaluation import (aggregate, emit_report, evaluate, read_background_stats,
                         read_results_csv, write_results_csv)
from .selfimprove import LoopSpec, run_loop, write_loop_log
from .training import ALGOS, RunConfig, load_agent, train


def _parse_env_params(pairs):
    """key=value entries; values parsed as JSON scalars, else strings."""
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise SystemExit(f"--env-param expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _load_config_file(path) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _build_run_config(args) -> RunConfig:
    d = _load_config_file(getattr(args, "config", None))
    overrides = {
        "algo": getattr(args, "algo", None),
        "env_name": getattr(args, "env", None),
        "seed": getattr(args, "seed", None),
        "steps": getattr(args, "steps", None),
        "alpha": getattr(args, "alpha", None),
        "lam": getattr(args, "lam", None),
        "learning_rate": getattr(args, "learning_rate", None),
        "batch_size": getattr(args, "batch_size", None),
        "expert_path": getattr(args, "expert", None),
        "background_path": getattr(args, "background", None),
    }
    for key, val in overrides.items():
        if val is not None:
            d[key] = val
    hidden = getattr(args, "hidden", None)
    if hidden is not None:
        d["hidden"] = [int(h) for h in hidden.split(",") if h]
    env_params = _parse_env_params(getattr(args, "env_param", None))
    if env_params:
        d["env_params"] = {**d.get("env_params", {}), **env_params}
    return RunConfig.from_dict(d)


def cmd_train(args) -> int:
    cfg = _build_run_config(args)
    expert = load_dataset(args.expert) if args.expert else None
    background = load_dataset(args.background) if args.background else None
    privileged = (load_dataset(args.privileged_expert)
                  if args.privileged_expert else None)
    agent = train(cfg, expert=expert, background=background,
                  privileged_expert=privileged)
    agent.save(args.out)
    print(f"trained {cfg.algo} for {cfg.steps} steps -> {args.out}")
    return 0


def cmd_gen_bench(args) -> int:
    env_params = _parse_env_params(args.env_param)
    if args.kind == "sibench":
        ladder = (tuple(int(x) for x in args.ladder.split(","))
                  if args.ladder else DESK_LADDER)
        bc = None
        if args.bc_steps is not None:
            bc = RunConfig(algo="bc", env_name=args.env, env_params=env_params,
                           steps=args.bc_steps)
        spec = SiBenchSpec(env_name=args.env, env_params=env_params,
                           ladder=ladder,
                           episodes_per_level=args.episodes_per_level,
                           seed=args.seed, bc=bc)
        levels = generate_sibench(spec, out_dir=args.out)
        for lv in levels:
            print(f"{lv.tag} d={spec.ladder[lv.index]} "
                  f"mean_return={lv.mean_return:.4f} success={lv.success_rate:.3f}")
    else:
        fractions = (tuple(float(x) for x in args.fractions.split(","))
                     if args.fractions else DESK_FRACTIONS)
        spec = BimodalSpec(env_name=args.env, env_params=env_params,
                           fractions=fractions, total=args.total,
                           seed=args.seed)
        levels = generate_bimodal(spec, out_dir=args.out)
        for lv in levels:
            print(f"{lv.tag} f={spec.fractions[lv.index]} "
                  f"mean_return={lv.mean_return:.4f} success={lv.success_rate:.3f}")
    return 0


def cmd_self_improve(args) -> int:
    template = None
    cfg_dict = _load_config_file(args.config)
    if cfg_dict:
        cfg_dict.setdefault("algo", args.algo)
        cfg_dict.setdefault("env_name", args.env)
        template = RunConfig.from_dict(cfg_dict)
    spec = LoopSpec(algo=args.algo, env_name=args.env,
                    env_params=_parse_env_params(args.env_param),
                    iterations=args.iterations,
                    episodes_per_iter=args.episodes_per_iter,
                    expert_path=args.expert or "",
                    seed_data_path=args.seed_data,
                    accumulate=args.accumulate,
                    reuse_rollouts=args.reuse_rollouts,
                    seed=args.seed, out_dir=args.out, train=template)
    records = run_loop(spec)
    if args.out is not None:
        write_loop_log(os.path.join(args.out, "loop_log.csv"), records)
    for rec in records:
        print(f"iter {rec.iteration}: return {rec.mean_return:.4f} "
              f"+/- {rec.std_return:.4f} success {rec.success_rate:.3f}")
    if len(records) < spec.iterations:
        print(f"loop aborted after {len(records)} of {spec.iterations} "
              "iterations (trainer divergence)", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    agent = load_agent(args.agent)
    env = agent.config.make_env()
    result, rows = evaluate(agent, env, n_episodes=args.episodes,
                            n_seeds=args.seeds, base_seed=args.seed,
                            algo=agent.config.algo, level_tag=args.level_tag)
    os.makedirs(args.out, exist_ok=True)
    write_results_csv(os.path.join(args.out, "results.csv"), rows)
    line = (f"{env.spec.name}/{agent.config.algo} mean_return "
            f"{result.mean_return:.4f} +/- {result.std_return:.4f} "
            f"success {result.success_rate:.3f} "
            f"({result.n_episodes} episodes x {result.n_seeds} seeds)")
    if result.single_seed:
        line += " [single seed: std is 0 by construction]"
    print(line)
    if args.background:
        try:
            bg = load_dataset(args.background).mean_return()
        except ValueError:
            print("background dataset carries no rewards, so no improvement "
                  "baseline; pass a reward-carrying file such as the "
                  "background_oracle.jsonl twin", file=sys.stderr)
            return 1
        print(f"improvement over background {bg:.4f}: "
              f"{result.mean_return - bg:+.4f}")
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.results:
        rows.extend(read_results_csv(path))
    background = (read_background_stats(args.background_stats)
                  if args.background_stats else None)
    code = emit_report(rows, args.out, background_returns=background)
    if code == 0:
        for (env_name, algo, tag), res in sorted(aggregate(rows).items()):
            print(f"{env_name}/{algo}/{tag}: return {res.mean_return:.4f} "
                  f"+/- {res.std_return:.4f} success {res.success_rate:.3f}")
    else:
        print("no result rows; wrote header-only CSV", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vfo",
                                description="Value-from-observations toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one agent on fixed datasets")
    t.add_argument("--algo", choices=ALGOS, default=None)
    t.add_argument("--expert", default=None,
                   help="observation-only expert dataset (jsonl)")
    t.add_argument("--background", default=None,
                   help="action-labeled background dataset (jsonl)")
    t.add_argument("--privileged-expert", default=None,
                   help="action-labeled expert dataset for the privileged variant")
    t.add_argument("--config", default=None, help="RunConfig JSON file")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--out", required=True)
    t.add_argument("--env", default=None)
    t.add_argument("--env-param", action="append", metavar="KEY=VALUE")
    t.add_argument("--steps", type=int, default=None)
    t.add_argument("--alpha", type=float, default=None)
    t.add_argument("--lam", type=float, default=None)
    t.add_argument("--learning-rate", type=float, default=None)
    t.add_argument("--batch-size", type=int, default=None)
    t.add_argument("--hidden", default=None, metavar="H1,H2")
    t.set_defaults(func=cmd_train)

    g = sub.add_parser("gen-bench", help="generate benchmark datasets")
    g.add_argument("--env", default="gridworld")
    g.add_argument("--kind", choices=("sibench", "bimodal"), default="sibench")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--env-param", action="append", metavar="KEY=VALUE")
    g.add_argument("--ladder", default=None, metavar="D1,D2,...")
    g.add_argument("--episodes-per-level", type=int, default=200)
    g.add_argument("--bc-steps", type=int, default=None)
    g.add_argument("--fractions", default=None, metavar="F1,F2,...")
    g.add_argument("--total", type=int, default=200)
    g.set_defaults(func=cmd_gen_bench)

    s = sub.add_parser("self-improve", help="iterative train/collect loop")
    s.add_argument("--algo", choices=ALGOS, default="vfo-bin")
    s.add_argument("--env", default="gridworld")
    s.add_argument("--expert", default=None)
    s.add_argument("--seed-data", required=True)
    s.add_argument("--iterations", type=int, default=10)
    s.add_argument("--episodes-per-iter", type=int, default=200)
    s.add_argument("--out", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", default=None, help="RunConfig JSON template")
    s.add_argument("--env-param", action="append", metavar="KEY=VALUE")
    s.add_argument("--accumulate", action="store_true",
                   help="append rollouts instead of replacing the background")
    s.add_argument("--reuse-rollouts", action="store_true",
                   help="evaluate on the collection rollouts themselves")
    s.set_defaults(func=cmd_self_improve)

    e = sub.add_parser("eval", help="evaluate a saved agent")
    e.add_argument("--agent", required=True, help="directory from train")
    e.add_argument("--episodes", type=int, default=200)
    e.add_argument("--seeds", type=int, default=5)
    e.add_argument("--seed", type=int, default=0, help="base evaluation seed")
    e.add_argument("--level-tag", default="-")
    e.add_argument("--background", default=None,
                   help="dataset with rewards for an improvement reference")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("report", help="render CSV results into plots")
    r.add_argument("--results", nargs="+", required=True)
    r.add_argument("--background-stats", default=None,
                   help="level_tag,background_return CSV for improvement plots")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
