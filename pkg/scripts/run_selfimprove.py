"""Iterated train/collect loops seeded from a weak benchmark level.

Builds the ladder benchmark, picks the weakest level whose data contains
any successes at all, then runs the self-improvement loop for each
requested algorithm from that shared seed dataset. Writes one loop log per
(algorithm, seed) plus a return-vs-iteration plot with the expert and
seed-data levels marked.
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vfo.benchgen import SiBenchSpec, generate_expert_data, generate_sibench
from vfo.envs import expert_policy, make_env, rollout
from vfo.selfimprove import LoopSpec, run_loop, write_loop_log
from vfo.svgplot import line_plot
from vfo.training import RunConfig


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="runs/selfimprove")
    p.add_argument("--width", type=int, default=9)
    p.add_argument("--height", type=int, default=9)
    p.add_argument("--slip", type=float, default=0.25)
    p.add_argument("--horizon", type=int, default=18)
    p.add_argument("--algos", default="vfo-bin,bc")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--episodes-per-iter", type=int, default=200)
    p.add_argument("--steps", type=int, default=8000)
    p.add_argument("--hidden", default="32,32")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--seeds", type=int, default=2)
    p.add_argument("--min-success", type=float, default=0.02,
                   help="seed level = weakest with at least this success rate")
    return p.parse_args()


def main():
    args = parse_args()
    params = {"width": args.width, "height": args.height, "slip": args.slip,
              "goal": (args.width // 2, args.height // 2),
              "max_episode_length": args.horizon}
    env = make_env("gridworld", **params)
    expert_return = float(np.mean(
        [t.episode_return()
         for t in rollout(env, expert_policy(env), 400, seed=(7, 7))]))

    bc = RunConfig(algo="bc", env_name="gridworld", env_params=params,
                   steps=1200, hidden=(16, 16))
    levels = generate_sibench(SiBenchSpec(
        env_name="gridworld", env_params=params, ladder=(1, 2, 3, 4, 5, 50),
        episodes_per_level=200, seed=0, bc=bc))
    seed_lv = next(lv for lv in levels
                   if lv.success_rate >= args.min_success)
    _, demos_stripped = generate_expert_data(env, 50, seed=0)
    print(f"expert return {expert_return:.3f}; seeding from {seed_lv.tag} "
          f"(return {seed_lv.mean_return:.3f})", flush=True)

    hidden = tuple(int(h) for h in args.hidden.split(","))
    os.makedirs(args.out, exist_ok=True)
    series = []
    for algo in args.algos.split(","):
        per_iter = np.zeros((args.seeds, args.iterations))
        for s in range(args.seeds):
            tmpl = RunConfig(algo=algo, env_name="gridworld",
                             env_params=params, steps=args.steps,
                             hidden=hidden, lam=args.lam)
            spec = LoopSpec(algo=algo, env_name="gridworld",
                            env_params=params, iterations=args.iterations,
                            episodes_per_iter=args.episodes_per_iter,
                            seed=42 + s, accumulate=True,
                            reuse_rollouts=True, train=tmpl)
            recs = run_loop(spec, expert=demos_stripped,
                            seed_background=seed_lv.dataset)
            per_iter[s, :len(recs)] = [r.mean_return for r in recs]
            write_loop_log(os.path.join(args.out,
                                        f"{algo}_seed{42 + s}_log.csv"), recs)
            print(f"{algo} seed {42 + s}: "
                  + " ".join(f"{r.mean_return:.2f}" for r in recs),
                  flush=True)
        series.append({"label": algo,
                       "x": list(range(1, args.iterations + 1)),
                       "y": per_iter.mean(axis=0).tolist(),
                       "yerr": per_iter.std(axis=0).tolist()})

    svg = line_plot(series, "Return across self-improvement iterations",
                    "iteration", "mean return", hline=expert_return)
    with open(os.path.join(args.out, "loop_returns.svg"), "w") as fh:
        fh.write(svg)
    print(f"wrote {args.out}/loop_returns.svg")


if __name__ == "__main__":
    main()
