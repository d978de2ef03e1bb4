"""Iterative self-improvement: train, roll out, re-train on the rollouts.

Each iteration trains an agent from the fixed expert dataset and the
current background dataset, collects fresh episodes with the trained
policy, and makes those episodes the next background dataset (replace
mode) or appends them (accumulate mode). Rewards from the collection
rollouts are kept only for logging and are stripped before any
observation-only trainer sees the data.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .benchgen import drop_rewards
from .data import Dataset, load_dataset
from .envs import make_env, rollout
from .training import RunConfig, train

LOOP_COLUMNS = ("iteration", "seed", "mean_return", "std_return",
                "success_rate", "background_mean_return", "checkpoint")


@dataclass
class LoopSpec:
    algo: str = "vfo-bin"
    env_name: str = "gridworld"
    env_params: dict = field(default_factory=dict)
    iterations: int = 10
    episodes_per_iter: int = 200
    expert_path: str = ""
    seed_data_path: str = ""
    accumulate: bool = False
    reuse_rollouts: bool = False
    seed: int = 0
    out_dir: str | None = None
    train: RunConfig | None = None  # template; algo/env/seed are overridden

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.episodes_per_iter < 1:
            raise ValueError("episodes_per_iter must be >= 1")
        if self.train is None:
            self.train = RunConfig(algo=self.algo, env_name=self.env_name,
                                   env_params=dict(self.env_params))
        elif not self.env_params:
            self.env_params = dict(self.train.env_params)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    seed: int
    mean_return: float
    std_return: float
    success_rate: float
    background_mean_return: float
    checkpoint: str

    def row(self):
        return (self.iteration, self.seed, repr(self.mean_return),
                repr(self.std_return), repr(self.success_rate),
                repr(self.background_mean_return), self.checkpoint)


def _rollout_stats(trajs):
    rets = np.array([tr.episode_return() for tr in trajs])
    succ = np.array([float(tr.terminated) for tr in trajs])
    return float(rets.mean()), float(rets.std()), float(succ.mean())


def _train_view(background: Dataset, algo: str) -> Dataset:
    """Strip environment rewards unless the trainer is the privileged one."""
    if algo == "awr-oracle":
        return background
    return drop_rewards(background)


def run_loop(spec: LoopSpec,
             expert: Dataset | None = None,
             seed_background: Dataset | None = None) -> list[IterationRecord]:
    """Run the improvement loop; returns one record per completed iteration.

    Datasets may be passed directly or loaded from the spec paths. A
    diverging trainer aborts the loop and the records collected so far are
    returned. When out_dir is set, each iteration's agent is saved under
    iter_<i>/ and loop_log.csv is rewritten after every iteration.
    """
    if expert is None and spec.expert_path:
        expert = load_dataset(spec.expert_path)
    if seed_background is None:
        if not spec.seed_data_path:
            raise ValueError("no seed background dataset given")
        seed_background = load_dataset(spec.seed_data_path)
    if spec.algo in ("vfo-bin", "vfo-disc", "bco") and expert is None:
        raise ValueError(f"{spec.algo} needs an expert dataset")

    env = make_env(spec.env_name, **spec.env_params)
    background = seed_background
    records = []
    for it in range(1, spec.iterations + 1):
        train_seed = int(np.random.SeedSequence([spec.seed, it]).generate_state(1)[0])
        cfg = replace(spec.train, algo=spec.algo, env_name=spec.env_name,
                      env_params=dict(spec.env_params), seed=train_seed)
        bg_mean = background.mean_return() if _has_rewards(background) else float("nan")
        try:
            agent = train(cfg, expert=expert,
                          background=_train_view(background, spec.algo))
        except FloatingPointError:
            break
        collect = rollout(env, agent.policy.as_policy(), spec.episodes_per_iter,
                          seed=(spec.seed, it, 0))
        if spec.reuse_rollouts:
            eval_trajs = collect
        else:
            eval_trajs = rollout(env, agent.policy.as_policy(),
                                 spec.episodes_per_iter, seed=(spec.seed, it, 1))
        mean_r, std_r, succ = _rollout_stats(eval_trajs)
        ckpt = ""
        if spec.out_dir is not None:
            # record the name relative to the log so the output directory
            # can be renamed or compared byte-for-byte across runs
            ckpt = f"iter_{it}"
            agent.save(os.path.join(spec.out_dir, ckpt))
        records.append(IterationRecord(iteration=it, seed=spec.seed,
                                       mean_return=mean_r, std_return=std_r,
                                       success_rate=succ,
                                       background_mean_return=bg_mean,
                                       checkpoint=ckpt))
        fresh = Dataset(collect, "B", spec.env_name,
                        {"kind": "loop", "iteration": it})
        if spec.accumulate:
            background = Dataset(background.trajectories + fresh.trajectories,
                                 "B", spec.env_name, dict(fresh.metadata))
        else:
            background = fresh
        if spec.out_dir is not None:
            write_loop_log(os.path.join(spec.out_dir, "loop_log.csv"), records)
    return records


def _has_rewards(dataset: Dataset) -> bool:
    return all(tr.rewards is not None for tr in dataset.trajectories)


def write_loop_log(path, records, append=False):
    mode = "a" if append and os.path.exists(path) else "w"
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, mode, newline="") as fh:
        w = csv.writer(fh)
        if mode == "w":
            w.writerow(LOOP_COLUMNS)
        for rec in records:
            w.writerow(rec.row())


def read_loop_log(path) -> list[IterationRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [IterationRecord(iteration=int(r["iteration"]), seed=int(r["seed"]),
                            mean_return=float(r["mean_return"]),
                            std_return=float(r["std_return"]),
                            success_rate=float(r["success_rate"]),
                            background_mean_return=float(r["background_mean_return"]),
                            checkpoint=r["checkpoint"])
            for r in rows]


def seed_selector(bench_dir, floor=0.02, stat="success_rate"):
    """Pick the weakest non-degenerate ladder level.

    Scans level_<k>/stats.csv under bench_dir (or bench_dir/sibench) in
    level order and returns the background.jsonl path of the first level
    whose `stat` value is >= floor. Raises if none qualifies.
    """
    root = bench_dir
    if not _has_levels(root) and _has_levels(os.path.join(bench_dir, "sibench")):
        root = os.path.join(bench_dir, "sibench")
    tags = sorted((d for d in os.listdir(root) if d.startswith("level_")),
                  key=lambda t: int(t.split("_")[1]))
    if not tags:
        raise ValueError(f"no level_<k> directories under {root}")
    for tag in tags:
        stats_path = os.path.join(root, tag, "stats.csv")
        with open(stats_path, newline="") as fh:
            row = next(iter(csv.DictReader(fh)))
        if float(row[stat]) >= floor:
            return os.path.join(root, tag, "background.jsonl")
    raise ValueError(f"no ladder level reaches {stat} >= {floor}")


def _has_levels(path) -> bool:
    return os.path.isdir(path) and any(d.startswith("level_")
                                       for d in os.listdir(path))
