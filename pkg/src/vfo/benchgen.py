"""Benchmark data generation: the quality ladder and bimodal mixtures.

The ladder trains one cloning policy per demonstration count d on the
first d trajectories of a shared expert pool, then rolls each policy out
into a background dataset. Bimodal datasets mix expert-policy and
uniform-random trajectories at a given fraction. Every level is written as
a pair of files: the IfO-facing dataset (no rewards) and an oracle variant
that keeps them.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, Trajectory, save_dataset, strip_actions
from .envs import expert_policy, make_env, rollout, uniform_random_policy
from .svgplot import histogram_plot
from .training import RunConfig, train_bc

DESK_LADDER = (1, 2, 5, 10, 20, 50)
DESK_FRACTIONS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


@dataclass
class SiBenchSpec:
    env_name: str = "gridworld"
    env_params: dict = field(default_factory=dict)
    ladder: tuple = DESK_LADDER
    episodes_per_level: int = 200
    expert_pool: int = 0  # 0 means max(ladder)
    seed: int = 0
    bc: RunConfig | None = None  # template for the level policies

    def __post_init__(self):
        self.ladder = tuple(int(d) for d in self.ladder)
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError("ladder must be strictly increasing")
        if self.expert_pool == 0:
            self.expert_pool = max(self.ladder)
        if max(self.ladder) > self.expert_pool:
            raise ValueError("every ladder level must fit in the expert pool")
        if self.episodes_per_level < 1:
            raise ValueError("episodes_per_level must be >= 1")
        if self.bc is None:
            self.bc = RunConfig(algo="bc", env_name=self.env_name,
                                env_params=dict(self.env_params), steps=10000)


@dataclass
class BimodalSpec:
    env_name: str = "gridworld"
    env_params: dict = field(default_factory=dict)
    fractions: tuple = DESK_FRACTIONS
    total: int = 200
    seed: int = 0

    def __post_init__(self):
        self.fractions = tuple(float(f) for f in self.fractions)
        if any(not 0.0 <= f <= 1.0 for f in self.fractions):
            raise ValueError("fractions must lie in [0, 1]")
        if any(b < a for a, b in zip(self.fractions, self.fractions[1:])):
            raise ValueError("fractions must be monotone non-decreasing")
        if self.total < 1:
            raise ValueError("total must be >= 1")


@dataclass
class Level:
    index: int
    tag: str
    dataset: Dataset  # no rewards; what IfO trainers see
    oracle_dataset: Dataset  # with rewards
    mean_return: float
    std_return: float
    success_rate: float
    agent: object = None


def drop_rewards(dataset: Dataset) -> Dataset:
    out = []
    for tr in dataset.trajectories:
        out.append(Trajectory(states=tr.states, actions=tr.actions, rewards=None,
                              terminated=tr.terminated, truncated=tr.truncated))
    return Dataset(out, dataset.origin, dataset.env_name, dict(dataset.metadata))


def generate_expert_data(env, n_demos: int, seed: int):
    """Expert rollouts as (action-labeled, stripped) dataset pair.

    The labeled variant keeps actions but not rewards; the stripped variant
    is the observation-only dataset handed to IfO trainers.
    """
    if n_demos < 1:
        raise ValueError("n_demos must be >= 1")
    trajs = rollout(env, expert_policy(env), n_demos, seed=seed)
    labeled = Dataset(trajs, "B", env.spec.name,
                      {"source": "expert-policy", "n_demos": n_demos})
    return drop_rewards(labeled), strip_actions(labeled)


def _level_stats(oracle_dataset: Dataset):
    rets = [tr.episode_return() for tr in oracle_dataset.trajectories]
    succ = [int(tr.terminated) for tr in oracle_dataset.trajectories]
    return float(np.mean(rets)), float(np.std(rets)), float(np.mean(succ))


def generate_sibench(spec: SiBenchSpec, out_dir=None) -> list[Level]:
    """Train the ladder policies and roll them into background datasets.

    Level k gets seed spec.seed + k. When out_dir is given, the layout is
    <out>/<env>/sibench/level_<k>/{background.jsonl, background_oracle.jsonl,
    policy/, stats.csv} plus the expert pool under <out>/<env>/expert/.
    """
    env = make_env(spec.env_name, **spec.env_params)
    demos, demos_stripped = generate_expert_data(env, spec.expert_pool,
                                                 seed=spec.seed)
    if out_dir is not None:
        exp_dir = os.path.join(out_dir, spec.env_name, "expert")
        os.makedirs(exp_dir, exist_ok=True)
        save_dataset(demos, os.path.join(exp_dir, "demos.jsonl"))
        save_dataset(demos_stripped, os.path.join(exp_dir, "demos_stripped.jsonl"))
    levels = []
    for k, d in enumerate(spec.ladder):
        level_seed = spec.seed + k
        subset = Dataset(demos.trajectories[:d], "B", spec.env_name,
                         {"source": "expert-policy", "n_demos": d})
        cfg = replace(spec.bc, algo="bc", env_name=spec.env_name,
                      env_params=dict(spec.env_params), seed=level_seed)
        agent = train_bc(subset, cfg)
        trajs = rollout(env, agent.policy.as_policy(), spec.episodes_per_level,
                        seed=(spec.seed, k, 1))
        meta = {"kind": "sibench", "level": k, "d": d}
        oracle = Dataset(trajs, "B", spec.env_name, meta)
        mean_r, std_r, succ = _level_stats(oracle)
        level = Level(index=k, tag=f"level_{k}", dataset=drop_rewards(oracle),
                      oracle_dataset=oracle, mean_return=mean_r,
                      std_return=std_r, success_rate=succ, agent=agent)
        levels.append(level)
        if out_dir is not None:
            _write_level(out_dir, spec.env_name, "sibench", level,
                         extra={"d": d}, agent=agent)
    if out_dir is not None:
        _write_levels_index(out_dir, spec.env_name, "sibench", levels)
    return levels


def generate_bimodal(spec: BimodalSpec, out_dir=None) -> list[Level]:
    """Expert/uniform-random trajectory mixtures at each fraction.

    Level k contains ceil(f * total) expert trajectories, the rest random,
    shuffled deterministically.
    """
    env = make_env(spec.env_name, **spec.env_params)
    expert = expert_policy(env)
    random_pol = uniform_random_policy(env)
    levels = []
    for k, f in enumerate(spec.fractions):
        n_exp = math.ceil(f * spec.total)
        trajs = []
        if n_exp > 0:
            trajs += rollout(env, expert, n_exp, seed=(spec.seed, k, 0))
        if spec.total - n_exp > 0:
            trajs += rollout(env, random_pol, spec.total - n_exp,
                             seed=(spec.seed, k, 1))
        order = np.random.default_rng([spec.seed, k, 2]).permutation(len(trajs))
        trajs = [trajs[i] for i in order]
        meta = {"kind": "bimodal", "level": k, "fraction": f}
        oracle = Dataset(trajs, "B", spec.env_name, meta)
        mean_r, std_r, succ = _level_stats(oracle)
        level = Level(index=k, tag=f"level_{k}", dataset=drop_rewards(oracle),
                      oracle_dataset=oracle, mean_return=mean_r,
                      std_return=std_r, success_rate=succ)
        levels.append(level)
        if out_dir is not None:
            _write_level(out_dir, spec.env_name, "bimodal", level,
                         extra={"fraction": f})
    if out_dir is not None:
        _write_levels_index(out_dir, spec.env_name, "bimodal", levels)
    return levels


def _write_level(out_dir, env_name, kind, level: Level, extra=None, agent=None):
    d = os.path.join(out_dir, env_name, kind, level.tag)
    os.makedirs(d, exist_ok=True)
    save_dataset(level.dataset, os.path.join(d, "background.jsonl"))
    save_dataset(level.oracle_dataset, os.path.join(d, "background_oracle.jsonl"))
    extra = extra or {}
    with open(os.path.join(d, "stats.csv"), "w") as fh:
        keys = sorted(extra)
        fh.write("level," + ",".join(keys)
                 + ",episodes,mean_return,std_return,success_rate\n")
        vals = ",".join(repr(float(extra[k])) for k in keys)
        fh.write(f"{level.index},{vals},{len(level.oracle_dataset)},"
                 f"{level.mean_return!r},{level.std_return!r},"
                 f"{level.success_rate!r}\n")
    edges, counts = return_histogram(level.oracle_dataset)
    write_histogram_files(edges, counts, os.path.join(d, "returns"),
                          title=f"{env_name} {kind} {level.tag} returns")
    if agent is not None:
        agent.save(os.path.join(d, "policy"))


def _write_levels_index(out_dir, env_name, kind, levels):
    path = os.path.join(out_dir, env_name, kind, "levels.csv")
    with open(path, "w") as fh:
        fh.write("level_tag,background_return\n")
        for lv in levels:
            fh.write(f"{lv.tag},{lv.mean_return!r}\n")


def return_histogram(dataset: Dataset, n_bins: int = 20):
    """Fixed-width histogram of per-trajectory returns; needs rewards."""
    for tr in dataset.trajectories:
        if tr.rewards is None:
            raise ValueError("rewards unavailable; use the oracle dataset")
    rets = np.array([tr.episode_return() for tr in dataset.trajectories])
    lo, hi = float(rets.min()), float(rets.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(rets, bins=n_bins, range=(lo, hi))
    return edges, counts


def write_histogram_files(edges, counts, out_prefix, title="returns"):
    with open(out_prefix + "_hist.csv", "w") as fh:
        fh.write("bin_left,bin_right,count\n")
        for i, c in enumerate(counts):
            fh.write(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(c)}\n")
    with open(out_prefix + "_hist.svg", "w") as fh:
        fh.write(histogram_plot(edges, counts, title, "episode return"))
