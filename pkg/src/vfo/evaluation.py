"""Policy evaluation, improvement curves, and CSV/SVG reports.

The long-format results CSV is the single source of truth: every report
artifact is recomputable from it alone, and aggregation is re-checked in
tests by an independent pass over the same rows.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .envs import rollout
from .svgplot import line_plot

RESULTS_COLUMNS = ("env", "algo", "level_tag", "seed", "episode", "return", "success")


@dataclass
class EvalResult:
    mean_return: float
    std_return: float
    success_rate: float
    n_episodes: int
    n_seeds: int
    background_mean_return: float = float("nan")
    single_seed: bool = False


@dataclass(frozen=True)
class ImprovementPoint:
    background_return: float
    delta: float
    err: float
    level_tag: str


@dataclass(frozen=True)
class ResultRow:
    env: str
    algo: str
    level_tag: str
    seed: int
    episode: int
    ret: float
    success: int


def evaluate(agent, env, n_episodes: int, n_seeds: int = 5, base_seed: int = 0,
             algo: str = "", level_tag: str = "-"):
    """Stochastic rollouts of the agent's policy; per-seed means aggregated.

    Returns (EvalResult, rows) where rows are per-episode ResultRow records
    ready for the results CSV.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    policy = agent.policy.as_policy() if hasattr(agent, "policy") else agent
    algo = algo or (agent.config.algo if hasattr(agent, "config") else "policy")
    rows = []
    seed_means = []
    successes = []
    for s in range(n_seeds):
        trajs = rollout(env, policy, n_episodes, seed=(base_seed, s))
        rets = [t.episode_return() for t in trajs]
        succ = [int(t.terminated) for t in trajs]
        seed_means.append(float(np.mean(rets)))
        successes.extend(succ)
        for ep, (r, k) in enumerate(zip(rets, succ)):
            rows.append(ResultRow(env.spec.name, algo, level_tag, s, ep, float(r), k))
    result = EvalResult(
        mean_return=float(np.mean(seed_means)),
        std_return=float(np.std(seed_means)) if n_seeds > 1 else 0.0,
        success_rate=float(np.mean(successes)),
        n_episodes=n_episodes,
        n_seeds=n_seeds,
        single_seed=n_seeds == 1)
    return result, rows


def write_results_csv(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(RESULTS_COLUMNS) + "\n")
        for r in rows:
            fh.write(f"{r.env},{r.algo},{r.level_tag},{r.seed},{r.episode},"
                     f"{r.ret!r},{r.success}\n")


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != ",".join(RESULTS_COLUMNS):
            raise ValueError(f"unexpected results header in {path}: {header!r}")
        for line in fh:
            if not line.strip():
                continue
            env, algo, tag, seed, ep, ret, succ = line.rstrip("\n").split(",")
            rows.append(ResultRow(env, algo, tag, int(seed), int(ep),
                                  float(ret), int(succ)))
    return rows


def aggregate(rows):
    """Per (env, algo, level_tag): mean over seeds of per-seed mean returns,
    the std of those seed means, and the overall success rate."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.env, r.algo, r.level_tag), []).append(r)
    out = {}
    for key, rs in groups.items():
        by_seed: dict = {}
        for r in rs:
            by_seed.setdefault(r.seed, []).append(r.ret)
        seed_means = [float(np.mean(v)) for _, v in sorted(by_seed.items())]
        out[key] = EvalResult(
            mean_return=float(np.mean(seed_means)),
            std_return=float(np.std(seed_means)) if len(seed_means) > 1 else 0.0,
            success_rate=float(np.mean([r.success for r in rs])),
            n_episodes=len(rs),
            n_seeds=len(seed_means),
            single_seed=len(seed_means) == 1)
    return out


def improvement_curve(eval_results, background_returns) -> list[ImprovementPoint]:
    """One point per level: policy return minus background return, with the
    seed-level std as the error bar. Positive means better than the data."""
    if set(eval_results) != set(background_returns):
        raise ValueError("levels of results and background stats do not match")
    pts = []
    for tag, res in eval_results.items():
        bg = float(background_returns[tag])
        pts.append(ImprovementPoint(background_return=bg,
                                    delta=res.mean_return - bg,
                                    err=res.std_return, level_tag=tag))
    return sorted(pts, key=lambda p: (p.background_return, p.level_tag))


def write_background_stats(path, tags_to_returns) -> None:
    with open(path, "w") as fh:
        fh.write("level_tag,background_return\n")
        for tag, ret in tags_to_returns.items():
            fh.write(f"{tag},{float(ret)!r}\n")


def read_background_stats(path) -> dict:
    out = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "level_tag,background_return":
            raise ValueError(f"unexpected stats header in {path}: {header!r}")
        for line in fh:
            if not line.strip():
                continue
            tag, ret = line.rstrip("\n").split(",")
            out[tag] = float(ret)
    return out


def emit_report(rows, out_dir, background_returns=None) -> int:
    """Write results.csv plus absolute/improvement SVG plots.

    Returns 0 on success, 1 (with a header-only CSV and no plots) when
    there are no rows to report.
    """
    os.makedirs(out_dir, exist_ok=True)
    write_results_csv(os.path.join(out_dir, "results.csv"), rows)
    if not rows:
        return 1
    stats = aggregate(rows)
    groups = sorted({(env, algo) for env, algo, _ in stats})
    multi_env = len({env for env, _ in groups}) > 1

    def label(env, algo):
        return f"{env}/{algo}" if multi_env else algo

    def xmap(tags):
        # x axis: background return when known, else level index order
        return {tag: (background_returns[tag] if background_returns else i)
                for i, tag in enumerate(sorted(tags))}

    abs_series = []
    for env, algo in groups:
        tags = sorted({tag for e, a, tag in stats if (e, a) == (env, algo)})
        xs = xmap(tags)
        abs_series.append({
            "label": label(env, algo),
            "x": [xs[t] for t in tags],
            "y": [stats[(env, algo, t)].mean_return for t in tags],
            "yerr": [stats[(env, algo, t)].std_return for t in tags],
        })
    xlabel = "background data return" if background_returns else "level index"
    with open(os.path.join(out_dir, "absolute.svg"), "w") as fh:
        fh.write(line_plot(abs_series, "mean return per level", xlabel,
                           "mean return"))
    if background_returns:
        imp_series = []
        for env, algo in groups:
            res = {tag: r for (e, a, tag), r in stats.items() if (e, a) == (env, algo)}
            pts = improvement_curve(res, {t: background_returns[t] for t in res})
            imp_series.append({
                "label": label(env, algo),
                "x": [p.background_return for p in pts],
                "y": [p.delta for p in pts],
                "yerr": [p.err for p in pts],
            })
        with open(os.path.join(out_dir, "improvement.svg"), "w") as fh:
            fh.write(line_plot(imp_series, "improvement over background data",
                               "background data return",
                               "policy return - background return", hline=0.0))
    return 0
