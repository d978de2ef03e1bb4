"""Benchmark generator tests: ladder, bimodal mixtures, on-disk layout."""

import os

import numpy as np
import pytest

from vfo.benchgen import (BimodalSpec, SiBenchSpec, drop_rewards,
                          generate_bimodal, generate_expert_data,
                          generate_sibench, return_histogram)
from vfo.data import load_dataset
from vfo.training import RunConfig

GRID = {"width": 4, "height": 4, "slip": 0.1, "max_episode_length": 20}


def _tiny_sibench(seed=0, episodes=8):
    bc = RunConfig(algo="bc", env_name="gridworld", env_params=GRID,
                   steps=60, hidden=(8,), batch_size=16)
    return SiBenchSpec(env_name="gridworld", env_params=GRID, ladder=(1, 3),
                       episodes_per_level=episodes, seed=seed, bc=bc)


def test_sibench_spec_validation():
    with pytest.raises(ValueError):
        SiBenchSpec(ladder=(2, 2))
    with pytest.raises(ValueError):
        SiBenchSpec(ladder=(5, 3))
    with pytest.raises(ValueError):
        SiBenchSpec(ladder=(1, 10), expert_pool=5)
    with pytest.raises(ValueError):
        SiBenchSpec(episodes_per_level=0)
    spec = SiBenchSpec(ladder=(1, 2, 4))
    assert spec.expert_pool == 4
    assert spec.bc.algo == "bc"


def test_bimodal_spec_validation():
    with pytest.raises(ValueError):
        BimodalSpec(fractions=(0.5, 0.2))
    with pytest.raises(ValueError):
        BimodalSpec(fractions=(-0.1,))
    with pytest.raises(ValueError):
        BimodalSpec(fractions=(0.2, 1.5))
    with pytest.raises(ValueError):
        BimodalSpec(total=0)


def test_generate_expert_data_pair(grid4):
    labeled, stripped = generate_expert_data(grid4, 6, seed=5)
    assert labeled.origin == "B" and stripped.origin == "E"
    assert len(labeled) == len(stripped) == 6
    for a, b in zip(labeled.trajectories, stripped.trajectories):
        assert a.actions is not None and a.rewards is None
        assert b.actions is None and b.rewards is None
        np.testing.assert_array_equal(a.states, b.states)
    with pytest.raises(ValueError):
        generate_expert_data(grid4, 0, seed=5)


def test_drop_rewards_keeps_actions(grid4_background):
    bare = drop_rewards(grid4_background)
    assert bare.origin == grid4_background.origin
    for tr in bare.trajectories:
        assert tr.rewards is None
        assert tr.actions is not None
    # source dataset untouched
    assert all(tr.rewards is not None
               for tr in grid4_background.trajectories)


def test_sibench_levels_structure():
    levels = generate_sibench(_tiny_sibench())
    assert [lv.tag for lv in levels] == ["level_0", "level_1"]
    for lv in levels:
        assert len(lv.dataset) == 8
        assert lv.dataset.origin == "B"
        assert all(tr.rewards is None for tr in lv.dataset.trajectories)
        assert all(tr.rewards is not None
                   for tr in lv.oracle_dataset.trajectories)
        assert 0.0 <= lv.success_rate <= 1.0
        assert lv.agent is not None
        rets = [tr.episode_return() for tr in lv.oracle_dataset.trajectories]
        assert np.isclose(lv.mean_return, np.mean(rets))
        assert np.isclose(lv.std_return, np.std(rets))


def test_sibench_level_policies_use_distinct_seeds():
    levels = generate_sibench(_tiny_sibench())
    assert levels[0].agent.config.seed == 0
    assert levels[1].agent.config.seed == 1


def test_sibench_output_layout(tmp_path):
    out = tmp_path / "bench"
    generate_sibench(_tiny_sibench(), out_dir=out)
    root = out / "gridworld"
    assert (root / "expert" / "demos.jsonl").exists()
    assert (root / "expert" / "demos_stripped.jsonl").exists()
    assert (root / "sibench" / "levels.csv").exists()
    for tag in ("level_0", "level_1"):
        d = root / "sibench" / tag
        for name in ("background.jsonl", "background_oracle.jsonl",
                     "stats.csv", "returns_hist.csv", "returns_hist.svg"):
            assert (d / name).exists(), name
        assert (d / "policy" / "checkpoint.json").exists()
    demos = load_dataset(root / "expert" / "demos.jsonl")
    assert demos.origin == "B" and len(demos) == 3  # max(ladder)
    header = (root / "sibench" / "level_0" / "stats.csv").read_text().splitlines()[0]
    assert header == "level,d,episodes,mean_return,std_return,success_rate"


def test_sibench_generation_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    generate_sibench(_tiny_sibench(), out_dir=a)
    generate_sibench(_tiny_sibench(), out_dir=b)
    for rel_root, _, files in os.walk(a):
        for name in files:
            pa = os.path.join(rel_root, name)
            pb = pa.replace(str(a), str(b), 1)
            assert open(pa, "rb").read() == open(pb, "rb").read(), pa


def test_sibench_quality_grows_with_demos():
    # more demonstrations give the cloned level policy more coverage, so
    # the top of the ladder should clearly beat the bottom
    bc = RunConfig(algo="bc", env_name="gridworld", env_params=GRID,
                   steps=400, hidden=(16, 16))
    spec = SiBenchSpec(env_name="gridworld", env_params=GRID, ladder=(1, 30),
                       episodes_per_level=50, seed=3, bc=bc)
    levels = generate_sibench(spec)
    assert levels[1].mean_return > levels[0].mean_return


def test_bimodal_expert_counts_and_stats(tmp_path):
    spec = BimodalSpec(env_name="gridworld", env_params=GRID,
                       fractions=(0.0, 0.25, 1.0), total=8, seed=1)
    levels = generate_bimodal(spec, out_dir=tmp_path)
    assert len(levels) == 3
    for lv in levels:
        assert len(lv.dataset) == 8
        assert all(tr.actions is not None for tr in lv.dataset.trajectories)
    # fraction 1.0 is pure expert: near-deterministic goal reaching
    assert levels[2].success_rate > levels[0].success_rate
    assert levels[2].mean_return > levels[0].mean_return
    stats = (tmp_path / "gridworld" / "bimodal" / "level_1" /
             "stats.csv").read_text().splitlines()
    assert stats[0] == "level,fraction,episodes,mean_return,std_return,success_rate"
    assert stats[1].split(",")[1] == "0.25"


def test_bimodal_shuffle_is_permutation():
    spec = BimodalSpec(env_name="gridworld", env_params=GRID,
                       fractions=(0.5,), total=6, seed=2)
    lv = generate_bimodal(spec)[0]
    again = generate_bimodal(spec)[0]
    for a, b in zip(lv.oracle_dataset.trajectories,
                    again.oracle_dataset.trajectories):
        np.testing.assert_array_equal(a.states, b.states)


def test_return_histogram_counts(grid4_background):
    edges, counts = return_histogram(grid4_background, n_bins=10)
    assert len(edges) == 11
    assert counts.sum() == len(grid4_background)
    with pytest.raises(ValueError):
        return_histogram(drop_rewards(grid4_background))


def test_return_histogram_constant_returns():
    from vfo.data import Dataset, Trajectory
    tr = Trajectory(states=np.zeros((3, 2)), actions=np.zeros((2, 1)),
                    rewards=np.array([0.0, 1.0]), terminated=True,
                    truncated=False)
    d = Dataset([tr, tr], "B", "gridworld", {})
    edges, counts = return_histogram(d, n_bins=4)
    assert counts.sum() == 2
    assert edges[0] < 1.0 < edges[-1]
