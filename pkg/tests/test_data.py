"""Dataset container tests: validation, sampling, normalization, round trips."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from vfo.data import (Dataset, MixtureSampler, Normalizer, Trajectory,
                      TransitionArrays, Transition, UniformSampler,
                      fit_normalizer, load_dataset, save_dataset,
                      strip_actions, transitions)
from conftest import make_trajectory


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2)), np.zeros((3, 1)), None, False, True)
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2)), None, np.zeros(3), False, True)
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2)), None, None, True, True)
    with pytest.raises(ValueError):
        Trajectory(np.zeros(3), None, None, False, True)


def test_trajectory_episode_return():
    tr = make_trajectory(T=4, seed=1)
    assert tr.episode_return() == pytest.approx(tr.rewards.sum())
    bare = Trajectory(tr.states, tr.actions, None, False, True)
    with pytest.raises(ValueError):
        bare.episode_return()


def test_dataset_origin_rules():
    tr = make_trajectory(T=3, seed=2)
    with pytest.raises(ValueError):
        Dataset([tr], "E", "gridworld", {})  # expert data must be action free
    stripped = Trajectory(tr.states, None, None, False, True)
    with pytest.raises(ValueError):
        Dataset([stripped], "B", "gridworld", {})  # background needs actions
    with pytest.raises(ValueError):
        Dataset([tr], "X", "gridworld", {})


def test_dataset_counters():
    trs = [make_trajectory(T=4, seed=3), make_trajectory(T=6, seed=4)]
    ds = Dataset(trs, "B", "gridworld", {})
    assert len(ds) == 2
    assert ds.n_transitions() == 3 + 5
    assert ds.all_states().shape == (10, 2)


def test_transitions_slicing():
    tr = make_trajectory(T=4, seed=5, terminated=True)
    ds = Dataset([tr], "B", "gridworld", {})
    ts = transitions(ds)
    assert len(ts) == 3
    assert [t.is_terminal for t in ts] == [False, False, True]
    assert all(t.z == "B" for t in ts)
    np.testing.assert_array_equal(ts[1].s, tr.states[1])
    np.testing.assert_array_equal(ts[1].s_next, tr.states[2])
    np.testing.assert_array_equal(ts[1].a, tr.actions[1])


def test_truncation_boundary_flag():
    tr = make_trajectory(T=4, seed=6, terminated=False)
    ts = transitions(Dataset([tr], "B", "gridworld", {}))
    assert [t.is_truncation_boundary for t in ts] == [False, False, True]
    assert not any(t.is_terminal for t in ts)


def test_transition_arrays_column_layout():
    trs = [make_trajectory(T=3, seed=7, terminated=True),
           make_trajectory(T=5, seed=8)]
    arr = TransitionArrays(Dataset(trs, "B", "gridworld", {}))
    assert arr.n == 2 + 4
    np.testing.assert_array_equal(arr.terminal,
                                  [False, True, False, False, False, False])
    np.testing.assert_array_equal(arr.truncation,
                                  [False, False, False, False, False, True])
    np.testing.assert_array_equal(arr.s[2:], trs[1].states[:-1])
    np.testing.assert_array_equal(arr.s_next[2:], trs[1].states[1:])
    np.testing.assert_array_equal(arr.rewards[:2], trs[0].rewards)


def test_strip_actions_retags_and_drops():
    ds = Dataset([make_trajectory(T=4, seed=9)], "B", "gridworld", {"k": 1})
    out = strip_actions(ds)
    assert out.origin == "E"
    assert out.metadata == {"k": 1}
    tr = out.trajectories[0]
    assert tr.actions is None and tr.rewards is None
    np.testing.assert_array_equal(tr.states, ds.trajectories[0].states)


# -- samplers -----------------------------------------------------------------


def _two_datasets():
    e = strip_actions(Dataset([make_trajectory(T=30, seed=10)], "B", "g", {}))
    b = Dataset([make_trajectory(T=30, seed=11)], "B", "g", {})
    return e, b


def test_mixture_alpha_proportion():
    e, b = _two_datasets()
    mix = MixtureSampler(e, b, alpha=0.3, rng=np.random.default_rng(1))
    batch = mix.sample_arrays(20000)
    frac_b = 1.0 - batch.z_expert.mean()
    assert abs(frac_b - 0.3) < 0.02


def test_mixture_rows_come_from_their_origin():
    e, b = _two_datasets()
    mix = MixtureSampler(e, b, alpha=0.5, rng=np.random.default_rng(2))
    batch = mix.sample_arrays(500)
    e_arr, b_arr = TransitionArrays(e), TransitionArrays(b)

    def member(rows, pool):
        return np.array([np.any(np.all(pool == r, axis=1)) for r in rows])

    assert member(batch.s[batch.z_expert], e_arr.s).all()
    assert member(batch.s[~batch.z_expert], b_arr.s).all()


def test_mixture_expert_rows_have_zero_actions():
    e, b = _two_datasets()
    mix = MixtureSampler(e, b, alpha=0.5, rng=np.random.default_rng(3))
    batch = mix.sample_arrays(200)
    assert np.all(batch.a[batch.z_expert] == 0.0)
    assert batch.rewards is None


def test_mixture_alpha_bounds():
    e, b = _two_datasets()
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            MixtureSampler(e, b, alpha=bad, rng=np.random.default_rng(0))


def test_mixture_transition_view_matches_arrays():
    e, b = _two_datasets()
    a = MixtureSampler(e, b, 0.5, np.random.default_rng(4)).sample_batch(50)
    r = MixtureSampler(e, b, 0.5, np.random.default_rng(4)).sample_arrays(50)
    for i, t in enumerate(a):
        assert isinstance(t, Transition)
        assert (t.z == "E") == bool(r.z_expert[i])
        np.testing.assert_array_equal(t.s, r.s[i])


def test_uniform_sampler_surfaces_rewards():
    _, b = _two_datasets()
    batch = UniformSampler(b, np.random.default_rng(5)).sample_arrays(64)
    assert batch.rewards is not None and batch.a is not None
    assert not batch.z_expert.any()


def test_uniform_sampler_covers_dataset():
    _, b = _two_datasets()
    batch = UniformSampler(b, np.random.default_rng(6)).sample_arrays(5000)
    arr = TransitionArrays(b)
    seen = {tuple(s) for s in batch.s}
    assert seen == {tuple(s) for s in arr.s}


def test_empty_batch_rejected():
    e, b = _two_datasets()
    with pytest.raises(ValueError):
        MixtureSampler(e, b, 0.5, np.random.default_rng(0)).sample_arrays(0)


# -- normalizer ---------------------------------------------------------------


def test_normalizer_whitens():
    rng = np.random.default_rng(7)
    states = rng.normal(loc=3.0, scale=2.0, size=(500, 2))
    tr = Trajectory(states, None, None, False, True)
    norm = fit_normalizer([Dataset([tr], "E", "g", {})])
    out = norm.apply(states)
    np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(out.std(axis=0), 1.0, atol=1e-6)


def test_normalizer_identity():
    x = np.random.default_rng(8).normal(size=(4, 3))
    np.testing.assert_array_equal(Normalizer.identity(3).apply(x), x)


def test_normalizer_constant_dimension_stays_finite():
    states = np.ones((10, 1))
    norm = fit_normalizer([Dataset([Trajectory(states, None, None, False, True)],
                                   "E", "g", {})])
    assert np.all(np.isfinite(norm.apply(states)))


def test_normalizer_doubled():
    norm = Normalizer(np.array([1.0, 2.0]), np.array([4.0, 9.0]), 10)
    d = norm.doubled()
    np.testing.assert_array_equal(d.mean, [1.0, 2.0, 1.0, 2.0])
    np.testing.assert_array_equal(d.var, [4.0, 9.0, 4.0, 9.0])


# -- serialization ------------------------------------------------------------


@settings(max_examples=20, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 10**6), terminated=st.booleans(),
       with_rewards=st.booleans())
def test_dataset_roundtrip_bit_exact(tmp_path, seed, terminated, with_rewards):
    ds = Dataset([make_trajectory(T=4, seed=seed, terminated=terminated,
                                  with_rewards=with_rewards),
                  make_trajectory(T=2, seed=seed + 1, with_rewards=with_rewards)],
                 "B", "gridworld", {"note": "x", "n": 2})
    path = tmp_path / "d.jsonl"
    save_dataset(ds, path)
    assert load_dataset(path) == ds


def test_dataset_roundtrip_gzip(tmp_path):
    ds = Dataset([make_trajectory(T=5, seed=20)], "B", "gridworld", {})
    path = tmp_path / "d.jsonl.gz"
    save_dataset(ds, path)
    assert path.read_bytes()[:2] == b"\x1f\x8b"
    assert load_dataset(path) == ds


def test_expert_dataset_roundtrip(tmp_path):
    ds = strip_actions(Dataset([make_trajectory(T=5, seed=21)], "B", "pm", {}))
    path = tmp_path / "e.jsonl"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert back.origin == "E"
    assert back == ds


def test_load_rejects_bad_version(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"env_name": "g", "origin": "B", "metadata": {}, "version": 99}\n')
    with pytest.raises(ValueError):
        load_dataset(path)


def test_load_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(ValueError):
        load_dataset(path)


def test_save_is_deterministic(tmp_path):
    ds = Dataset([make_trajectory(T=6, seed=22)], "B", "gridworld", {"a": 1})
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_dataset(ds, p1)
    save_dataset(ds, p2)
    assert p1.read_bytes() == p2.read_bytes()
