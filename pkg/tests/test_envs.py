"""Environment tests: dynamics, experts, rollout bookkeeping, tabular model."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfo.envs import (GRID_MOVES, GridWorld, GridWorldExpert, PointMass,
                      PointMassExpert, expert_policy, make_env, rollout,
                      uniform_random_policy)


def test_make_env_dispatch():
    assert isinstance(make_env("gridworld"), GridWorld)
    assert isinstance(make_env("pointmass"), PointMass)
    with pytest.raises(ValueError):
        make_env("cartpole")


def test_expert_dispatch(grid4):
    assert isinstance(expert_policy(grid4), GridWorldExpert)
    assert isinstance(expert_policy(PointMass()), PointMassExpert)


# -- gridworld ----------------------------------------------------------------


def test_grid_action_bins_cover_unit_interval(grid4):
    # bin boundaries at -0.5, 0.0, 0.5; each boundary belongs to the upper bin
    assert grid4.action_to_move([-1.0]) == 0
    assert grid4.action_to_move([-0.51]) == 0
    assert grid4.action_to_move([-0.5]) == 1
    assert grid4.action_to_move([0.0]) == 2
    assert grid4.action_to_move([0.49]) == 2
    assert grid4.action_to_move([0.5]) == 3
    assert grid4.action_to_move([1.0]) == 3


@given(move=st.integers(0, 3))
def test_grid_move_action_roundtrip(move):
    env = GridWorld(width=4, height=4)
    assert env.action_to_move(env.move_to_action(move)) == move


def test_grid_deterministic_steps_without_slip(rng):
    env = GridWorld(width=4, height=4, slip=0.0)
    state = np.array([1.0, 1.0])
    for move, (dx, dy) in enumerate(GRID_MOVES):
        res = env.step(state, env.move_to_action(move), rng)
        np.testing.assert_array_equal(res.next_state, [1 + dx, 1 + dy])


def test_grid_walls_clip(rng):
    env = GridWorld(width=3, height=3, slip=0.0, goal=(1, 1))
    res = env.step(np.array([0.0, 0.0]), env.move_to_action(2), rng)  # left
    np.testing.assert_array_equal(res.next_state, [0, 0])


def test_grid_goal_terminates_with_reward(rng):
    env = GridWorld(width=3, height=3, slip=0.0)
    res = env.step(np.array([1.0, 2.0]), env.move_to_action(3), rng)  # right
    assert res.terminated and res.reward == 1.0
    assert env.is_goal(res.next_state)


def test_grid_nongoal_reward_zero(rng):
    env = GridWorld(width=3, height=3, slip=0.0)
    res = env.step(np.array([0.0, 0.0]), env.move_to_action(0), rng)
    assert res.reward == 0.0 and not res.terminated


def test_grid_reset_never_starts_on_goal():
    env = GridWorld(width=3, height=3, goal=(1, 1))
    rng = np.random.default_rng(5)
    starts = {tuple(env.reset(rng)) for _ in range(200)}
    assert (1.0, 1.0) not in starts
    assert len(starts) == env.n_states() - 1  # all other cells reachable


def test_grid_fixed_start():
    env = GridWorld(width=4, height=4, fixed_start=(2, 1))
    rng = np.random.default_rng(0)
    for _ in range(5):
        np.testing.assert_array_equal(env.reset(rng), [2.0, 1.0])


def test_grid_state_index_roundtrip(grid4):
    for idx in range(grid4.n_states()):
        assert grid4.state_index(grid4.index_state(idx)) == idx


def test_grid_validation():
    with pytest.raises(ValueError):
        GridWorld(width=1, height=4)
    with pytest.raises(ValueError):
        GridWorld(slip=1.0)
    with pytest.raises(ValueError):
        GridWorld(width=3, height=3, goal=(3, 0))


def test_grid_slip_frequency():
    env = GridWorld(width=9, height=9, slip=0.3, goal=(8, 8))
    rng = np.random.default_rng(7)
    state = np.array([4.0, 4.0])
    up = env.move_to_action(0)
    hits = sum(
        np.array_equal(env.step(state, up, rng).next_state, [4.0, 5.0])
        for _ in range(4000))
    assert abs(hits / 4000 - 0.7) < 0.03


def test_grid_transition_model_rows_are_distributions(grid4):
    P, goal_idx = grid4.transition_model()
    np.testing.assert_allclose(P.sum(axis=2), 1.0, atol=1e-12)
    assert P[goal_idx, 0, goal_idx] == 1.0


def test_grid_transition_model_matches_sampling():
    env = GridWorld(width=3, height=3, slip=0.25, goal=(2, 2))
    P, _ = env.transition_model()
    rng = np.random.default_rng(11)
    state = np.array([1.0, 1.0])
    s_idx = env.state_index(state)
    counts = np.zeros(env.n_states())
    n = 6000
    act = env.move_to_action(3)
    for _ in range(n):
        res = env.step(state, act, rng)
        counts[env.state_index(res.next_state)] += 1
    np.testing.assert_allclose(counts / n, P[s_idx, 3], atol=0.03)


def test_grid_expert_reaches_goal_quickly():
    env = GridWorld(width=5, height=5, slip=0.0, max_episode_length=10)
    trajs = rollout(env, GridWorldExpert(env), 30, seed=3)
    for tr in trajs:
        assert tr.terminated
        # shortest path length = manhattan distance to the goal
        x0, y0 = tr.states[0]
        assert len(tr.actions) == abs(4 - x0) + abs(4 - y0)


def test_grid_expert_high_success_with_slip():
    env = GridWorld(width=5, height=5, slip=0.1, max_episode_length=40)
    trajs = rollout(env, GridWorldExpert(env), 100, seed=4)
    assert np.mean([tr.terminated for tr in trajs]) > 0.95


# -- point mass ---------------------------------------------------------------


def test_pointmass_integration(rng):
    env = PointMass(goal=(0.0, 0.0))
    state = np.array([0.5, -0.5, 0.0, 0.0])
    res = env.step(state, np.array([1.0, 0.0]), rng)
    np.testing.assert_allclose(res.next_state[2:], [0.1, 0.0])
    np.testing.assert_allclose(res.next_state[:2], [0.5 + 0.1 * 0.1, -0.5])


def test_pointmass_reward_is_negative_distance(rng):
    env = PointMass(goal=(0.0, 0.0))
    res = env.step(np.array([0.5, 0.0, 0.0, 0.0]), np.zeros(2), rng)
    assert res.reward == -np.linalg.norm(res.next_state[:2])


def test_pointmass_clips_state(rng):
    env = PointMass()
    state = np.array([1.0, 1.0, 1.0, 1.0])
    res = env.step(state, np.array([1.0, 1.0]), rng)
    assert np.all(res.next_state[:2] <= 1.0) and np.all(res.next_state[2:] <= 1.0)


def test_pointmass_reset_outside_exclusion():
    env = PointMass(goal=(0.0, 0.0), start_exclusion=0.3)
    rng = np.random.default_rng(9)
    for _ in range(100):
        s = env.reset(rng)
        assert np.linalg.norm(s[:2]) > 0.3
        assert np.all(s[2:] == 0.0)


def test_pointmass_expert_succeeds():
    env = PointMass(max_episode_length=100)
    trajs = rollout(env, PointMassExpert(env), 30, seed=6)
    assert np.mean([tr.terminated for tr in trajs]) > 0.9


def test_nonfinite_action_rejected(grid4, rng):
    with pytest.raises(ValueError):
        grid4.step(np.array([0.0, 0.0]), np.array([np.inf]), rng)


# -- rollout ------------------------------------------------------------------


def test_rollout_shapes_and_flags(grid4):
    trajs = rollout(grid4, uniform_random_policy(grid4), 20, seed=8)
    for tr in trajs:
        assert len(tr.states) == len(tr.actions) + 1 == len(tr.rewards) + 1
        assert tr.terminated != tr.truncated
        if tr.truncated:
            assert len(tr.actions) == grid4.spec.max_episode_length
        else:
            assert grid4.is_goal(tr.states[-1])


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_rollout_deterministic_in_seed(grid4, seed):
    a = rollout(grid4, uniform_random_policy(grid4), 3, seed=seed)
    b = rollout(grid4, uniform_random_policy(grid4), 3, seed=seed)
    assert a == b


def test_rollout_accepts_seed_tuples(grid4):
    a = rollout(grid4, uniform_random_policy(grid4), 2, seed=(3, 1))
    b = rollout(grid4, uniform_random_policy(grid4), 2, seed=(3, 1))
    c = rollout(grid4, uniform_random_policy(grid4), 2, seed=(3, 2))
    assert a == b and a != c


def test_rollout_episode_prefix_property(grid4):
    # the first episodes of a longer run equal a shorter run exactly
    short = rollout(grid4, uniform_random_policy(grid4), 2, seed=12)
    long = rollout(grid4, uniform_random_policy(grid4), 5, seed=12)
    assert long[:2] == short
