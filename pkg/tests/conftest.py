"""Shared fixtures: tiny environments and datasets sized for fast tests."""

import numpy as np
import pytest

from vfo.data import Dataset, Trajectory, strip_actions
from vfo.envs import GridWorld, GridWorldExpert, rollout, uniform_random_policy


@pytest.fixture(scope="session")
def grid4():
    return GridWorld(width=4, height=4, slip=0.1, max_episode_length=20)


@pytest.fixture(scope="session")
def grid4_background(grid4):
    trajs = rollout(grid4, uniform_random_policy(grid4), 40, seed=101)
    return Dataset(trajs, "B", "gridworld", {})


@pytest.fixture(scope="session")
def grid4_expert(grid4):
    trajs = rollout(grid4, GridWorldExpert(grid4), 30, seed=102)
    return strip_actions(Dataset(trajs, "B", "gridworld", {}))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_trajectory(T=5, state_dim=2, action_dim=1, seed=0, terminated=False,
                    with_rewards=True):
    """Small random trajectory; truncated unless terminated."""
    r = np.random.default_rng(seed)
    return Trajectory(
        states=r.normal(size=(T, state_dim)),
        actions=r.uniform(-1, 1, size=(T - 1, action_dim)),
        rewards=r.normal(size=T - 1) if with_rewards else None,
        terminated=terminated,
        truncated=not terminated)
