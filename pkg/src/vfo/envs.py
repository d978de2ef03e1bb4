"""Desk-scale environments: a slippery gridworld and a continuous point mass.

Both expose the same stateless interface: `reset(rng)` draws an initial
state, `step(state, action, rng)` applies one transition. Episode-level
bookkeeping (time limits, truncation flags) lives in `rollout`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Trajectory


@dataclass(frozen=True)
class EnvSpec:
    name: str
    state_dim: int
    action_dim: int
    action_low: tuple
    action_high: tuple
    max_episode_length: int
    discrete: bool

    def __post_init__(self):
        if self.max_episode_length < 1:
            raise ValueError("max_episode_length must be >= 1")
        for lo, hi in zip(self.action_low, self.action_high):
            if not lo < hi:
                raise ValueError("action_low must be < action_high per dimension")


@dataclass(frozen=True)
class StepResult:
    next_state: np.ndarray
    reward: float
    terminated: bool
    truncated: bool

    def __post_init__(self):
        if self.terminated and self.truncated:
            raise ValueError("terminated and truncated cannot both be set")
        if not np.isfinite(self.reward):
            raise ValueError("non-finite reward")


# gridworld move vectors, indexed by the action bin: up, down, left, right
GRID_MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))


class GridWorld:
    """w x h grid, goal in a corner, reward 1 on reaching it, then done.

    The four moves are exposed through one continuous action dimension in
    [-1, 1], split into four equal bins (boundaries -0.5, 0, 0.5; each
    boundary belongs to the bin above it). With probability `slip` the
    intended move is replaced by one of the other three, uniformly.
    """

    def __init__(self, width=7, height=7, slip=0.1, goal=None,
                 max_episode_length=50, fixed_start=None):
        if width < 2 or height < 2:
            raise ValueError("grid must be at least 2x2")
        if not 0.0 <= slip < 1.0:
            raise ValueError("slip must lie in [0, 1)")
        self.width = int(width)
        self.height = int(height)
        self.slip = float(slip)
        self.goal = (width - 1, height - 1) if goal is None else (int(goal[0]), int(goal[1]))
        if not (0 <= self.goal[0] < width and 0 <= self.goal[1] < height):
            raise ValueError("goal outside the grid")
        self.fixed_start = None if fixed_start is None else (int(fixed_start[0]), int(fixed_start[1]))
        self.spec = EnvSpec(
            name="gridworld", state_dim=2, action_dim=1,
            action_low=(-1.0,), action_high=(1.0,),
            max_episode_length=int(max_episode_length), discrete=True)

    # -- state helpers ------------------------------------------------------

    def n_states(self) -> int:
        return self.width * self.height

    def state_index(self, state) -> int:
        x, y = int(round(state[0])), int(round(state[1]))
        return y * self.width + x

    def index_state(self, idx: int) -> np.ndarray:
        y, x = divmod(int(idx), self.width)
        return np.array([float(x), float(y)])

    def action_to_move(self, action) -> int:
        a = float(np.clip(np.asarray(action).reshape(-1)[0], -1.0, 1.0))
        k = int(np.floor((a + 1.0) / 0.5))
        return min(k, 3)

    def move_to_action(self, move: int) -> np.ndarray:
        # centers of the four bins on [-1, 1]
        return np.array([-0.75 + 0.5 * move])

    # -- core interface ------------------------------------------------------

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        if self.fixed_start is not None:
            return np.array([float(self.fixed_start[0]), float(self.fixed_start[1])])
        goal_idx = self.goal[1] * self.width + self.goal[0]
        idx = int(rng.integers(self.n_states() - 1))
        if idx >= goal_idx:
            idx += 1
        return self.index_state(idx)

    def step(self, state, action, rng: np.random.Generator) -> StepResult:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite action")
        move = self.action_to_move(a)
        if self.slip > 0.0 and rng.random() < self.slip:
            others = [m for m in range(4) if m != move]
            move = others[int(rng.integers(3))]
        dx, dy = GRID_MOVES[move]
        x = int(round(state[0])) + dx
        y = int(round(state[1])) + dy
        x = min(max(x, 0), self.width - 1)
        y = min(max(y, 0), self.height - 1)
        nxt = np.array([float(x), float(y)])
        done = (x, y) == self.goal
        return StepResult(nxt, 1.0 if done else 0.0, done, False)

    def is_goal(self, state) -> bool:
        return (int(round(state[0])), int(round(state[1]))) == self.goal

    # -- tabular model -------------------------------------------------------

    def transition_model(self):
        """Exact move-level dynamics P[s, m, s'] plus goal bookkeeping.

        The goal state is absorbing (never stepped from), so its row is a
        self-loop; callers treat it as terminal via `goal_index`.
        """
        n = self.n_states()
        P = np.zeros((n, 4, n))
        goal_idx = self.goal[1] * self.width + self.goal[0]
        for s in range(n):
            if s == goal_idx:
                P[s, :, s] = 1.0
                continue
            y, x = divmod(s, self.width)
            for intended in range(4):
                for actual in range(4):
                    if self.slip == 0.0:
                        p = 1.0 if actual == intended else 0.0
                    else:
                        p = (1.0 - self.slip) if actual == intended else self.slip / 3.0
                    if p == 0.0:
                        continue
                    dx, dy = GRID_MOVES[actual]
                    nx = min(max(x + dx, 0), self.width - 1)
                    ny = min(max(y + dy, 0), self.height - 1)
                    P[s, intended, ny * self.width + nx] += p
        return P, goal_idx


class GridWorldExpert:
    """Shortest-path policy from value iteration, uniform over ties."""

    def __init__(self, env: GridWorld, gamma: float = 0.99):
        from .tabular import value_iteration
        P, goal_idx = env.transition_model()
        n = env.n_states()
        R = np.zeros((n, 4))
        for s in range(n):
            if s == goal_idx:
                continue
            R[s] = P[s, :, goal_idx]
        terminal = np.zeros(n, dtype=bool)
        terminal[goal_idx] = True
        _, q = value_iteration(P, R, gamma, terminal)
        self.env = env
        best = q.max(axis=1, keepdims=True)
        self.optimal = q >= best - 1e-9

    def __call__(self, state, rng: np.random.Generator) -> np.ndarray:
        s = self.env.state_index(state)
        moves = np.flatnonzero(self.optimal[s])
        move = int(moves[rng.integers(len(moves))]) if len(moves) > 1 else int(moves[0])
        return self.env.move_to_action(move)


class PointMass:
    """2-D point mass with acceleration control and a dense -distance reward.

    State is (px, py, vx, vy); actions are accelerations in [-1, 1]^2
    integrated with dt = 0.1. Position and velocity are clipped to keep the
    state box bounded. Reaching within `success_radius` of the goal ends the
    episode.
    """

    def __init__(self, goal=(0.0, 0.0), dt=0.1, success_radius=0.1,
                 max_episode_length=100, start_exclusion=0.3):
        self.goal = np.asarray(goal, dtype=np.float64)
        self.dt = float(dt)
        self.success_radius = float(success_radius)
        self.start_exclusion = float(start_exclusion)
        self.pos_limit = 1.0
        self.vel_limit = 1.0
        self.spec = EnvSpec(
            name="pointmass", state_dim=4, action_dim=2,
            action_low=(-1.0, -1.0), action_high=(1.0, 1.0),
            max_episode_length=int(max_episode_length), discrete=False)

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        while True:
            pos = rng.uniform(-self.pos_limit, self.pos_limit, size=2)
            if np.linalg.norm(pos - self.goal) > self.start_exclusion:
                break
        return np.array([pos[0], pos[1], 0.0, 0.0])

    def step(self, state, action, rng: np.random.Generator) -> StepResult:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite action")
        a = np.clip(a, -1.0, 1.0)
        pos = np.asarray(state[:2], dtype=np.float64)
        vel = np.asarray(state[2:], dtype=np.float64)
        vel = np.clip(vel + self.dt * a, -self.vel_limit, self.vel_limit)
        pos = np.clip(pos + self.dt * vel, -self.pos_limit, self.pos_limit)
        nxt = np.concatenate([pos, vel])
        dist = float(np.linalg.norm(pos - self.goal))
        done = dist < self.success_radius
        return StepResult(nxt, -dist, done, False)


class PointMassExpert:
    """Saturated PD controller toward the goal."""

    def __init__(self, env: PointMass, kp: float = 5.0, kd: float = 3.0):
        self.env = env
        self.kp = kp
        self.kd = kd

    def __call__(self, state, rng: np.random.Generator) -> np.ndarray:
        pos = np.asarray(state[:2])
        vel = np.asarray(state[2:])
        a = self.kp * (self.env.goal - pos) - self.kd * vel
        return np.clip(a, -1.0, 1.0)


def uniform_random_policy(env):
    lo = np.asarray(env.spec.action_low)
    hi = np.asarray(env.spec.action_high)

    def policy(state, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(lo, hi)

    return policy


def make_env(name: str, **params):
    if name == "gridworld":
        return GridWorld(**params)
    if name == "pointmass":
        return PointMass(**params)
    raise ValueError(f"unknown environment {name!r}")


def expert_policy(env):
    if isinstance(env, GridWorld):
        return GridWorldExpert(env)
    if isinstance(env, PointMass):
        return PointMassExpert(env)
    raise ValueError(f"no expert for {type(env).__name__}")


def rollout(env, policy, n_episodes: int, seed: int) -> list[Trajectory]:
    """Roll a policy for n_episodes; one child rng per episode.

    Each trajectory records states, actions and ground-truth rewards; the
    reward channel is only ever surfaced to oracle consumers. Episodes that
    hit the env's max length without terminating are flagged truncated.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    base = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    out = []
    for ep in range(n_episodes):
        rng = np.random.default_rng(base + [ep])
        state = env.reset(rng)
        states = [state]
        actions = []
        rewards = []
        terminated = False
        for _ in range(env.spec.max_episode_length):
            action = np.asarray(policy(state, rng), dtype=np.float64).reshape(-1)
            res = env.step(state, action, rng)
            states.append(res.next_state)
            actions.append(action)
            rewards.append(res.reward)
            state = res.next_state
            if res.terminated:
                terminated = True
                break
        out.append(Trajectory(
            states=np.asarray(states, dtype=np.float64),
            actions=np.asarray(actions, dtype=np.float64),
            rewards=np.asarray(rewards, dtype=np.float64),
            terminated=terminated,
            truncated=not terminated))
    return out
