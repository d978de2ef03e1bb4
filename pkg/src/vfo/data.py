"""Trajectory and dataset containers, mixture sampling, normalization, I/O.

Datasets live on disk as JSON lines: a header object followed by one object
per trajectory. Values round-trip bit-exactly because json serializes
doubles through repr(). Files ending in .gz are transparently compressed.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = 1

ORIGIN_EXPERT = "E"
ORIGIN_BACKGROUND = "B"


@dataclass
class Trajectory:
    """One episode: states (T, ds), optional actions (T-1, da), optional
    per-step rewards (T-1,), and how the episode ended."""

    states: np.ndarray
    actions: np.ndarray | None
    rewards: np.ndarray | None
    terminated: bool
    truncated: bool

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.states.ndim != 2 or len(self.states) < 1:
            raise ValueError("states must be a (T, state_dim) array with T >= 1")
        if self.actions is not None and len(self.actions) == 0:
            self.actions = None
        if self.rewards is not None and len(self.rewards) == 0:
            self.rewards = None
        if self.actions is not None:
            self.actions = np.asarray(self.actions, dtype=np.float64)
            if self.actions.ndim != 2 or len(self.actions) != len(self.states) - 1:
                raise ValueError("actions must have shape (T-1, action_dim)")
        if self.rewards is not None:
            self.rewards = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
            if len(self.rewards) != len(self.states) - 1:
                raise ValueError("rewards must have length T-1")
        if self.terminated and self.truncated:
            raise ValueError("terminated and truncated cannot both be set")

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)
        return (same(self.states, other.states)
                and same(self.actions, other.actions)
                and same(self.rewards, other.rewards)
                and self.terminated == other.terminated
                and self.truncated == other.truncated)

    def episode_return(self) -> float:
        if self.rewards is None:
            raise ValueError("trajectory carries no rewards")
        return float(self.rewards.sum())


@dataclass
class Dataset:
    """Homogeneous collection of trajectories with an origin tag.

    Origin E datasets are action-free by construction (the observation-only
    setting); origin B datasets must carry actions.
    """

    trajectories: list[Trajectory]
    origin: str
    env_name: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.origin not in (ORIGIN_EXPERT, ORIGIN_BACKGROUND):
            raise ValueError(f"origin must be E or B, got {self.origin!r}")
        for tr in self.trajectories:
            if self.origin == ORIGIN_EXPERT and tr.actions is not None:
                raise ValueError("expert datasets must not carry actions")
            if self.origin == ORIGIN_BACKGROUND and tr.actions is None:
                raise ValueError("background datasets must carry actions")

    def __len__(self) -> int:
        return len(self.trajectories)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.origin == other.origin
                and self.env_name == other.env_name
                and self.metadata == other.metadata
                and self.trajectories == other.trajectories)

    def n_transitions(self) -> int:
        return sum(len(tr) - 1 for tr in self.trajectories)

    def all_states(self) -> np.ndarray:
        """Every state in the dataset, including final states, stacked."""
        return np.concatenate([tr.states for tr in self.trajectories], axis=0)

    def mean_return(self) -> float:
        return float(np.mean([tr.episode_return() for tr in self.trajectories]))


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    s_next: np.ndarray
    a: np.ndarray | None
    z: str
    is_terminal: bool
    is_truncation_boundary: bool


def transitions(dataset: Dataset) -> list[Transition]:
    """Slice a dataset into labeled (s, s', a?, z) transitions."""
    out = []
    z = dataset.origin
    for tr in dataset.trajectories:
        last = len(tr.states) - 2
        for i in range(len(tr.states) - 1):
            out.append(Transition(
                s=tr.states[i],
                s_next=tr.states[i + 1],
                a=None if tr.actions is None else tr.actions[i],
                z=z,
                is_terminal=tr.terminated and i == last,
                is_truncation_boundary=tr.truncated and i == last))
    return out


class TransitionArrays:
    """Column-oriented view of a dataset's transitions for batched math."""

    @classmethod
    def from_arrays(cls, s, s_next, a, terminal, truncation, rewards=None):
        obj = cls.__new__(cls)
        obj.s = np.asarray(s, dtype=np.float64)
        obj.s_next = np.asarray(s_next, dtype=np.float64)
        obj.a = None if a is None else np.asarray(a, dtype=np.float64)
        obj.rewards = None if rewards is None else np.asarray(rewards, dtype=np.float64)
        obj.terminal = np.asarray(terminal, dtype=bool)
        obj.truncation = np.asarray(truncation, dtype=bool)
        obj.n = len(obj.s)
        return obj

    def __init__(self, dataset: Dataset):
        s, s_next, acts, rews, term, trunc = [], [], [], [], [], []
        for tr in dataset.trajectories:
            T = len(tr.states)
            if T < 2:
                continue
            s.append(tr.states[:-1])
            s_next.append(tr.states[1:])
            if tr.actions is not None:
                acts.append(tr.actions)
            if tr.rewards is not None:
                rews.append(tr.rewards)
            t = np.zeros(T - 1, dtype=bool)
            u = np.zeros(T - 1, dtype=bool)
            t[-1] = tr.terminated
            u[-1] = tr.truncated
            term.append(t)
            trunc.append(u)
        if not s:
            raise ValueError("dataset has no transitions")
        self.s = np.concatenate(s, axis=0)
        self.s_next = np.concatenate(s_next, axis=0)
        self.a = np.concatenate(acts, axis=0) if len(acts) == len(s) else None
        self.rewards = np.concatenate(rews, axis=0) if len(rews) == len(s) else None
        self.terminal = np.concatenate(term)
        self.truncation = np.concatenate(trunc)
        self.n = len(self.s)


@dataclass
class Batch:
    """A sampled minibatch in column form; z_expert marks origin E rows.

    `rewards` is only populated by single-dataset samplers over data that
    carries ground-truth rewards (the oracle path); mixture batches never
    expose it.
    """

    s: np.ndarray
    s_next: np.ndarray
    a: np.ndarray | None
    z_expert: np.ndarray
    terminal: np.ndarray
    rewards: np.ndarray | None = None


class MixtureSampler:
    """Transition sampler for the virtual mixture of expert and background.

    Each draw independently picks origin B with probability alpha, E with
    probability 1 - alpha, then a transition uniformly from the chosen
    dataset.
    """

    def __init__(self, expert: Dataset | TransitionArrays,
                 background: Dataset | TransitionArrays,
                 alpha: float, rng: np.random.Generator):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        self.alpha = float(alpha)
        self.expert = expert if isinstance(expert, TransitionArrays) else TransitionArrays(expert)
        self.background = background if isinstance(background, TransitionArrays) else TransitionArrays(background)
        self.rng = rng

    def sample_arrays(self, batch_size: int) -> Batch:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        from_b = self.rng.random(batch_size) < self.alpha
        idx = np.empty(batch_size, dtype=np.int64)
        n_b = int(from_b.sum())
        if batch_size - n_b > 0:
            idx[~from_b] = self.rng.integers(self.expert.n, size=batch_size - n_b)
        if n_b > 0:
            idx[from_b] = self.rng.integers(self.background.n, size=n_b)
        s = np.empty((batch_size, self.expert.s.shape[1]))
        s_next = np.empty_like(s)
        terminal = np.empty(batch_size, dtype=bool)
        e = ~from_b
        s[e] = self.expert.s[idx[e]]
        s[from_b] = self.background.s[idx[from_b]]
        s_next[e] = self.expert.s_next[idx[e]]
        s_next[from_b] = self.background.s_next[idx[from_b]]
        terminal[e] = self.expert.terminal[idx[e]]
        terminal[from_b] = self.background.terminal[idx[from_b]]
        a = None
        if self.background.a is not None:
            a = np.zeros((batch_size, self.background.a.shape[1]))
            a[from_b] = self.background.a[idx[from_b]]
        return Batch(s=s, s_next=s_next, a=a, z_expert=e, terminal=terminal)

    def sample_batch(self, batch_size: int) -> list[Transition]:
        b = self.sample_arrays(batch_size)
        out = []
        for i in range(len(b.s)):
            expert = bool(b.z_expert[i])
            out.append(Transition(
                s=b.s[i], s_next=b.s_next[i],
                a=None if expert or b.a is None else b.a[i],
                z=ORIGIN_EXPERT if expert else ORIGIN_BACKGROUND,
                is_terminal=bool(b.terminal[i]),
                is_truncation_boundary=False))
        return out


class UniformSampler:
    """Uniform transition sampler over a single dataset."""

    def __init__(self, dataset: Dataset | TransitionArrays, rng: np.random.Generator,
                 origin: str = ORIGIN_BACKGROUND):
        self.arrays = dataset if isinstance(dataset, TransitionArrays) else TransitionArrays(dataset)
        self.rng = rng
        self.expert_origin = origin == ORIGIN_EXPERT

    def sample_arrays(self, batch_size: int) -> Batch:
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        idx = self.rng.integers(self.arrays.n, size=batch_size)
        z = np.full(batch_size, self.expert_origin)
        a = None if self.arrays.a is None else self.arrays.a[idx]
        r = None if self.arrays.rewards is None else self.arrays.rewards[idx]
        return Batch(s=self.arrays.s[idx], s_next=self.arrays.s_next[idx],
                     a=a, z_expert=z, terminal=self.arrays.terminal[idx],
                     rewards=r)


def strip_actions(dataset: Dataset) -> Dataset:
    """Drop actions and rewards, retag as expert. States are untouched."""
    out = []
    for tr in dataset.trajectories:
        out.append(Trajectory(states=tr.states.copy(), actions=None, rewards=None,
                              terminated=tr.terminated, truncated=tr.truncated))
    return Dataset(trajectories=out, origin=ORIGIN_EXPERT,
                   env_name=dataset.env_name, metadata=dict(dataset.metadata))


class Normalizer:
    """Frozen per-dimension whitening fitted once on all available states."""

    def __init__(self, mean: np.ndarray, var: np.ndarray, count: int):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.var = np.asarray(var, dtype=np.float64)
        self.count = int(count)
        self.scale = 1.0 / np.sqrt(np.maximum(self.var, 1e-6))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) * self.scale

    @classmethod
    def identity(cls, dim: int) -> "Normalizer":
        return cls(np.zeros(dim), np.ones(dim), 0)

    def doubled(self) -> "Normalizer":
        """Normalizer for concatenated (s, s') inputs."""
        return Normalizer(np.concatenate([self.mean, self.mean]),
                          np.concatenate([self.var, self.var]), self.count)


def fit_normalizer(datasets) -> Normalizer:
    states = np.concatenate([d.all_states() for d in datasets], axis=0)
    if len(states) == 0:
        raise ValueError("no states to fit a normalizer on")
    return Normalizer(states.mean(axis=0), states.var(axis=0), len(states))


# ---------------------------------------------------------------------------
# serialization


def _open(path, mode):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t")
    return open(path, mode)


def save_dataset(dataset: Dataset, path) -> None:
    with _open(path, "w") as fh:
        header = {"env_name": dataset.env_name, "origin": dataset.origin,
                  "metadata": dataset.metadata, "version": FORMAT_VERSION}
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")))
        fh.write("\n")
        for tr in dataset.trajectories:
            row = {"states": tr.states.tolist()}
            if tr.actions is not None:
                row["actions"] = tr.actions.tolist()
            if tr.rewards is not None:
                row["rewards"] = tr.rewards.tolist()
            row["terminated"] = tr.terminated
            row["truncated"] = tr.truncated
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def load_dataset(path) -> Dataset:
    with _open(path, "r") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise ValueError(f"empty dataset file {path}")
        header = json.loads(header_line)
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported dataset version in {path}")
        trajectories = []
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            trajectories.append(Trajectory(
                states=np.asarray(row["states"], dtype=np.float64),
                actions=None if "actions" not in row else np.asarray(row["actions"], dtype=np.float64),
                rewards=None if "rewards" not in row else np.asarray(row["rewards"], dtype=np.float64),
                terminated=bool(row["terminated"]),
                truncated=bool(row["truncated"])))
    return Dataset(trajectories=trajectories, origin=header["origin"],
                   env_name=header["env_name"], metadata=header.get("metadata", {}))
