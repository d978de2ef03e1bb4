"""Discretized-action policies: independent per-dimension categoricals over
uniformly spaced bins, with Gaussian kernel smoothing of the output
distribution.

Smoothing is a fixed row-stochastic matrix applied to the softmax output.
Training never materializes the full smoothed distribution: the likelihood
of an observed action only needs one kernel column per sample, which keeps
the per-step cost linear in the bin count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Batch, Normalizer
from .nets import AdamState, DenseNet


@dataclass
class AwrConfig:
    lam: float = 1.0
    weight_clip: float = 20.0

    def __post_init__(self):
        if self.lam <= 0 or self.weight_clip <= 0:
            raise ValueError("lam and weight_clip must be positive")


def smoothing_matrix(num_bins: int, bandwidth: float) -> np.ndarray:
    """Row-stochastic Gaussian kernel over bin indices; identity at 0."""
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    denom = 2.0 * bandwidth ** 2
    if denom == 0.0:  # bandwidth 0, or small enough that its square underflows
        return np.eye(num_bins)
    idx = np.arange(num_bins, dtype=np.float64)
    d2 = (idx[:, None] - idx[None, :]) ** 2
    S = np.exp(-d2 / denom)
    return S / S.sum(axis=1, keepdims=True)


class DiscretizedPolicy:
    """Categorical policy over bin centers, one head per action dimension."""

    def __init__(self, net: DenseNet, action_low, action_high,
                 normalizer: Normalizer, num_bins: int = 101,
                 kernel_bandwidth: float = 2.0,
                 learning_rate: float = 3e-4, weight_decay: float = 0.0):
        self.net = net
        self.action_low = np.asarray(action_low, dtype=np.float64)
        self.action_high = np.asarray(action_high, dtype=np.float64)
        self.action_dim = len(self.action_low)
        self.num_bins = int(num_bins)
        self.kernel_bandwidth = float(kernel_bandwidth)
        if net.layer_dims[-1] != self.action_dim * self.num_bins:
            raise ValueError("net output dim must be action_dim * num_bins")
        self.normalizer = normalizer
        self.S = smoothing_matrix(self.num_bins, self.kernel_bandwidth)
        self.S_T = np.ascontiguousarray(self.S.T)
        self.delta = (self.action_high - self.action_low) / (self.num_bins - 1)
        # centers[d, k] = low[d] + k * delta[d]
        self.centers = self.action_low[:, None] + self.delta[:, None] * np.arange(self.num_bins)
        self.opt = AdamState.for_params(net.param_arrays(), learning_rate=learning_rate,
                                        weight_decay=weight_decay)

    # -- distribution --------------------------------------------------------

    def _softmax_probs(self, states: np.ndarray):
        x = self.normalizer.apply(np.atleast_2d(np.asarray(states, dtype=np.float64)))
        logits, cache = self.net.forward_cached(x)
        l = logits.reshape(len(x), self.action_dim, self.num_bins)
        l = l - l.max(axis=2, keepdims=True)
        q = np.exp(l)
        q /= q.sum(axis=2, keepdims=True)
        return q, cache

    def probs(self, states: np.ndarray) -> np.ndarray:
        """Smoothed per-dimension distributions, shape (B, da, bins)."""
        q, _ = self._softmax_probs(states)
        return q @ self.S

    def action_to_bins(self, actions: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        k = np.round((a - self.action_low) / self.delta)
        return np.clip(k, 0, self.num_bins - 1).astype(np.int64)

    def bins_to_action(self, bins: np.ndarray) -> np.ndarray:
        return self.action_low + self.delta * np.asarray(bins)

    def log_probs(self, states: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """log pi(a|s) per sample: sums per-dimension smoothed bin log-probs."""
        q, _ = self._softmax_probs(states)
        k = self.action_to_bins(actions)
        p = self._bin_probs(q, k)
        return np.log(p).sum(axis=1)

    def log_prob(self, state, action) -> float:
        return float(self.log_probs(np.asarray(state)[None, :],
                                    np.asarray(action).reshape(1, -1))[0])

    def _bin_probs(self, q: np.ndarray, k: np.ndarray) -> np.ndarray:
        # p[b, d] = sum_m q[b, d, m] * S[m, k[b, d]]
        K = self.S_T[k]  # (B, da, bins), row = S[:, k]
        return np.einsum("bdm,bdm->bd", q, K)

    def sample_actions(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        p = self.probs(states)
        cum = np.cumsum(p, axis=2)
        u = rng.random(p.shape[:2])
        k = (cum < u[:, :, None]).sum(axis=2)
        k = np.minimum(k, self.num_bins - 1)
        return self.bins_to_action(k)

    def sample_action(self, state, rng: np.random.Generator) -> np.ndarray:
        return self.sample_actions(np.asarray(state)[None, :], rng)[0]

    def argmax_actions(self, states: np.ndarray) -> np.ndarray:
        return self.bins_to_action(self.probs(states).argmax(axis=2))

    def as_policy(self):
        """Stochastic callable with the (state, rng) -> action signature."""
        def policy(state, rng):
            return self.sample_action(state, rng)
        return policy

    # -- training ------------------------------------------------------------

    def weighted_nll_step(self, states, actions, weights) -> float:
        """One Adam step on -mean(w * log pi(a|s)); returns that loss."""
        w = np.asarray(weights, dtype=np.float64)
        q, cache = self._softmax_probs(states)
        k = self.action_to_bins(actions)
        K = self.S_T[k]
        p = np.einsum("bdm,bdm->bd", q, K)
        logp = np.log(p).sum(axis=1)
        loss = float(-np.mean(w * logp))
        if not np.isfinite(loss):
            raise FloatingPointError("non-finite policy loss")
        B = len(logp)
        gl = q * (K / p[:, :, None] - 1.0)
        gl *= -(w / B)[:, None, None]
        grads = self.net.backward(cache, gl.reshape(B, -1))
        self.opt.step(self.net.param_arrays(), grads)
        return loss


def awr_weights(advantages: np.ndarray, cfg: AwrConfig) -> np.ndarray:
    """Clipped exponential weights; raises if exp overflows (v diverged)."""
    with np.errstate(over="ignore"):
        raw = np.exp(np.asarray(advantages, dtype=np.float64) / cfg.lam)
    if not np.all(np.isfinite(raw)):
        raise FloatingPointError("non-finite AWR weight before clipping")
    return np.minimum(raw, cfg.weight_clip)


def bc_step(policy: DiscretizedPolicy, batch: Batch) -> float:
    """Plain likelihood step: weighted step with unit weights."""
    if batch.a is None:
        raise ValueError("bc_step needs actions")
    return policy.weighted_nll_step(batch.s, batch.a, np.ones(len(batch.s)))


def awr_step(policy: DiscretizedPolicy, vf, reward_fn, batch: Batch,
             cfg: AwrConfig):
    """Advantage-weighted likelihood step on a background batch.

    Weights are constants for the update (no gradient into the value net).
    Returns (loss, weights).
    """
    if batch.a is None:
        raise ValueError("awr_step needs actions")
    r = reward_fn(batch)
    adv = vf.advantage(batch, r)
    w = awr_weights(adv, cfg)
    loss = policy.weighted_nll_step(batch.s, batch.a, w)
    return loss, w


class InverseDynamics:
    """Categorical model of the action linking s to s': the policy head
    form on a doubled (s, s') input."""

    def __init__(self, net: DenseNet, action_low, action_high,
                 normalizer: Normalizer, num_bins: int = 101,
                 kernel_bandwidth: float = 2.0, learning_rate: float = 3e-4):
        self.head = DiscretizedPolicy(net, action_low, action_high,
                                      normalizer, num_bins=num_bins,
                                      kernel_bandwidth=kernel_bandwidth,
                                      learning_rate=learning_rate)

    @staticmethod
    def features(s: np.ndarray, s_next: np.ndarray) -> np.ndarray:
        return np.concatenate([np.atleast_2d(s), np.atleast_2d(s_next)], axis=1)

    def nll_step(self, s, s_next, actions) -> float:
        x = self.features(s, s_next)
        return self.head.weighted_nll_step(x, actions, np.ones(len(x)))

    def predict_actions(self, s, s_next) -> np.ndarray:
        return self.head.argmax_actions(self.features(s, s_next))
