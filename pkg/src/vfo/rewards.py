"""Reward sources: the binary origin indicator and a learned discriminator.

The discriminator is a state classifier trained with the standard
cross-entropy objective on equal halves of expert and background states;
its sigmoid output is used directly as the reward at next states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Normalizer, Transition
from .nets import AdamState, DenseNet


def binary_reward(transition: Transition) -> float:
    return 1.0 if transition.z == "E" else 0.0


def binary_reward_batch(z_expert: np.ndarray) -> np.ndarray:
    return np.asarray(z_expert, dtype=np.float64)


def _softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + exp(x)) without overflow
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DiscConfig:
    steps: int = 5000
    batch_size: int = 256
    learning_rate: float = 3e-4
    hidden: tuple = (64, 64)
    weight_decay: float = 0.0
    log_every: int = 100


class Discriminator:
    """State classifier d(s) in (0, 1); high means expert-like."""

    def __init__(self, net: DenseNet, normalizer: Normalizer):
        self.net = net
        self.normalizer = normalizer

    def logits(self, states: np.ndarray) -> np.ndarray:
        x = self.normalizer.apply(np.atleast_2d(np.asarray(states, dtype=np.float64)))
        return self.net.forward(x)[:, 0]

    def prob(self, states: np.ndarray) -> np.ndarray:
        return _sigmoid(self.logits(states))

    def reward(self, s_next: np.ndarray) -> np.ndarray:
        """Reward for a batch of transitions, evaluated at the next state."""
        return self.prob(s_next)


def disc_reward(d: Discriminator, transition: Transition) -> float:
    return float(d.prob(transition.s_next[None, :])[0])


def discriminator_loss(d: Discriminator, expert_states, background_states) -> float:
    """Mean cross-entropy of the two halves, as trained."""
    le = d.logits(expert_states)
    lb = d.logits(background_states)
    return float(_softplus(-le).mean() + _softplus(lb).mean())


def discriminator_loss_grad(net: DenseNet, xe: np.ndarray, xb: np.ndarray):
    """Loss and parameter gradients on already-normalized inputs."""
    oe, ce = net.forward_cached(xe)
    ob, cb = net.forward_cached(xb)
    le, lb = oe[:, 0], ob[:, 0]
    loss = float(_softplus(-le).mean() + _softplus(lb).mean())
    ge = (_sigmoid(le) - 1.0) / len(le)
    gb = _sigmoid(lb) / len(lb)
    grads_e = net.backward(ce, ge[:, None])
    grads_b = net.backward(cb, gb[:, None])
    grads = [a + b for a, b in zip(grads_e, grads_b)]
    return loss, grads


def train_discriminator(expert: Dataset, background: Dataset, cfg: DiscConfig,
                        seed, normalizer: Normalizer | None = None,
                        loss_log: list | None = None) -> Discriminator:
    """Fit d by cross-entropy with equal-half expert/background batches.

    `seed` may be an int or a SeedSequence. If `loss_log` is given, the
    full-batch loss is appended every cfg.log_every steps.
    """
    xe_all = expert.all_states()
    xb_all = background.all_states()
    if len(xe_all) == 0 or len(xb_all) == 0:
        raise ValueError("both datasets must be non-empty")
    if normalizer is None:
        from .data import fit_normalizer
        normalizer = fit_normalizer([expert, background])
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    init_seq, batch_seq = seq.spawn(2)
    rng = np.random.default_rng(batch_seq)
    dim = xe_all.shape[1]
    net = DenseNet([dim, *cfg.hidden, 1], np.random.default_rng(init_seq))
    opt = AdamState.for_params(net.param_arrays(), learning_rate=cfg.learning_rate,
                               weight_decay=cfg.weight_decay)
    d = Discriminator(net, normalizer)
    ne_all = normalizer.apply(xe_all)
    nb_all = normalizer.apply(xb_all)
    half = max(cfg.batch_size // 2, 1)
    for step in range(1, cfg.steps + 1):
        ie = rng.integers(len(ne_all), size=half)
        ib = rng.integers(len(nb_all), size=half)
        loss, grads = discriminator_loss_grad(net, ne_all[ie], nb_all[ib])
        if not np.isfinite(loss):
            raise FloatingPointError(f"discriminator loss diverged at step {step}")
        opt.step(net.param_arrays(), grads)
        if loss_log is not None and step % cfg.log_every == 0:
            full, _ = discriminator_loss_grad(net, ne_all, nb_all)
            loss_log.append(full)
    return d
