"""TD value learning on the expert/background mixture.

The value net regresses onto gamma * v_target(s') + r with the bootstrap
side frozen between periodic target refreshes. Transitions that end an
episode for task reasons (is_terminal) instead use r / (1 - gamma), the
fixed point of receiving the final reward forever; time-limit boundaries
bootstrap through normally.
"""

from __future__ import annotations

import numpy as np

from .data import Batch, Normalizer
from .nets import AdamState, DenseNet, ParameterSnapshot


class ValueFunction:
    def __init__(self, net: DenseNet, normalizer: Normalizer, gamma: float = 0.99,
                 target_period: int = 200, learning_rate: float = 3e-4,
                 weight_decay: float = 0.0):
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        self.net = net
        self.normalizer = normalizer
        self.gamma = float(gamma)
        self.target_period = int(target_period)
        self.target = ParameterSnapshot(net, snapshot_step=0)
        self.opt = AdamState.for_params(net.param_arrays(), learning_rate=learning_rate,
                                        weight_decay=weight_decay)
        self.update_count = 0

    def v(self, states: np.ndarray) -> np.ndarray:
        x = self.normalizer.apply(np.atleast_2d(np.asarray(states, dtype=np.float64)))
        return self.net.forward(x)[:, 0]

    def v_target(self, states: np.ndarray) -> np.ndarray:
        x = self.normalizer.apply(np.atleast_2d(np.asarray(states, dtype=np.float64)))
        return self.target.forward(x)[:, 0]

    def td_target(self, batch: Batch, rewards: np.ndarray) -> np.ndarray:
        """Bootstrap targets: gamma * v_target(s') + r, or r/(1-gamma) at
        task-terminal transitions."""
        r = np.asarray(rewards, dtype=np.float64)
        boot = self.gamma * self.v_target(batch.s_next) + r
        return np.where(batch.terminal, r / (1.0 - self.gamma), boot)

    def advantage(self, batch: Batch, rewards: np.ndarray) -> np.ndarray:
        """td_target minus the online value at s."""
        return self.td_target(batch, rewards) - self.v(batch.s)

    def value_step(self, batch: Batch, rewards: np.ndarray) -> float:
        """One Adam step on the mean squared TD error; returns the
        pre-update loss. Refreshes the target every target_period updates."""
        tt = self.td_target(batch, rewards)
        x = self.normalizer.apply(batch.s)
        pred, cache = self.net.forward_cached(x)
        err = pred[:, 0] - tt
        loss = float(np.mean(err ** 2))
        if not np.isfinite(loss):
            raise FloatingPointError("non-finite TD loss")
        gout = (2.0 / len(err)) * err
        grads = self.net.backward(cache, gout[:, None])
        self.opt.step(self.net.param_arrays(), grads)
        self.update_count += 1
        if self.update_count % self.target_period == 0:
            self.target = ParameterSnapshot(self.net, snapshot_step=self.update_count)
        return loss
