"""Minimal dense-network engine: forward/backward, Adam, snapshots, checkpoints.

Everything runs in float64. Networks are plain MLPs with tanh hidden
activations and an identity output layer; gradients are computed by hand
and verified against central finite differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class DenseNet:
    """MLP with tanh hidden layers and a linear output layer.

    Parameters are stored as alternating weight/bias arrays; every array is
    float64 and must stay finite (enforced by the optimizer).
    """

    def __init__(self, layer_dims, rng: np.random.Generator | None = None):
        dims = [int(d) for d in layer_dims]
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise ValueError(f"bad layer dims {layer_dims}")
        self.layer_dims = tuple(dims)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for i in range(len(dims) - 1):
            if rng is None:
                w = np.zeros((dims[i], dims[i + 1]))
            else:
                w = glorot_uniform(dims[i], dims[i + 1], rng)
            self.weights.append(w)
            self.biases.append(np.zeros(dims[i + 1]))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def param_arrays(self) -> list[np.ndarray]:
        """Flat parameter list [w0, b0, w1, b1, ...]; live references."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def param_names(self) -> list[str]:
        out = []
        for i in range(self.n_layers):
            out.append(f"w{i}")
            out.append(f"b{i}")
        return out

    def n_params(self) -> int:
        return sum(a.size for a in self.param_arrays())

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping per-layer activations for backward().

        Accepts a single vector or a (batch, dim) matrix; the output matches
        the input's rank.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"input dim {x.shape[1]} != expected {self.layer_dims[0]}")
        acts = [x]
        h = x
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else np.tanh(z)
            acts.append(h)
        out = acts[-1]
        cache = acts
        if single:
            return out[0], cache
        return out, cache

    def backward(self, cache, grad_out: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients for upstream gradient on the output.

        `cache` must come from forward_cached on the same input. Returns a
        list aligned with param_arrays().
        """
        if cache is None:
            raise ValueError("backward called without a cached forward pass")
        acts = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if g.ndim == 1:
            g = g[None, :]
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        for i in range(self.n_layers - 1, -1, -1):
            h_in = acts[i]
            if i != self.n_layers - 1:
                # undo tanh: acts[i+1] = tanh(z)
                g = g * (1.0 - acts[i + 1] ** 2)
            grads_w[i] = h_in.T @ g
            grads_b[i] = g.sum(axis=0)
            if i > 0:
                g = g @ self.weights[i].T
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.append(gw)
            out.append(gb)
        return out

    def copy(self) -> "DenseNet":
        net = DenseNet(self.layer_dims)
        net.weights = [w.copy() for w in self.weights]
        net.biases = [b.copy() for b in self.biases]
        return net


class ParameterSnapshot:
    """Frozen copy of a DenseNet's parameters (target networks)."""

    def __init__(self, net: DenseNet, snapshot_step: int = 0):
        self.layer_dims = net.layer_dims
        self.snapshot_step = int(snapshot_step)
        self._weights = tuple(w.copy() for w in net.weights)
        self._biases = tuple(b.copy() for b in net.biases)
        for a in self._weights + self._biases:
            a.setflags(write=False)

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        h = x
        last = len(self._weights) - 1
        for i, (w, b) in enumerate(zip(self._weights, self._biases)):
            z = h @ w + b
            h = z if i == last else np.tanh(z)
        return h[0] if single else h


def snapshot(net: DenseNet, step: int, period: int = 200) -> ParameterSnapshot:
    if step % period != 0:
        raise ValueError(f"snapshot step {step} not a multiple of period {period}")
    return ParameterSnapshot(net, snapshot_step=step)


@dataclass
class AdamState:
    """Adam with bias correction and decoupled weight decay.

    Moment arrays mirror the parameter list handed to step(). With
    weight_decay > 0 the decay is applied directly to the parameters at the
    learning rate, independent of the moment estimates.
    """

    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    step_count: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], **kw) -> "AdamState":
        st = cls(**kw)
        st.m = [np.zeros_like(p) for p in params]
        st.v = [np.zeros_like(p) for p in params]
        return st

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(self.m):
            raise ValueError("optimizer state does not match parameter list")
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** t
        c2 = 1.0 - b2 ** t
        lr = self.learning_rate
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient in adam step")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = lr * (m / c1) / (np.sqrt(v / c2) + self.epsilon)
            if self.weight_decay > 0.0:
                update = update + lr * self.weight_decay * p
            p -= update
            if not np.all(np.isfinite(p)):
                raise FloatingPointError("non-finite parameter after adam step")


def adam_update(net: DenseNet, grads: list[np.ndarray], opt: AdamState) -> None:
    """One optimizer step on the net's parameters, in place."""
    opt.step(net.param_arrays(), grads)


# ---------------------------------------------------------------------------
# checkpoint container


CHECKPOINT_FORMAT = "vfo-checkpoint-v1"


def save_checkpoint(path, entries) -> None:
    """Write named arrays to a self-describing JSON container.

    `entries` is an ordered list of (name, array). Values are stored
    row-major; floats survive the round trip bit-exactly because json uses
    repr() for doubles.
    """
    payload = {
        "format": CHECKPOINT_FORMAT,
        "entries": [
            {
                "name": str(name),
                "shape": list(np.asarray(a).shape),
                "values": np.asarray(a, dtype=np.float64).reshape(-1).tolist(),
            }
            for name, a in entries
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path):
    """Read a checkpoint; returns an ordered list of (name, array)."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unrecognized checkpoint format in {path}")
    out = []
    for e in payload["entries"]:
        arr = np.asarray(e["values"], dtype=np.float64).reshape(e["shape"])
        out.append((e["name"], arr))
    return out


def net_entries(net: DenseNet, prefix: str):
    return [(f"{prefix}/{n}", a) for n, a in zip(net.param_names(), net.param_arrays())]


def net_from_entries(entries, prefix: str) -> DenseNet:
    """Rebuild a DenseNet from checkpoint entries under `prefix/`."""
    want = {}
    for name, arr in entries:
        if name.startswith(prefix + "/"):
            want[name[len(prefix) + 1:]] = arr
    n_layers = sum(1 for k in want if k.startswith("w"))
    if n_layers == 0:
        raise ValueError(f"no parameters under prefix {prefix!r}")
    dims = [want["w0"].shape[0]]
    for i in range(n_layers):
        dims.append(want[f"w{i}"].shape[1])
    net = DenseNet(dims)
    net.weights = [want[f"w{i}"].astype(np.float64).copy() for i in range(n_layers)]
    net.biases = [want[f"b{i}"].astype(np.float64).copy() for i in range(n_layers)]
    return net


# ---------------------------------------------------------------------------
# finite-difference verification


def fd_gradients(net: DenseNet, loss_fn, eps: float = 1e-6) -> list[np.ndarray]:
    """Central-difference gradients of loss_fn(net) w.r.t. every parameter."""
    grads = []
    for arr in net.param_arrays():
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            old = arr[idx]
            arr[idx] = old + eps
            lp = loss_fn(net)
            arr[idx] = old - eps
            lm = loss_fn(net)
            arr[idx] = old
            g[idx] = (lp - lm) / (2.0 * eps)
            it.iternext()
        grads.append(g)
    return grads


def gradient_relative_error(analytic: list[np.ndarray], numeric: list[np.ndarray]) -> float:
    """Norm-based relative error between two gradient lists."""
    a = np.concatenate([np.asarray(g).reshape(-1) for g in analytic])
    n = np.concatenate([np.asarray(g).reshape(-1) for g in numeric])
    denom = max(np.linalg.norm(a) + np.linalg.norm(n), 1e-300)
    return float(np.linalg.norm(a - n) / denom)
