"""End-to-end trainers: vfo-bin, vfo-disc, bc, bco, and the reward oracle.

All trainers share one rng discipline: a root SeedSequence spawns a fixed
set of child streams (net inits, batch samplers, discriminator), so runs
are bit-reproducible and trainers that share a component (for example the
policy init and its batch stream in bc and vfo) see identical streams.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import (Batch, Dataset, MixtureSampler, Normalizer, TransitionArrays,
                   UniformSampler, fit_normalizer)
from .envs import make_env
from .nets import (AdamState, DenseNet, load_checkpoint, net_entries,
                   net_from_entries, save_checkpoint)
from .policies import AwrConfig, DiscretizedPolicy, InverseDynamics, awr_step, bc_step
from .rewards import Discriminator, DiscConfig, binary_reward_batch, train_discriminator
from .values import ValueFunction

ALGOS = ("vfo-bin", "vfo-disc", "bc", "bco", "awr-oracle")

# child-stream indices off the root SeedSequence
_KEY_POLICY_INIT = 0
_KEY_VALUE_INIT = 1
_KEY_DISC = 2
_KEY_VALUE_BATCH = 3
_KEY_POLICY_BATCH = 4
_KEY_INV_INIT = 5
_KEY_INV_BATCH = 6
_KEY_PRIV_BATCH = 7
_N_KEYS = 8


@dataclass
class RunConfig:
    algo: str = "vfo-bin"
    env_name: str = "gridworld"
    env_params: dict = field(default_factory=dict)
    steps: int = 20000
    learning_rate: float = 3e-4
    batch_size: int = 256
    gamma: float = 0.99
    alpha: float = 0.5
    lam: float = 1.0
    target_period: int = 200
    weight_decay: float = 0.0
    weight_clip: float = 20.0
    num_bins: int = 101
    kernel_bandwidth: float = 2.0
    hidden: tuple = (64, 64)
    disc_steps: int = 5000
    inverse_steps: int = 10000
    privileged_expert_actions: bool = False
    seed: int = 0
    expert_path: str = ""
    background_path: str = ""

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        self.hidden = tuple(int(h) for h in self.hidden)
        for name in ("steps", "batch_size", "target_period", "disc_steps",
                     "inverse_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("learning_rate", "lam", "weight_clip"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("gamma", "alpha"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie strictly between 0 and 1")
        if self.kernel_bandwidth < 0 or self.weight_decay < 0:
            raise ValueError("kernel_bandwidth and weight_decay must be >= 0")
        if self.num_bins < 2:
            raise ValueError("num_bins must be at least 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "hidden" in d:
            d["hidden"] = tuple(d["hidden"])
        return cls(**d)

    def make_env(self):
        return make_env(self.env_name, **self.env_params)


@dataclass
class TrainedAgent:
    policy: DiscretizedPolicy
    value_fn: ValueFunction | None
    discriminator: Discriminator | None
    normalizer: Normalizer
    config: RunConfig
    log_rows: list = field(default_factory=list)
    inverse: InverseDynamics | None = None
    inverse_log: list = field(default_factory=list)

    def checkpoint_entries(self):
        entries = list(net_entries(self.policy.net, "policy"))
        if self.value_fn is not None:
            entries += net_entries(self.value_fn.net, "value")
        if self.discriminator is not None:
            entries += net_entries(self.discriminator.net, "disc")
        if self.inverse is not None:
            entries += net_entries(self.inverse.head.net, "inverse")
        entries.append(("norm/mean", self.normalizer.mean))
        entries.append(("norm/var", self.normalizer.var))
        entries.append(("norm/count", np.array(float(self.normalizer.count))))
        return entries

    def save(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        save_checkpoint(os.path.join(out_dir, "checkpoint.json"),
                        self.checkpoint_entries())
        with open(os.path.join(out_dir, "config.json"), "w") as fh:
            json.dump(self.config.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
        write_train_log(os.path.join(out_dir, "train_log.csv"), self.log_rows)
        if self.inverse_log:
            with open(os.path.join(out_dir, "inverse_log.csv"), "w") as fh:
                fh.write("step,inverse_loss\n")
                for step, loss in self.inverse_log:
                    fh.write(f"{step},{loss!r}\n")


def write_train_log(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write("step,value_loss,policy_loss,mean_weight\n")
        for step, vloss, ploss, mw in rows:
            v = "" if vloss is None else repr(float(vloss))
            fh.write(f"{step},{v},{float(ploss)!r},{float(mw)!r}\n")


def load_agent(out_dir) -> TrainedAgent:
    """Rebuild a saved agent for evaluation; optimizer state is not kept."""
    with open(os.path.join(out_dir, "config.json")) as fh:
        cfg = RunConfig.from_dict(json.load(fh))
    entries = load_checkpoint(os.path.join(out_dir, "checkpoint.json"))
    by_name = dict(entries)
    normalizer = Normalizer(by_name["norm/mean"], by_name["norm/var"],
                            int(by_name["norm/count"]))
    spec = cfg.make_env().spec
    policy = DiscretizedPolicy(net_from_entries(entries, "policy"),
                               spec.action_low, spec.action_high, normalizer,
                               num_bins=cfg.num_bins,
                               kernel_bandwidth=cfg.kernel_bandwidth,
                               learning_rate=cfg.learning_rate,
                               weight_decay=cfg.weight_decay)
    prefixes = {name.split("/", 1)[0] for name, _ in entries}
    value_fn = None
    if "value" in prefixes:
        value_fn = ValueFunction(net_from_entries(entries, "value"), normalizer,
                                 gamma=cfg.gamma, target_period=cfg.target_period,
                                 learning_rate=cfg.learning_rate,
                                 weight_decay=cfg.weight_decay)
    disc = None
    if "disc" in prefixes:
        disc = Discriminator(net_from_entries(entries, "disc"), normalizer)
    inverse = None
    if "inverse" in prefixes:
        inverse = InverseDynamics(net_from_entries(entries, "inverse"),
                                  spec.action_low, spec.action_high,
                                  normalizer.doubled(), num_bins=cfg.num_bins,
                                  kernel_bandwidth=cfg.kernel_bandwidth)
    return TrainedAgent(policy=policy, value_fn=value_fn, discriminator=disc,
                        normalizer=normalizer, config=cfg, inverse=inverse)


# ---------------------------------------------------------------------------
# shared construction helpers


def _check_env(cfg: RunConfig, *datasets):
    for d in datasets:
        if d is not None and d.env_name != cfg.env_name:
            raise ValueError(f"dataset env {d.env_name!r} != config env {cfg.env_name!r}")


def _keys(cfg: RunConfig):
    return np.random.SeedSequence(cfg.seed).spawn(_N_KEYS)


def _build_policy(cfg: RunConfig, spec, normalizer, init_seq) -> DiscretizedPolicy:
    state_dim = spec.state_dim
    net = DenseNet([state_dim, *cfg.hidden, spec.action_dim * cfg.num_bins],
                   np.random.default_rng(init_seq))
    return DiscretizedPolicy(net, spec.action_low, spec.action_high, normalizer,
                             num_bins=cfg.num_bins,
                             kernel_bandwidth=cfg.kernel_bandwidth,
                             learning_rate=cfg.learning_rate,
                             weight_decay=cfg.weight_decay)


def _build_value(cfg: RunConfig, spec, normalizer, init_seq) -> ValueFunction:
    net = DenseNet([spec.state_dim, *cfg.hidden, 1], np.random.default_rng(init_seq))
    return ValueFunction(net, normalizer, gamma=cfg.gamma,
                         target_period=cfg.target_period,
                         learning_rate=cfg.learning_rate,
                         weight_decay=cfg.weight_decay)


# ---------------------------------------------------------------------------
# trainers


def train_vfo(expert: Dataset, background: Dataset, cfg: RunConfig,
              variant: str | None = None,
              privileged_expert: Dataset | None = None) -> TrainedAgent:
    """The core trainer: TD value learning on the mixture plus
    advantage-weighted likelihood steps on the background data.

    `variant` is "bin" (origin-indicator reward) or "disc" (pre-trained
    discriminator reward at s'). The expert dataset must be action-free;
    `privileged_expert` optionally adds weighted likelihood steps on true
    expert actions and is not part of the observation-only setting.
    """
    if variant is None:
        variant = {"vfo-bin": "bin", "vfo-disc": "disc"}[cfg.algo]
    if variant not in ("bin", "disc"):
        raise ValueError(f"unknown vfo variant {variant!r}")
    if expert.origin != "E":
        raise ValueError("expert dataset must have origin E (strip actions first)")
    if background.origin != "B":
        raise ValueError("background dataset must have origin B")
    _check_env(cfg, expert, background, privileged_expert)
    spec = cfg.make_env().spec
    keys = _keys(cfg)
    normalizer = fit_normalizer([expert, background])

    disc = None
    if variant == "disc":
        dcfg = DiscConfig(steps=cfg.disc_steps, batch_size=cfg.batch_size,
                          learning_rate=cfg.learning_rate, hidden=cfg.hidden,
                          weight_decay=cfg.weight_decay)
        disc = train_discriminator(expert, background, dcfg,
                                   keys[_KEY_DISC], normalizer)
        reward_fn = lambda batch: disc.reward(batch.s_next)
    else:
        reward_fn = lambda batch: binary_reward_batch(batch.z_expert)

    vf = _build_value(cfg, spec, normalizer, keys[_KEY_VALUE_INIT])
    policy = _build_policy(cfg, spec, normalizer, keys[_KEY_POLICY_INIT])

    e_arr = TransitionArrays(expert)
    b_arr = TransitionArrays(background)
    mix = MixtureSampler(e_arr, b_arr, cfg.alpha,
                         np.random.default_rng(keys[_KEY_VALUE_BATCH]))
    pol_sampler = UniformSampler(b_arr, np.random.default_rng(keys[_KEY_POLICY_BATCH]))
    priv_sampler = None
    if cfg.privileged_expert_actions:
        if privileged_expert is None:
            raise ValueError("privileged_expert_actions needs an action-labeled "
                             "expert dataset")
        priv_sampler = UniformSampler(TransitionArrays(privileged_expert),
                                      np.random.default_rng(keys[_KEY_PRIV_BATCH]),
                                      origin="E")

    awr_cfg = AwrConfig(lam=cfg.lam, weight_clip=cfg.weight_clip)
    rows = []
    for step in range(1, cfg.steps + 1):
        batch = mix.sample_arrays(cfg.batch_size)
        vloss = vf.value_step(batch, reward_fn(batch))
        pbatch = pol_sampler.sample_arrays(cfg.batch_size)
        ploss, w = awr_step(policy, vf, reward_fn, pbatch, awr_cfg)
        if priv_sampler is not None:
            awr_step(policy, vf, reward_fn,
                     priv_sampler.sample_arrays(cfg.batch_size), awr_cfg)
        rows.append((step, vloss, ploss, float(w.mean())))
    return TrainedAgent(policy=policy, value_fn=vf, discriminator=disc,
                        normalizer=normalizer, config=cfg, log_rows=rows)


def train_bc(background: Dataset, cfg: RunConfig) -> TrainedAgent:
    """Likelihood cloning of the background actions."""
    if background.origin != "B":
        raise ValueError("bc trains on an action-labeled background dataset")
    _check_env(cfg, background)
    spec = cfg.make_env().spec
    keys = _keys(cfg)
    normalizer = fit_normalizer([background])
    policy = _build_policy(cfg, spec, normalizer, keys[_KEY_POLICY_INIT])
    sampler = UniformSampler(TransitionArrays(background),
                             np.random.default_rng(keys[_KEY_POLICY_BATCH]))
    rows = []
    for step in range(1, cfg.steps + 1):
        loss = bc_step(policy, sampler.sample_arrays(cfg.batch_size))
        rows.append((step, None, loss, 1.0))
    return TrainedAgent(policy=policy, value_fn=None, discriminator=None,
                        normalizer=normalizer, config=cfg, log_rows=rows)


def train_bco(expert: Dataset, background: Dataset, cfg: RunConfig) -> TrainedAgent:
    """Observation-only cloning: inverse dynamics on the background data,
    argmax labels for the expert states, then cloning on a 50/50 mix."""
    if expert.origin != "E":
        raise ValueError("expert dataset must have origin E")
    if background.origin != "B":
        raise ValueError("background dataset must have origin B")
    _check_env(cfg, expert, background)
    spec = cfg.make_env().spec
    keys = _keys(cfg)
    normalizer = fit_normalizer([expert, background])

    inv_net = DenseNet([2 * spec.state_dim, *cfg.hidden,
                        spec.action_dim * cfg.num_bins],
                       np.random.default_rng(keys[_KEY_INV_INIT]))
    inverse = InverseDynamics(inv_net, spec.action_low, spec.action_high,
                              normalizer.doubled(), num_bins=cfg.num_bins,
                              kernel_bandwidth=cfg.kernel_bandwidth,
                              learning_rate=cfg.learning_rate)
    b_arr = TransitionArrays(background)
    inv_sampler = UniformSampler(b_arr, np.random.default_rng(keys[_KEY_INV_BATCH]))
    inverse_log = []
    for step in range(1, cfg.inverse_steps + 1):
        b = inv_sampler.sample_arrays(cfg.batch_size)
        inverse_log.append((step, inverse.nll_step(b.s, b.s_next, b.a)))

    e_arr = TransitionArrays(expert)
    labels = inverse.predict_actions(e_arr.s, e_arr.s_next)
    labeled = TransitionArrays.from_arrays(e_arr.s, e_arr.s_next, labels,
                                           e_arr.terminal, e_arr.truncation)

    policy = _build_policy(cfg, spec, normalizer, keys[_KEY_POLICY_INIT])
    rng = np.random.default_rng(keys[_KEY_POLICY_BATCH])
    half_e = cfg.batch_size // 2
    half_b = cfg.batch_size - half_e
    rows = []
    for step in range(1, cfg.steps + 1):
        ie = rng.integers(labeled.n, size=half_e)
        ib = rng.integers(b_arr.n, size=half_b)
        batch = Batch(s=np.concatenate([labeled.s[ie], b_arr.s[ib]]),
                      s_next=np.concatenate([labeled.s_next[ie], b_arr.s_next[ib]]),
                      a=np.concatenate([labeled.a[ie], b_arr.a[ib]]),
                      z_expert=np.concatenate([np.ones(half_e, bool),
                                               np.zeros(half_b, bool)]),
                      terminal=np.concatenate([labeled.terminal[ie],
                                               b_arr.terminal[ib]]))
        loss = bc_step(policy, batch)
        rows.append((step, None, loss, 1.0))
    return TrainedAgent(policy=policy, value_fn=None, discriminator=None,
                        normalizer=normalizer, config=cfg, log_rows=rows,
                        inverse=inverse, inverse_log=inverse_log)


def train_awr_oracle(background: Dataset, cfg: RunConfig) -> TrainedAgent:
    """Upper-bound reference: the vfo loop with ground-truth rewards and
    background-only batches on both losses."""
    if background.origin != "B":
        raise ValueError("the oracle trains on an action-labeled background dataset")
    for tr in background.trajectories:
        if tr.rewards is None:
            raise ValueError("the oracle needs ground-truth rewards in the dataset")
    _check_env(cfg, background)
    spec = cfg.make_env().spec
    keys = _keys(cfg)
    normalizer = fit_normalizer([background])
    vf = _build_value(cfg, spec, normalizer, keys[_KEY_VALUE_INIT])
    policy = _build_policy(cfg, spec, normalizer, keys[_KEY_POLICY_INIT])
    b_arr = TransitionArrays(background)
    value_sampler = UniformSampler(b_arr, np.random.default_rng(keys[_KEY_VALUE_BATCH]))
    pol_sampler = UniformSampler(b_arr, np.random.default_rng(keys[_KEY_POLICY_BATCH]))

    def reward_fn(batch: Batch) -> np.ndarray:
        return batch.rewards

    awr_cfg = AwrConfig(lam=cfg.lam, weight_clip=cfg.weight_clip)
    rows = []
    for step in range(1, cfg.steps + 1):
        batch = value_sampler.sample_arrays(cfg.batch_size)
        vloss = vf.value_step(batch, reward_fn(batch))
        pbatch = pol_sampler.sample_arrays(cfg.batch_size)
        ploss, w = awr_step(policy, vf, reward_fn, pbatch, awr_cfg)
        rows.append((step, vloss, ploss, float(w.mean())))
    return TrainedAgent(policy=policy, value_fn=vf, discriminator=None,
                        normalizer=normalizer, config=cfg, log_rows=rows)


def train(cfg: RunConfig, expert: Dataset | None = None,
          background: Dataset | None = None,
          privileged_expert: Dataset | None = None) -> TrainedAgent:
    """Dispatch to the trainer named by cfg.algo."""
    if cfg.algo in ("vfo-bin", "vfo-disc"):
        if expert is None or background is None:
            raise ValueError(f"{cfg.algo} needs expert and background datasets")
        return train_vfo(expert, background, cfg,
                         privileged_expert=privileged_expert)
    if cfg.algo == "bc":
        if background is None:
            raise ValueError("bc needs a background dataset")
        return train_bc(background, cfg)
    if cfg.algo == "bco":
        if expert is None or background is None:
            raise ValueError("bco needs expert and background datasets")
        return train_bco(expert, background, cfg)
    if cfg.algo == "awr-oracle":
        if background is None:
            raise ValueError("awr-oracle needs a background dataset")
        return train_awr_oracle(background, cfg)
    raise ValueError(f"unknown algo {cfg.algo!r}")
