"""Value-from-observations imitation learning on desk-scale control tasks.

Learn policies from action-free expert trajectories plus action-labeled
background data: TD value learning on an expert/background mixture with
origin-indicator or discriminator rewards, advantage-weighted likelihood
policy extraction, benchmark data generation, and an iterative
self-improvement loop.
"""

__version__ = "0.1.0"

from .benchgen import (BimodalSpec, SiBenchSpec, generate_bimodal,
                       generate_expert_data, generate_sibench)
from .data import Dataset, Trajectory, load_dataset, save_dataset, strip_actions
from .envs import GridWorld, PointMass, expert_policy, make_env, rollout
from .evaluation import evaluate
from .selfimprove import LoopSpec, run_loop, seed_selector
from .training import RunConfig, TrainedAgent, load_agent, train

__all__ = [
    "Dataset", "Trajectory", "load_dataset", "save_dataset", "strip_actions",
    "GridWorld", "PointMass", "expert_policy", "make_env", "rollout",
    "RunConfig", "TrainedAgent", "load_agent", "train",
    "SiBenchSpec", "BimodalSpec", "generate_expert_data", "generate_sibench",
    "generate_bimodal", "LoopSpec", "run_loop", "seed_selector", "evaluate",
]
