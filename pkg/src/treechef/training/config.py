"""Training configuration with the published hyperparameters as defaults."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from dataclasses import dataclass, field, fields


@dataclass
class TrainConfig:
    layout: str = "forced_coordination"
    algo: str = "idct"  # "idct" (agent-agent) | "fcp"
    lr: float = 1e-3
    reg: float = 1e-4  # L1 over leaf parameters
    num_leaves: int = 256
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    epochs: int = 4
    minibatch: int = 64
    steps_per_update: int = 2048
    total_steps: int = 500_000
    horizon: int = 200
    seed: int = 0
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    eval_episodes: int = 50
    checkpoints: int = 10  # evenly spaced eval/checkpoint points
    # Fictitious co-play
    population: int = 4  # paper scale: 32
    population_steps: int = 60_000  # per self-play member
    # AI-led fine-tuning
    finetune_budget_steps: int = 25_000
    finetune_eval_episodes: int = 10

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if not 0 < self.clip_eps < 1:
            raise ValueError("clip_eps must be in (0, 1)")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")

    @classmethod
    def from_toml(cls, path: str) -> "TrainConfig":
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)
