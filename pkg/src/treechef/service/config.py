"""Service configuration: TOML file with environment-variable overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

ENV_PREFIX = "TREECHEF_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8777
    tick_rate: float = 6.67  # ticks per second; 0 = as fast as possible
    data_dir: str = "./data"
    registry_path: str = "./registry"
    max_iterations: int = 4
    seed: int = 0
    optimize_budget_steps: int = 25_000
    optimize_budget_seconds: float | None = None  # wall-clock mode when set
    ui_dir: str | None = None  # serve the built browser client at /ui when set

    @classmethod
    def load(cls, path: str | None = None) -> "ServiceConfig":
        raw: dict = {}
        if path:
            with open(path, "rb") as fh:
                raw.update(tomllib.load(fh))
        for f in fields(cls):
            env = os.environ.get(ENV_PREFIX + f.name.upper())
            if env is not None:
                if f.type in ("int", int):
                    raw[f.name] = int(env)
                elif f.type in ("float", float) or f.name == "optimize_budget_seconds":
                    raw[f.name] = float(env)
                elif f.name == "tick_rate":
                    raw[f.name] = float(env)
                else:
                    raw[f.name] = env
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown service config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.port = int(cfg.port)
        cfg.tick_rate = float(cfg.tick_rate)
        cfg.max_iterations = int(cfg.max_iterations)
        return cfg
