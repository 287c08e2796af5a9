"""Per-agent transition storage and generalized advantage estimation.

Decentralized training: every agent owns its buffer; nothing here is
shared between the two seats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..features import NUM_FEATURES
from ..planning import NUM_MACROS


@dataclass
class RolloutBuffer:
    features: np.ndarray
    masks: np.ndarray
    macros: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    bootstrap_value: float = 0.0
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    @classmethod
    def empty(cls, capacity: int) -> "RolloutBuffer":
        return cls(
            features=np.zeros((capacity, NUM_FEATURES)),
            masks=np.zeros((capacity, NUM_MACROS), dtype=bool),
            macros=np.zeros(capacity, dtype=np.int64),
            log_probs=np.zeros(capacity),
            rewards=np.zeros(capacity),
            values=np.zeros(capacity),
            dones=np.zeros(capacity, dtype=bool),
        )

    def __len__(self) -> int:
        return len(self.macros)

    def set_row(self, i, x, mask, macro, log_prob, reward, value, done):
        self.features[i] = x
        self.masks[i] = mask
        self.macros[i] = macro
        self.log_probs[i] = log_prob
        self.rewards[i] = reward
        self.values[i] = value
        self.dones[i] = done


def compute_gae(buffer: RolloutBuffer, gamma: float, gae_lambda: float) -> RolloutBuffer:
    """Standard GAE(lambda); episode ends zero the bootstrap, truncation
    uses buffer.bootstrap_value. Advantages are left raw here and
    normalized per update batch inside ppo_update."""
    n = len(buffer)
    adv = np.zeros(n)
    last = 0.0
    next_value = buffer.bootstrap_value
    for t in range(n - 1, -1, -1):
        nonterminal = 0.0 if buffer.dones[t] else 1.0
        delta = buffer.rewards[t] + gamma * next_value * nonterminal - buffer.values[t]
        last = delta + gamma * gae_lambda * nonterminal * last
        adv[t] = last
        next_value = buffer.values[t]
    buffer.advantages = adv
    buffer.returns = adv + buffer.values
    if not np.all(np.isfinite(adv)):
        raise FloatingPointError("non-finite advantages")
    return buffer
