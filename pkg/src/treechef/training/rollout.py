"""Episode driving shared by training, evaluation, and the service."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import GameState, reset, step
from ..env.layout import Layout
from ..features import featurize
from ..planning import (
    MacroAction,
    NUM_MACROS,
    _stand_cells,
    plan_step,
    shortest_dists,
    target_cells,
)


def applicable_mask(state: GameState, player: int) -> np.ndarray:
    """Boolean mask over macros that can start this tick. Wait is always on."""
    mask = np.zeros(NUM_MACROS, dtype=bool)
    mask[MacroAction.WAIT] = True
    dists = shortest_dists(state, player)
    for macro in MacroAction:
        if macro == MacroAction.WAIT:
            continue
        for cell in target_cells(state, player, macro):
            if any(p in dists for p in _stand_cells(state, cell)):
                mask[macro] = True
                break
    return mask


@dataclass
class TickRecord:
    t: int
    features: tuple[np.ndarray, np.ndarray]
    masks: tuple[np.ndarray, np.ndarray]
    macros: tuple[int, int]
    log_probs: tuple[float, float]
    values: tuple[float, float]
    actions: tuple[int, int]
    rewards: tuple[int, int]
    done: bool


def tick(
    state: GameState,
    policies,
    rngs,
) -> tuple[GameState, TickRecord]:
    """Advance one tick with both macro policies compiled to primitives."""
    xs, masks, macros, logps, values, acts = [], [], [], [], [], []
    for i in (0, 1):
        x = featurize(state, i)
        mask = applicable_mask(state, i)
        macro, logp, value = policies[i].choose(state, i, x, mask, rngs[i])
        ps = plan_step(state, i, MacroAction(macro))
        xs.append(x)
        masks.append(mask)
        macros.append(macro)
        logps.append(logp)
        values.append(value)
        acts.append(int(ps.action))
    nxt, r_a, r_b, done = step(state, acts[0], acts[1])
    rec = TickRecord(
        t=state.t,
        features=(xs[0], xs[1]),
        masks=(masks[0], masks[1]),
        macros=(macros[0], macros[1]),
        log_probs=(logps[0], logps[1]),
        values=(values[0], values[1]),
        actions=(acts[0], acts[1]),
        rewards=(r_a, r_b),
        done=done,
    )
    return nxt, rec


def run_episode(
    layout: Layout,
    policy_a,
    policy_b,
    rng: np.random.Generator | None = None,
    horizon: int | None = None,
    on_tick=None,
) -> tuple[int, GameState]:
    """Play one full episode; returns (team score, final state)."""
    if rng is None:
        rng = np.random.default_rng(0)
    rngs = (rng, rng)
    state = reset(layout, horizon)
    policies = (policy_a, policy_b)
    while not state.done:
        state, rec = tick(state, policies, rngs)
        if on_tick is not None:
            on_tick(rec, state)
    return state.score, state


def evaluate(
    policy_a,
    policy_b,
    layout: Layout,
    n_episodes: int = 50,
    seed: int = 0,
    horizon: int | None = None,
) -> dict:
    """Team-score statistics over n full episodes."""
    scores = []
    for ep in range(n_episodes):
        rng = np.random.default_rng(np.random.SeedSequence([seed, ep]))
        score, _ = run_episode(layout, policy_a, policy_b, rng, horizon)
        scores.append(score)
    arr = np.asarray(scores, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std()),
        "scores": scores,
    }
