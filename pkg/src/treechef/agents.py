"""Deterministic scripted macro policies and the shared policy interface.

Scripts are reactive: the macro is a pure function of the current state
(phase lives in the world: what you hold, what the pots are doing), so
replays are tick-identical and behavior cloning sees consistent labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .env import GameState
from .env.layout import ONION, ONION_SOURCE, TOMATO, TOMATO_SOURCE
from .planning import MacroAction, shortest_dists, plan_step, _stand_cells


class MacroPolicy(Protocol):
    """One teammate's brain: picks a macro index each tick.

    `mask` marks applicable macros. Returns (macro, log_prob, value);
    deterministic policies report log_prob 0 and value 0.
    """

    def choose(
        self, state: GameState, player: int, x: np.ndarray, mask: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[int, float, float]: ...


def np_log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def restricted_log_probs(log_probs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Renormalize log-probabilities over the applicable macros."""
    masked = np.where(mask, log_probs, -np.inf)
    peak = masked.max()
    norm = np.log(np.exp(masked - peak)[mask].sum()) + peak
    return masked - norm


@dataclass
class CrispTreePolicy:
    """Acts from a crisp tree document: walk to a leaf, sample a macro from
    its distribution restricted to what is applicable right now."""

    tree: "object"  # CrispTree

    def choose(self, state, player, x, mask, rng):
        probs = np.clip(self.tree.action_probs(x), 1e-12, None)
        logp = restricted_log_probs(np.log(probs), mask)
        p = np.exp(logp)
        macro = int(rng.choice(len(p), p=p / p.sum()))
        return macro, float(logp[macro]), 0.0

    def leaf_for(self, x) -> str:
        return self.tree.eval_leaf(x)


@dataclass
class ScriptedPolicy:
    """Adapter for (state, player) -> MacroAction scripts."""

    script: "object"

    def choose(self, state, player, x, mask, rng):
        macro = self.script(state, player)
        return int(macro), 0.0, 0.0


@dataclass
class RandomPolicy:
    """Uniform over currently applicable macros."""

    def choose(self, state, player, x, mask, rng):
        idx = np.flatnonzero(mask)
        macro = int(rng.choice(idx))
        return macro, float(-np.log(len(idx))), 0.0


# ---------------------------------------------------------------------------
# Script helpers
# ---------------------------------------------------------------------------


def _reachable(state: GameState, player: int, cells) -> list[tuple[int, int]]:
    dists = shortest_dists(state, player)
    out = []
    for cell in cells:
        if any(p in dists for p in _stand_cells(state, cell)):
            out.append(cell)
    return out


def _my_pot(state: GameState, player: int):
    pots = _reachable(state, player, sorted(state.pots))
    return pots[0] if pots else None


def _my_ingredient(state: GameState, player: int) -> str:
    if _reachable(state, player, state.layout.cells_of(ONION_SOURCE)):
        return ONION
    if _reachable(state, player, state.layout.cells_of(TOMATO_SOURCE)):
        return TOMATO
    return ONION


def _get_macro(kind: str) -> MacroAction:
    return MacroAction.GET_ONION if kind == ONION else MacroAction.GET_TOMATO


def _shared_has(state: GameState, kind: str) -> bool:
    return any(
        state.counters.get(pos) is not None and state.counters[pos].kind == kind
        for pos in state.layout.shared_counters
    )


def _shared_free(state: GameState) -> bool:
    return any(pos not in state.counters for pos in state.layout.shared_counters)


def individual_policy(state: GameState, player: int) -> MacroAction:
    """Solo loop: cook and serve single-ingredient dishes from own-side
    resources only. Never touches the shared counters."""
    me = state.players[player]
    pot_pos = _my_pot(state, player)
    if pot_pos is None:
        return MacroAction.WAIT
    pot = state.pots[pot_pos]
    if me.held is not None:
        if me.held.kind in (ONION, TOMATO):
            return MacroAction.PLACE_IN_POT if pot.has_capacity else MacroAction.WAIT
        if me.held.kind == "dish":
            if any(p.state == "ready" for p in state.pots.values()):
                return MacroAction.GET_SOUP
            return MacroAction.WAIT
        return MacroAction.SERVE_SOUP
    if pot.has_capacity:
        return _get_macro(_my_ingredient(state, player))
    return MacroAction.GET_DISH


def collaborative_policy(state: GameState, player: int) -> MacroAction:
    """Mixed-dish loop: keep two own ingredients in the pot, trade the third
    across the shared counters, fetch the dish while the soup cooks."""
    me = state.players[player]
    pot_pos = _my_pot(state, player)
    if pot_pos is None:
        return MacroAction.WAIT
    pot = state.pots[pot_pos]
    mine = _my_ingredient(state, player)
    theirs = TOMATO if mine == ONION else ONION
    n_own = sum(1 for ing in pot.contents if ing == mine)
    can_pass = not _shared_has(state, mine) and _shared_free(state)

    if me.held is not None:
        if me.held.kind == mine:
            if pot.has_capacity and n_own < 2:
                return MacroAction.PLACE_IN_POT
            if _shared_free(state):
                return MacroAction.PLACE_ON_COUNTER
            return MacroAction.WAIT
        if me.held.kind == theirs:
            return MacroAction.PLACE_IN_POT if pot.has_capacity else MacroAction.WAIT
        if me.held.kind == "dish":
            if any(p.state == "ready" for p in state.pots.values()):
                return MacroAction.GET_SOUP
            return MacroAction.WAIT
        return MacroAction.SERVE_SOUP

    if pot.state == "ready":
        return MacroAction.GET_DISH
    if pot.has_capacity:
        if _shared_has(state, theirs) and theirs not in pot.contents:
            return _get_macro(theirs)
        if n_own < 2:
            return _get_macro(mine)
        if can_pass:
            return _get_macro(mine)
        return MacroAction.WAIT
    # Soup is cooking: stage a pass for the partner first, then time the
    # dish run so it lands as the pot finishes.
    if can_pass:
        return _get_macro(mine)
    if pot.timer is not None and pot.timer <= 13:
        return MacroAction.GET_DISH
    return MacroAction.WAIT


def counter_pass_policy(state: GameState, player: int) -> MacroAction:
    """Middle-counter handoff for the ring kitchen: player 0 feeds onions
    and dishes onto the shared counter, player 1 cooks and serves."""
    me = state.players[player]
    dish_in_flight = (
        any(item.kind == "dish" for item in state.counters.values())
        or any(p.held is not None and p.held.kind == "dish" for p in state.players)
    )
    if player == 0:
        if me.held is not None:
            if _shared_free(state):
                return MacroAction.PLACE_ON_COUNTER
            return MacroAction.WAIT
        if any(p.state in ("cooking", "ready") for p in state.pots.values()) and not dish_in_flight:
            return MacroAction.GET_DISH
        if any(p.has_capacity for p in state.pots.values()) and not _shared_has(state, ONION):
            return MacroAction.GET_ONION
        return MacroAction.WAIT
    if me.held is not None:
        if me.held.kind == ONION:
            if any(p.has_capacity for p in state.pots.values()):
                return MacroAction.PLACE_IN_POT
            return MacroAction.WAIT
        if me.held.kind == "dish":
            if any(p.state == "ready" for p in state.pots.values()):
                return MacroAction.GET_SOUP
            return MacroAction.WAIT
        return MacroAction.SERVE_SOUP
    if _shared_has(state, "dish") and any(
        p.state in ("cooking", "ready") for p in state.pots.values()
    ):
        return MacroAction.GET_DISH
    if _shared_has(state, ONION) and any(p.has_capacity for p in state.pots.values()):
        return MacroAction.GET_ONION
    return MacroAction.WAIT


SCRIPTED_POLICIES = {
    "individual_oc": individual_policy,
    "collab_oc": collaborative_policy,
    "counter_pass_ring": counter_pass_policy,
}


def named_policy(name: str) -> ScriptedPolicy:
    """Resolve `heuristic:<name>` or bare script names used by CLI/service."""
    key = name.split(":", 1)[-1]
    if key == "random":
        return RandomPolicy()
    try:
        return ScriptedPolicy(SCRIPTED_POLICIES[key])
    except KeyError:
        raise KeyError(f"unknown scripted policy {name!r}; have {sorted(SCRIPTED_POLICIES)} and 'random'") from None
