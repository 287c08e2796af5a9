"""Semantic 13-bit state encoding shared by policies, the pruner, and the UI."""

from __future__ import annotations

import numpy as np

from .env import GameState
from .env.layout import ONION, TOMATO

FEATURE_NAMES = (
    "held_onion",
    "held_tomato",
    "held_dish",
    "held_soup",
    "partner_held_anything",
    "pot1_needs_ingredients",
    "pot1_cooking",
    "pot1_ready",
    "pot2_needs_ingredients",
    "pot2_cooking",
    "pot2_ready",
    "onion_on_shared_counter",
    "tomato_or_dish_on_shared_counter",
)

NUM_FEATURES = len(FEATURE_NAMES)


def sorted_pots(state: GameState) -> list[tuple[int, int]]:
    """Pot order backing the pot1/pot2 feature slots: (row, col) ascending."""
    return sorted(state.pots)


def featurize(state: GameState, player: int) -> np.ndarray:
    """Binary feature vector from `player`'s perspective. Pure function."""
    x = np.zeros(NUM_FEATURES, dtype=np.float64)
    me = state.players[player]
    partner = state.players[1 - player]
    if me.held is not None:
        if me.held.kind == ONION:
            x[0] = 1.0
        elif me.held.kind == TOMATO:
            x[1] = 1.0
        elif me.held.kind == "dish":
            x[2] = 1.0
        elif me.held.kind == "soup":
            x[3] = 1.0
    if partner.held is not None:
        x[4] = 1.0
    for slot, pos in enumerate(sorted_pots(state)[:2]):
        pot = state.pots[pos]
        base = 5 + 3 * slot
        if pot.has_capacity:
            x[base] = 1.0
        if pot.state == "cooking":
            x[base + 1] = 1.0
        elif pot.state == "ready":
            x[base + 2] = 1.0
    for pos in state.layout.shared_counters:
        item = state.counters.get(pos)
        if item is None:
            continue
        if item.kind == ONION:
            x[11] = 1.0
        elif item.kind in (TOMATO, "dish"):
            x[12] = 1.0
    return x
