"""Simultaneous-move kitchen simulator.

A step resolves both players' primitive actions in one tick under
deterministic conflict rules, then advances pot cook timers. States are
never mutated: step returns a fresh GameState, so distinct episodes (and
planners reading a state mid-decision) can run in parallel safely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

from .layout import (
    COUNTER,
    DISH_SOURCE,
    FLOOR,
    ONION,
    ONION_SOURCE,
    POT,
    SERVE,
    TOMATO,
    TOMATO_SOURCE,
    Layout,
)

# Shaping rewards, credited to the acting player. Delivery scores come from
# the layout's recipe table and are credited to both players.
REWARD_INGREDIENT_IN_POT = 3
REWARD_USEFUL_DISH_PICKUP = 3
REWARD_SOUP_PICKUP = 5


class EpisodeOver(RuntimeError):
    """step() called on a state whose episode already ended."""


class PrimitiveAction(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3
    INTERACT = 4
    STAY = 5


DIRECTIONS = {
    PrimitiveAction.NORTH: (-1, 0),
    PrimitiveAction.SOUTH: (1, 0),
    PrimitiveAction.EAST: (0, 1),
    PrimitiveAction.WEST: (0, -1),
}

MOVE_ACTIONS = (
    PrimitiveAction.NORTH,
    PrimitiveAction.EAST,
    PrimitiveAction.SOUTH,
    PrimitiveAction.WEST,
)


def action_toward(src: tuple[int, int], dst: tuple[int, int]) -> PrimitiveAction:
    """Move/turn action from src toward an adjacent dst."""
    dr, dc = dst[0] - src[0], dst[1] - src[1]
    for act, delta in DIRECTIONS.items():
        if delta == (dr, dc):
            return act
    raise ValueError(f"{dst} is not adjacent to {src}")


@dataclass(frozen=True)
class Item:
    """Something a player can hold: an ingredient, a dish, or a cooked soup."""

    kind: str  # "onion" | "tomato" | "dish" | "soup"
    contents: tuple[str, ...] = ()  # sorted recipe for soups, empty otherwise

    def __post_init__(self):
        if self.kind == "soup":
            assert len(self.contents) == 3, "a soup is a completed 3-ingredient recipe"
        else:
            assert not self.contents


ONION_ITEM = Item(ONION)
TOMATO_ITEM = Item(TOMATO)
DISH_ITEM = Item("dish")


@dataclass(frozen=True)
class Pot:
    """Contents plus cook state. timer is None until the pot fills (3
    ingredients), then counts down each tick; 0 means the soup is ready."""

    contents: tuple[str, ...] = ()
    timer: int | None = None

    @property
    def state(self) -> str:
        if self.timer is not None:
            return "cooking" if self.timer > 0 else "ready"
        return "empty" if not self.contents else "filling"

    @property
    def has_capacity(self) -> bool:
        return self.timer is None and len(self.contents) < 3


@dataclass(frozen=True)
class Player:
    pos: tuple[int, int]
    facing: PrimitiveAction  # NORTH/SOUTH/EAST/WEST
    held: Item | None = None

    @property
    def facing_pos(self) -> tuple[int, int]:
        dr, dc = DIRECTIONS[self.facing]
        return (self.pos[0] + dr, self.pos[1] + dc)


@dataclass(frozen=True)
class GameState:
    layout: Layout
    players: tuple[Player, Player]
    pots: dict[tuple[int, int], Pot]
    counters: dict[tuple[int, int], Item]
    t: int = 0
    score: int = 0
    horizon: int = 200

    @property
    def done(self) -> bool:
        return self.t >= self.horizon


def reset(layout: Layout, horizon: int | None = None) -> GameState:
    """Fresh episode: players at spawns, empty hands, empty pots/counters."""
    if horizon is None:
        horizon = layout.horizon
    return GameState(
        layout=layout,
        players=(
            Player(layout.spawn_a, PrimitiveAction.NORTH),
            Player(layout.spawn_b, PrimitiveAction.NORTH),
        ),
        pots={pos: Pot() for pos in layout.pots},
        counters={},
        t=0,
        score=0,
        horizon=horizon,
    )


# Interact outcome tags, as enumerated by legal_interactions().
PICKUP_ONION = "PickupOnion"
PICKUP_TOMATO = "PickupTomato"
PICKUP_DISH = "PickupDish"
PICKUP_SOUP = "PickupSoup"
PICKUP_FROM_COUNTER = "PickupFromCounter"
PLACE_ON_COUNTER = "PlaceOnCounter"
ADD_TO_POT = "AddToPot"
SERVE_SOUP = "ServeSoup"


def legal_interactions(state: GameState, player: int) -> set[str]:
    """Feasible outcomes of pressing Interact right now for `player`."""
    p = state.players[player]
    target = p.facing_pos
    cell = state.layout.cell(target)
    held = p.held
    out: set[str] = set()
    if cell == ONION_SOURCE and held is None:
        out.add(PICKUP_ONION)
    elif cell == TOMATO_SOURCE and held is None:
        out.add(PICKUP_TOMATO)
    elif cell == DISH_SOURCE and held is None:
        out.add(PICKUP_DISH)
    elif cell == COUNTER:
        occupant = state.counters.get(target)
        if occupant is not None and held is None:
            out.add(PICKUP_FROM_COUNTER)
        elif occupant is None and held is not None:
            out.add(PLACE_ON_COUNTER)
    elif cell == POT:
        pot = state.pots[target]
        if held is not None and held.kind in (ONION, TOMATO) and pot.has_capacity:
            out.add(ADD_TO_POT)
        elif held is not None and held.kind == "dish" and pot.state == "ready":
            out.add(PICKUP_SOUP)
    elif cell == SERVE and held is not None and held.kind == "soup":
        out.add(SERVE_SOUP)
    return out


def _dishes_staged(players: tuple[Player, Player], counters: dict) -> int:
    held = sum(1 for p in players if p.held is not None and p.held.kind == "dish")
    countered = sum(1 for item in counters.values() if item.kind == "dish")
    return held + countered


def _pots_in_progress(pots: dict[tuple[int, int], Pot]) -> int:
    return sum(1 for pot in pots.values() if pot.state in ("cooking", "ready"))


def step(
    state: GameState, act_a: PrimitiveAction, act_b: PrimitiveAction
) -> tuple[GameState, int, int, bool]:
    """Advance one tick. Returns (next_state, reward_a, reward_b, done).

    Conflict rules: two players targeting the same cell, or swapping cells,
    both stay put (facing still updates). Simultaneous Interact resolves
    player 0 first, then player 1 against the updated world.
    """
    if state.t >= state.horizon:
        raise EpisodeOver(f"episode ended at t={state.t}")

    acts = (PrimitiveAction(act_a), PrimitiveAction(act_b))
    layout = state.layout
    players = list(state.players)

    # Movement phase: moves update facing always, position only if the
    # target is free floor and no conflict arises.
    intended = []
    for i, act in enumerate(acts):
        p = players[i]
        if act in DIRECTIONS:
            p = replace(p, facing=act)
            dr, dc = DIRECTIONS[act]
            target = (p.pos[0] + dr, p.pos[1] + dc)
            intended.append(target if layout.is_floor(target) else p.pos)
            players[i] = p
        else:
            intended.append(p.pos)
    # Walking into a stationary player falls out of the same-target rule:
    # the stayer's intended cell is its own position.
    same_target = intended[0] == intended[1]
    swap = intended[0] == state.players[1].pos and intended[1] == state.players[0].pos
    if not same_target and not swap:
        players[0] = replace(players[0], pos=intended[0])
        players[1] = replace(players[1], pos=intended[1])

    # Interact phase: player 0 resolves first against the post-move world.
    pots = dict(state.pots)
    counters = dict(state.counters)
    rewards = [0, 0]
    score_delta = 0
    for i in (0, 1):
        if acts[i] != PrimitiveAction.INTERACT:
            continue
        p = players[i]
        target = p.facing_pos
        cell = layout.cell(target)
        held = p.held
        if cell in (ONION_SOURCE, TOMATO_SOURCE) and held is None:
            players[i] = replace(p, held=ONION_ITEM if cell == ONION_SOURCE else TOMATO_ITEM)
        elif cell == DISH_SOURCE and held is None:
            if _pots_in_progress(pots) > _dishes_staged(tuple(players), counters):
                rewards[i] += REWARD_USEFUL_DISH_PICKUP
                score_delta += REWARD_USEFUL_DISH_PICKUP
            players[i] = replace(p, held=DISH_ITEM)
        elif cell == COUNTER:
            occupant = counters.get(target)
            if occupant is not None and held is None:
                # A staged dish was already counted when first picked up.
                del counters[target]
                players[i] = replace(p, held=occupant)
            elif occupant is None and held is not None:
                counters[target] = held
                players[i] = replace(p, held=None)
        elif cell == POT:
            pot = pots[target]
            if held is not None and held.kind in (ONION, TOMATO) and pot.has_capacity:
                contents = tuple(sorted(pot.contents + (held.kind,)))
                timer = layout.cook_time if len(contents) == 3 else None
                pots[target] = Pot(contents, timer)
                players[i] = replace(p, held=None)
                rewards[i] += REWARD_INGREDIENT_IN_POT
                score_delta += REWARD_INGREDIENT_IN_POT
            elif held is not None and held.kind == "dish" and pot.state == "ready":
                players[i] = replace(p, held=Item("soup", pot.contents))
                pots[target] = Pot()
                rewards[i] += REWARD_SOUP_PICKUP
                score_delta += REWARD_SOUP_PICKUP
        elif cell == SERVE and held is not None and held.kind == "soup":
            value = layout.recipe_score(held.contents)
            rewards[0] += value
            rewards[1] += value
            score_delta += value
            players[i] = replace(p, held=None)

    # Cook phase: every cooking pot ticks down once.
    for pos, pot in pots.items():
        if pot.timer is not None and pot.timer > 0:
            pots[pos] = Pot(pot.contents, pot.timer - 1)

    next_state = GameState(
        layout=layout,
        players=(players[0], players[1]),
        pots=pots,
        counters=counters,
        t=state.t + 1,
        score=state.score + score_delta,
        horizon=state.horizon,
    )
    return next_state, rewards[0], rewards[1], next_state.t >= state.horizon
