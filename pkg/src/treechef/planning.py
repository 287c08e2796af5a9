"""Macro-actions compiled to primitives via shortest-path planning.

Each tick a macro is re-planned from scratch against the current state
(the other player is a dynamic obstacle re-read every tick), so a macro
that was blocked this tick may succeed the next.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import IntEnum

from .env import GameState, PrimitiveAction, action_toward
from .env.layout import (
    COUNTER,
    DISH_SOURCE,
    ONION,
    ONION_SOURCE,
    SERVE,
    TOMATO,
    TOMATO_SOURCE,
)

# Neighbor expansion order everywhere: N < E < S < W (documented tie-break).
_NEIGHBOR_DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))


class MacroAction(IntEnum):
    GET_ONION = 0
    GET_TOMATO = 1
    GET_DISH = 2
    GET_SOUP = 3
    PLACE_IN_POT = 4
    PLACE_ON_COUNTER = 5
    SERVE_SOUP = 6
    WAIT = 7


MACRO_NAMES = (
    "get_onion",
    "get_tomato",
    "get_dish",
    "get_soup",
    "place_in_pot",
    "place_on_counter",
    "serve",
    "wait",
)

NUM_MACROS = len(MACRO_NAMES)


def shortest_dists(state: GameState, player: int) -> dict[tuple[int, int], int]:
    """BFS distances over floor cells from the player's position, with the
    other player's current cell treated as blocked."""
    layout = state.layout
    blocked = state.players[1 - player].pos
    start = state.players[player].pos
    dists = {start: 0}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        d = dists[pos]
        for dr, dc in _NEIGHBOR_DELTAS:
            nxt = (pos[0] + dr, pos[1] + dc)
            if nxt not in dists and nxt != blocked and layout.is_floor(nxt):
                dists[nxt] = d + 1
                queue.append(nxt)
    return dists


def astar_path(
    state: GameState,
    player: int,
    goals: frozenset[tuple[int, int]] | set[tuple[int, int]],
) -> list[tuple[int, int]] | None:
    """A* over floor cells to the nearest goal cell. Manhattan heuristic
    (min over the goal set), unit step cost, deterministic expansion."""
    if not goals:
        return None
    layout = state.layout
    blocked = state.players[1 - player].pos
    start = state.players[player].pos
    if start in goals:
        return [start]

    def h(pos):
        return min(abs(pos[0] - g[0]) + abs(pos[1] - g[1]) for g in goals)

    counter = 0
    frontier = [(h(start), 0, start)]
    came_from: dict[tuple[int, int], tuple[int, int] | None] = {start: None}
    g_cost = {start: 0}
    while frontier:
        _, _, pos = heapq.heappop(frontier)
        if pos in goals:
            path = [pos]
            while came_from[path[-1]] is not None:
                path.append(came_from[path[-1]])
            path.reverse()
            return path
        for dr, dc in _NEIGHBOR_DELTAS:
            nxt = (pos[0] + dr, pos[1] + dc)
            if nxt == blocked or not layout.is_floor(nxt):
                continue
            cost = g_cost[pos] + 1
            if cost < g_cost.get(nxt, 1 << 30):
                g_cost[nxt] = cost
                came_from[nxt] = pos
                counter += 1
                heapq.heappush(frontier, (cost + h(nxt), counter, nxt))
    return None


def _counters_holding(state: GameState, kinds: tuple[str, ...]) -> list[tuple[int, int]]:
    return [pos for pos, item in state.counters.items() if item.kind in kinds]


def target_cells(state: GameState, player: int, macro: MacroAction) -> list[tuple[int, int]]:
    """Grid cells a macro's final Interact would act on, given what the
    player currently holds. Empty when the macro makes no sense right now."""
    layout = state.layout
    held = state.players[player].held
    if macro == MacroAction.GET_ONION:
        if held is not None:
            return []
        return list(layout.cells_of(ONION_SOURCE)) + _counters_holding(state, (ONION,))
    if macro == MacroAction.GET_TOMATO:
        if held is not None:
            return []
        return list(layout.cells_of(TOMATO_SOURCE)) + _counters_holding(state, (TOMATO,))
    if macro == MacroAction.GET_DISH:
        if held is not None:
            return []
        return list(layout.cells_of(DISH_SOURCE)) + _counters_holding(state, ("dish",))
    if macro == MacroAction.GET_SOUP:
        if held is not None and held.kind == "dish":
            return [pos for pos, pot in state.pots.items() if pot.state == "ready"]
        if held is None:
            return _counters_holding(state, ("soup",))
        return []
    if macro == MacroAction.PLACE_IN_POT:
        if held is None or held.kind not in (ONION, TOMATO):
            return []
        return [pos for pos, pot in state.pots.items() if pot.has_capacity]
    if macro == MacroAction.PLACE_ON_COUNTER:
        if held is None:
            return []
        return [pos for pos in layout.shared_counters if pos not in state.counters]
    if macro == MacroAction.SERVE_SOUP:
        if held is None or held.kind != "soup":
            return []
        return list(layout.cells_of(SERVE))
    return []


def _stand_cells(state: GameState, cell: tuple[int, int]) -> list[tuple[int, int]]:
    r, c = cell
    return [p for p in ((r - 1, c), (r, c + 1), (r + 1, c), (r, c - 1)) if state.layout.is_floor(p)]


def macro_applicable(state: GameState, player: int, macro: MacroAction) -> bool:
    """True iff a target exists and some adjacent stand cell is reachable now."""
    if macro == MacroAction.WAIT:
        return True
    targets = target_cells(state, player, macro)
    if not targets:
        return False
    dists = shortest_dists(state, player)
    for cell in targets:
        if any(p in dists for p in _stand_cells(state, cell)):
            return True
    return False


@dataclass(frozen=True)
class PlanStep:
    action: PrimitiveAction
    feasible: bool
    target: tuple[int, int] | None = None


def plan_step(state: GameState, player: int, macro: MacroAction) -> PlanStep:
    """First primitive of a freshly planned shortest route for `macro`.

    Target choice: nearest by path length, ties to the lowest (row, col)
    cell. First-move ties resolve in N<E<S<W order. Returns Stay with
    feasible=False when no target is reachable this tick.
    """
    if macro == MacroAction.WAIT:
        return PlanStep(PrimitiveAction.STAY, True)
    targets = target_cells(state, player, macro)
    if not targets:
        return PlanStep(PrimitiveAction.STAY, False)

    dists = shortest_dists(state, player)
    best: tuple[int, tuple[int, int]] | None = None
    for cell in sorted(targets):
        ds = [dists[p] for p in _stand_cells(state, cell) if p in dists]
        if ds and (best is None or min(ds) < best[0]):
            best = (min(ds), cell)
    if best is None:
        return PlanStep(PrimitiveAction.STAY, False)
    dist, target = best

    me = state.players[player]
    if dist == 0:
        if me.facing_pos == target:
            return PlanStep(PrimitiveAction.INTERACT, True, target)
        return PlanStep(action_toward(me.pos, target), True, target)

    # Reverse BFS from the target's stand cells gives, for every cell, the
    # remaining distance; the first move is the N<E<S<W-first neighbor that
    # lies on a shortest path.
    layout = state.layout
    blocked = state.players[1 - player].pos
    goal_dists: dict[tuple[int, int], int] = {}
    queue = deque()
    for p in _stand_cells(state, target):
        if p != blocked and p not in goal_dists:
            goal_dists[p] = 0
            queue.append(p)
    while queue:
        pos = queue.popleft()
        d = goal_dists[pos]
        for dr, dc in _NEIGHBOR_DELTAS:
            nxt = (pos[0] + dr, pos[1] + dc)
            if nxt not in goal_dists and nxt != blocked and layout.is_floor(nxt):
                goal_dists[nxt] = d + 1
                queue.append(nxt)
    here = goal_dists.get(me.pos)
    if here is None:
        return PlanStep(PrimitiveAction.STAY, False)
    for dr, dc in _NEIGHBOR_DELTAS:
        nxt = (me.pos[0] + dr, me.pos[1] + dc)
        if goal_dists.get(nxt) == here - 1:
            return PlanStep(action_toward(me.pos, nxt), True, target)
    return PlanStep(PrimitiveAction.STAY, False)
