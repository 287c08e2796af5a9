"""Line-delimited episode logs and deterministic replay.

A log is one JSON object per line: a header (layout text, horizon, seat
labels), then one record per tick carrying both primitive actions, both
rewards, the running score, and a state diff. The environment is
deterministic, so re-simulating the logged actions reproduces every
logged state and the final score exactly; replay() checks that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .env import GameState, PrimitiveAction, reset, step
from .env.layout import Layout, load_layout
from .features import featurize


def state_to_dict(state: GameState) -> dict:
    return {
        "players": [
            {
                "pos": list(p.pos),
                "facing": int(p.facing),
                "held": None if p.held is None else {"kind": p.held.kind,
                                                     "contents": list(p.held.contents)},
            }
            for p in state.players
        ],
        "pots": {
            f"{r},{c}": {"contents": list(pot.contents), "timer": pot.timer, "state": pot.state}
            for (r, c), pot in sorted(state.pots.items())
        },
        "counters": {
            f"{r},{c}": {"kind": item.kind, "contents": list(item.contents)}
            for (r, c), item in sorted(state.counters.items())
        },
        "t": state.t,
        "score": state.score,
    }


def _diff(prev: dict, now: dict) -> dict:
    return {k: v for k, v in now.items() if prev.get(k) != v}


class EpisodeLogWriter:
    """Appends one JSON line per tick to a file-like sink."""

    def __init__(self, sink: IO[str], layout: Layout, horizon: int,
                 seats: dict | None = None, meta: dict | None = None):
        self.sink = sink
        self._prev = None
        header = {
            "type": "header",
            "layout_name": layout.name,
            "layout_text": layout_text_of(layout),
            "horizon": horizon,
            "seats": seats or {},
        }
        if meta:
            header["meta"] = meta
        self._write(header)

    def _write(self, obj: dict):
        self.sink.write(json.dumps(obj, separators=(",", ":")) + "\n")

    def record(self, state_before: GameState, actions, rewards, state_after: GameState,
               macros=None):
        now = state_to_dict(state_after)
        prev = self._prev if self._prev is not None else state_to_dict(state_before)
        rec = {
            "type": "tick",
            "t": state_before.t,
            "actions": [int(a) for a in actions],
            "rewards": [int(r) for r in rewards],
            "score": state_after.score,
            "diff": _diff(prev, now),
        }
        if macros is not None:
            rec["macros"] = [None if m is None else int(m) for m in macros]
        self._write(rec)
        self._prev = now

    def finish(self, status: str = "completed"):
        self._write({"type": "end", "status": status})
        self.sink.flush()


def layout_text_of(layout: Layout) -> str:
    """Reconstruct a loadable layout document from a Layout object."""
    lines = [f"name: {layout.name}", f"horizon: {layout.horizon}",
             f"cook_time: {layout.cook_time}"]
    for ingredients, score in sorted(layout.recipe_table.items()):
        lines.append(f"recipe: {','.join(ingredients)} = {score}")
    if layout.shared_counters:
        cells = " ".join(f"({r},{c})" for r, c in sorted(layout.shared_counters))
        lines.append(f"shared: {cells}")
    lines.append("")
    for r, row in enumerate(layout.grid):
        chars = list(row)
        for mark, pos in (("1", layout.spawn_a), ("2", layout.spawn_b)):
            if pos[0] == r:
                chars[pos[1]] = mark
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


@dataclass
class ReplayResult:
    ticks: int
    final_score: int
    logged_score: int
    exact: bool
    mismatches: list[str]


def parse_log(lines: Iterable[str]) -> tuple[dict, list[dict], dict | None]:
    header = None
    ticks = []
    end = None
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if obj.get("type") == "header":
            header = obj
        elif obj.get("type") == "tick":
            ticks.append(obj)
        elif obj.get("type") == "end":
            end = obj
    if header is None:
        raise ValueError("log has no header line")
    return header, ticks, end


def replay(lines: Iterable[str]) -> ReplayResult:
    """Re-simulate logged inputs; verify scores tick-for-tick."""
    header, ticks, _ = parse_log(lines)
    layout = load_layout(header["layout_text"])
    state = reset(layout, header["horizon"])
    mismatches: list[str] = []
    score = 0
    for rec in ticks:
        if rec["t"] != state.t:
            mismatches.append(f"tick {rec['t']}: expected t={state.t}")
            break
        a, b = rec["actions"]
        state, ra, rb, _ = step(state, PrimitiveAction(a), PrimitiveAction(b))
        if [ra, rb] != rec["rewards"]:
            mismatches.append(f"tick {rec['t']}: rewards {ra},{rb} != logged {rec['rewards']}")
        if state.score != rec["score"]:
            mismatches.append(f"tick {rec['t']}: score {state.score} != logged {rec['score']}")
        score = rec["score"]
    return ReplayResult(
        ticks=len(ticks),
        final_score=state.score,
        logged_score=score,
        exact=not mismatches and state.score == score,
        mismatches=mismatches,
    )


_OUTCOME_TO_MACRO = {
    "PickupOnion": 0,  # get_onion
    "PickupTomato": 1,
    "PickupDish": 2,
    "PickupSoup": 3,
    "AddToPot": 4,
    "PlaceOnCounter": 5,
    "ServeSoup": 6,
}

_KIND_TO_GET = {"onion": 0, "tomato": 1, "dish": 2, "soup": 3}


def bc_pairs_from_log(lines: Iterable[str], seat: int) -> list[tuple[np.ndarray, int]]:
    """(features, macro) pairs for one seat, for behavior cloning.

    AI seats carry logged macros. Humans act in primitives, so their
    intent is lifted to macros by segmentation: every completed Interact
    names the macro the segment was pursuing (picking up an onion means
    the ticks since the last interaction were a get-onion), and a tail
    with no interaction labels as wait. Features are recomputed by
    replaying the deterministic environment.
    """
    from .env import legal_interactions
    from .env.core import PICKUP_FROM_COUNTER

    header, ticks, _ = parse_log(lines)
    layout = load_layout(header["layout_text"])
    state = reset(layout, header["horizon"])
    features: list[np.ndarray] = []
    labels: list[int | None] = []
    segment_start = 0
    for rec in ticks:
        logged = rec.get("macros", [None, None])[seat]
        features.append(featurize(state, seat))
        labels.append(int(logged) if logged is not None else None)
        action = rec["actions"][seat]
        outcome = None
        if logged is None and action == int(PrimitiveAction.INTERACT):
            feasible = legal_interactions(state, seat)
            if feasible == {PICKUP_FROM_COUNTER}:
                item = state.counters.get(state.players[seat].facing_pos)
                outcome = _KIND_TO_GET.get(item.kind) if item is not None else None
            elif len(feasible) == 1:
                outcome = _OUTCOME_TO_MACRO.get(next(iter(feasible)))
        a, b = rec["actions"]
        state, *_ = step(state, PrimitiveAction(a), PrimitiveAction(b))
        if outcome is not None:
            for i in range(segment_start, len(labels)):
                if labels[i] is None:
                    labels[i] = outcome
            segment_start = len(labels)
    wait = 7
    return [(x, lbl if lbl is not None else wait) for x, lbl in zip(features, labels)]
