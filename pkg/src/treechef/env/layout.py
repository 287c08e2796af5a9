"""Kitchen layouts: grid parsing, validation, and the built-in maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque


class ParseError(ValueError):
    """Layout text is malformed (unknown char, ragged grid, bad header)."""


class ValidationError(ValueError):
    """Layout parses but violates a structural invariant."""


# Cell codes. The grid is a tuple of row-strings using these chars.
FLOOR = " "
COUNTER = "X"
ONION_SOURCE = "O"
TOMATO_SOURCE = "T"
DISH_SOURCE = "D"
POT = "P"
SERVE = "S"

CELL_CHARS = {FLOOR, COUNTER, ONION_SOURCE, TOMATO_SOURCE, DISH_SOURCE, POT, SERVE}
SPAWN_CHARS = {"1", "2"}

ONION = "onion"
TOMATO = "tomato"


def _parse_recipe(text: str) -> tuple[tuple[str, ...], int]:
    lhs, _, rhs = text.partition("=")
    if not rhs.strip():
        raise ParseError(f"recipe line missing score: {text!r}")
    ingredients = tuple(sorted(p.strip() for p in lhs.split(",") if p.strip()))
    if not ingredients or any(i not in (ONION, TOMATO) for i in ingredients):
        raise ParseError(f"bad recipe ingredients: {text!r}")
    try:
        score = int(rhs.strip())
    except ValueError:
        raise ParseError(f"recipe score must be an int: {text!r}") from None
    return ingredients, score


def _parse_coords(text: str) -> tuple[tuple[int, int], ...]:
    coords = []
    for chunk in text.replace("(", " ").replace(")", " ").split():
        r, _, c = chunk.partition(",")
        try:
            coords.append((int(r), int(c)))
        except ValueError:
            raise ParseError(f"bad coordinate: {chunk!r}") from None
    return tuple(coords)


@dataclass(frozen=True)
class Layout:
    """Immutable kitchen map plus its scoring rules."""

    name: str
    grid: tuple[str, ...]
    spawn_a: tuple[int, int]
    spawn_b: tuple[int, int]
    recipe_table: dict[tuple[str, ...], int]
    cook_time: int = 20
    horizon: int = 200
    shared_counters: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    @property
    def height(self) -> int:
        return len(self.grid)

    @property
    def width(self) -> int:
        return len(self.grid[0])

    def cell(self, pos: tuple[int, int]) -> str:
        r, c = pos
        if 0 <= r < self.height and 0 <= c < self.width:
            return self.grid[r][c]
        return COUNTER

    def is_floor(self, pos: tuple[int, int]) -> bool:
        return self.cell(pos) == FLOOR

    def cells_of(self, kind: str) -> tuple[tuple[int, int], ...]:
        cache = object.__getattribute__(self, "__dict__").setdefault("_cells_cache", {})
        if kind not in cache:
            cache[kind] = tuple(
                (r, c)
                for r, row in enumerate(self.grid)
                for c, ch in enumerate(row)
                if ch == kind
            )
        return cache[kind]

    @property
    def pots(self) -> tuple[tuple[int, int], ...]:
        return self.cells_of(POT)

    def recipe_score(self, contents: tuple[str, ...]) -> int:
        return self.recipe_table.get(tuple(sorted(contents)), 0)


def load_layout(text: str) -> Layout:
    """Parse a layout document: `key: value` header lines, blank line, grid."""
    header: dict[str, str] = {}
    recipes: dict[tuple[str, ...], int] = {}
    lines = text.splitlines()
    split_at = 0
    for i, line in enumerate(lines):
        if not line.strip():
            split_at = i
            break
        if ":" not in line:
            raise ParseError(f"header line without ':': {line!r}")
        key, _, value = line.partition(":")
        key = key.strip().lower()
        if key == "recipe":
            ing, score = _parse_recipe(value)
            recipes[ing] = score
        else:
            header[key] = value.strip()
    else:
        raise ParseError("layout has no grid (missing blank line after header)")

    grid_lines = [ln for ln in lines[split_at + 1 :] if ln.strip()]
    if not grid_lines:
        raise ParseError("layout has no grid")
    if len({len(ln) for ln in grid_lines}) > 1:
        raise ParseError("grid is not rectangular")

    grid_rows = []
    spawns: dict[str, tuple[int, int]] = {}
    for r, ln in enumerate(grid_lines):
        row_chars = []
        for c, ch in enumerate(ln):
            if ch in SPAWN_CHARS:
                if ch in spawns:
                    raise ParseError(f"duplicate spawn {ch}")
                spawns[ch] = (r, c)
                row_chars.append(FLOOR)
            elif ch in CELL_CHARS:
                row_chars.append(ch)
            else:
                raise ParseError(f"unknown cell char {ch!r} at ({r},{c})")
        grid_rows.append("".join(row_chars))

    if "1" not in spawns or "2" not in spawns:
        raise ValidationError("layout needs spawns '1' and '2'")
    layout = Layout(
        name=header.get("name", "unnamed"),
        grid=tuple(grid_rows),
        spawn_a=spawns["1"],
        spawn_b=spawns["2"],
        recipe_table=recipes,
        cook_time=int(header.get("cook_time", "20")),
        horizon=int(header.get("horizon", "200")),
        shared_counters=frozenset(_parse_coords(header.get("shared", ""))),
    )
    _validate(layout)
    return layout


def _validate(layout: Layout) -> None:
    if not layout.pots:
        raise ValidationError("layout has no pot")
    if not layout.cells_of(DISH_SOURCE):
        raise ValidationError("layout has no dish source")
    if not layout.cells_of(SERVE):
        raise ValidationError("layout has no serve window")
    if not layout.recipe_table:
        raise ValidationError("layout has no recipes")
    for spawn in (layout.spawn_a, layout.spawn_b):
        if not layout.is_floor(spawn):
            raise ValidationError(f"spawn {spawn} not on floor")
    if layout.spawn_a == layout.spawn_b:
        raise ValidationError("spawns coincide")
    for pos in layout.shared_counters:
        if layout.cell(pos) != COUNTER:
            raise ValidationError(f"shared counter {pos} is not a counter cell")
    if layout.cook_time < 1:
        raise ValidationError("cook_time must be >= 1")
    # Every floor cell and every interactive cell must be reachable from a spawn.
    reachable: set[tuple[int, int]] = set()
    queue = deque([layout.spawn_a, layout.spawn_b])
    while queue:
        pos = queue.popleft()
        if pos in reachable or not layout.is_floor(pos):
            continue
        reachable.add(pos)
        r, c = pos
        queue.extend([(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)])
    for r in range(layout.height):
        for c in range(layout.width):
            ch = layout.grid[r][c]
            if ch == FLOOR and (r, c) not in reachable:
                raise ValidationError(f"floor cell ({r},{c}) unreachable")
            if ch in (ONION_SOURCE, TOMATO_SOURCE, DISH_SOURCE, POT, SERVE):
                adjacent = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
                if not any(p in reachable for p in adjacent):
                    raise ValidationError(f"{ch} at ({r},{c}) unreachable")


# ---------------------------------------------------------------------------
# Built-in maps. Geometry is hand-tuned so the scripted strategies land on
# their calibration scores; see tests/test_heuristics.py.
# ---------------------------------------------------------------------------

FORCED_COORDINATION = """\
name: forced_coordination
horizon: 200
cook_time: 20
recipe: onion,onion,onion = 60
shared: (1,2) (2,2) (3,2)

XXXPX
O X P
O1X2X
D X X
XXXSX
"""

OPTIONAL_COLLABORATION = """\
name: optional_collaboration
horizon: 200
cook_time: 20
recipe: onion,onion,onion = 30
recipe: tomato,tomato,tomato = 30
recipe: onion,onion,tomato = 50
recipe: onion,tomato,tomato = 50
shared: (3,3) (3,5)

XXDXOXXXX
S   1   P
X       X
XXXXXXXXX
X       X
S   2   P
XXDXTXXXX
"""

COORDINATION_RING = """\
name: coordination_ring
horizon: 200
cook_time: 20
recipe: onion,onion,onion = 60
shared: (2,2)

XXXPX
O1  P
X X X
D 2 S
XXXXX
"""

_BUILTIN_TEXT = {
    "forced_coordination": FORCED_COORDINATION,
    "optional_collaboration": OPTIONAL_COLLABORATION,
    "coordination_ring": COORDINATION_RING,
}


def builtin_layout_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTIN_TEXT))


def builtin_layout(name: str) -> Layout:
    try:
        return load_layout(_BUILTIN_TEXT[name])
    except KeyError:
        raise KeyError(f"no built-in layout {name!r}; have {builtin_layout_names()}") from None
