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
    ParseError,
    ValidationError,
    builtin_layout,
    builtin_layout_names,
    load_layout,
)
from .core import (
    DIRECTIONS,
    EpisodeOver,
    GameState,
    Item,
    Player,
    Pot,
    PrimitiveAction,
    action_toward,
    legal_interactions,
    reset,
    step,
)
