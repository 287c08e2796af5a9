import numpy as np

from treechef.env import GameState, Item, PrimitiveAction as A, builtin_layout, reset, step
from treechef.env.core import Player, Pot
from treechef.features import FEATURE_NAMES, NUM_FEATURES, featurize


def with_pot(state, pos, pot):
    pots = dict(state.pots)
    pots[pos] = pot
    return GameState(layout=state.layout, players=state.players, pots=pots,
                     counters=dict(state.counters), t=state.t, score=state.score,
                     horizon=state.horizon)


def test_names_and_shape():
    assert NUM_FEATURES == 13
    assert len(set(FEATURE_NAMES)) == 13


def test_initial_state_bits():
    s = reset(builtin_layout("forced_coordination"))
    x = featurize(s, 0)
    expected = np.zeros(13)
    expected[FEATURE_NAMES.index("pot1_needs_ingredients")] = 1
    expected[FEATURE_NAMES.index("pot2_needs_ingredients")] = 1
    assert np.array_equal(x, expected)


def test_held_bits_exclusive():
    s = reset(builtin_layout("forced_coordination"))
    players = list(s.players)
    players[0] = Player(players[0].pos, A.NORTH, Item("onion"))
    s = GameState(layout=s.layout, players=tuple(players), pots=dict(s.pots),
                  counters={}, t=0, score=0, horizon=200)
    x = featurize(s, 0)
    held = x[:4]
    assert held[0] == 1 and held[1:].sum() == 0
    assert featurize(s, 1)[4] == 1, "partner_held_anything from the other seat"


def test_cooking_bits_from_stepped_env():
    # Oracle: drive the env one tick past the third onion placement.
    lay = builtin_layout("forced_coordination")
    s = reset(lay)
    s = with_pot(s, (1, 4), Pot(("onion", "onion"), None))
    players = list(s.players)
    players[1] = Player((1, 3), A.EAST, Item("onion"))
    s = GameState(layout=lay, players=tuple(players), pots=dict(s.pots),
                  counters={}, t=0, score=0, horizon=200)
    s, *_ = step(s, A.STAY, A.INTERACT)
    x = featurize(s, 0)
    i_need = FEATURE_NAMES.index("pot2_needs_ingredients")
    i_cook = FEATURE_NAMES.index("pot2_cooking")
    i_ready = FEATURE_NAMES.index("pot2_ready")
    assert x[i_cook] == 1 and x[i_need] == 0 and x[i_ready] == 0
    for _ in range(lay.cook_time - 1):
        s, *_ = step(s, A.STAY, A.STAY)
    x = featurize(s, 0)
    assert x[i_ready] == 1 and x[i_cook] == 0


def test_shared_counter_bits():
    lay = builtin_layout("forced_coordination")
    s = reset(lay)
    s = GameState(layout=lay, players=s.players, pots=dict(s.pots),
                  counters={(2, 2): Item("onion")}, t=0, score=0, horizon=200)
    x = featurize(s, 0)
    assert x[FEATURE_NAMES.index("onion_on_shared_counter")] == 1
    s2 = GameState(layout=lay, players=s.players, pots=dict(s.pots),
                   counters={(2, 2): Item("dish")}, t=0, score=0, horizon=200)
    assert featurize(s2, 0)[FEATURE_NAMES.index("tomato_or_dish_on_shared_counter")] == 1
    # Items on non-shared counters do not set the bits.
    s3 = GameState(layout=lay, players=s.players, pots=dict(s.pots),
                   counters={(0, 0): Item("onion")}, t=0, score=0, horizon=200)
    assert featurize(s3, 0)[11] == 0


def test_purity():
    s = reset(builtin_layout("optional_collaboration"))
    before = (s.players, dict(s.pots), dict(s.counters), s.t, s.score)
    featurize(s, 0)
    featurize(s, 1)
    assert (s.players, dict(s.pots), dict(s.counters), s.t, s.score) == before
