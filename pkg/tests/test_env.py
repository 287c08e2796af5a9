import pytest

from treechef.env import (
    EpisodeOver,
    GameState,
    Item,
    ParseError,
    PrimitiveAction as A,
    ValidationError,
    builtin_layout,
    legal_interactions,
    load_layout,
    reset,
    step,
)
from treechef.env.core import (
    ADD_TO_POT,
    PICKUP_DISH,
    PICKUP_ONION,
    PICKUP_SOUP,
    SERVE_SOUP,
    Player,
    Pot,
)


def fc():
    return builtin_layout("forced_coordination")


def put_player(state, idx, pos, facing, held=None):
    players = list(state.players)
    players[idx] = Player(pos, facing, held)
    return GameState(
        layout=state.layout, players=tuple(players), pots=dict(state.pots),
        counters=dict(state.counters), t=state.t, score=state.score, horizon=state.horizon,
    )


class TestLayout:
    def test_forced_coordination_has_divider(self):
        lay = fc()
        # The middle column of counters separates the two spawns.
        assert lay.cell((1, 2)) == "X" and lay.cell((2, 2)) == "X" and lay.cell((3, 2)) == "X"
        assert lay.spawn_a[1] < 2 < lay.spawn_b[1]

    def test_zero_pots_rejected(self):
        text = "name: t\nrecipe: onion,onion,onion = 60\n\nXXXX\nO12S\nXXDX\n"
        with pytest.raises(ValidationError):
            load_layout(text)

    def test_optional_collaboration_divider_row(self):
        lay = builtin_layout("optional_collaboration")
        divider = lay.grid[3]
        assert set(divider) == {"X"}
        assert all(pos[0] == 3 for pos in lay.shared_counters)

    def test_unknown_char(self):
        with pytest.raises(ParseError):
            load_layout("name: t\nrecipe: onion,onion,onion = 6\n\nXQX\nO1S\nXPX\nX2D\nXXX\n")

    def test_ragged_grid(self):
        with pytest.raises(ParseError):
            load_layout("name: t\nrecipe: onion,onion,onion = 6\n\nXXXX\nO12S\nXX\n")

    def test_unreachable_cells_rejected(self):
        # A pot walled off from both spawns.
        text = "name: t\nrecipe: onion,onion,onion = 6\n\nXXXXXX\nO1 2DX\nXXXXXX\nXSXXPX\nXXXXXX\n"
        with pytest.raises(ValidationError):
            load_layout(text)


class TestReset:
    @pytest.mark.parametrize(
        "name", ["forced_coordination", "optional_collaboration", "coordination_ring"]
    )
    def test_initial_state(self, name):
        lay = builtin_layout(name)
        s = reset(lay, 200)
        assert s.t == 0 and s.score == 0
        assert s.players[0].pos == lay.spawn_a
        assert s.players[1].pos == lay.spawn_b
        assert all(p.held is None for p in s.players)
        assert all(pot.state == "empty" for pot in s.pots.values())
        assert not s.counters
        assert s.horizon == 200


class TestStep:
    def test_both_stay(self):
        s = reset(fc())
        nxt, ra, rb, done = step(s, A.STAY, A.STAY)
        assert nxt.t == 1 and ra == rb == 0 and not done
        assert nxt.players == s.players and nxt.score == 0

    def test_horizon(self):
        s = reset(fc(), horizon=2)
        s, *_ = step(s, A.STAY, A.STAY)
        s, _, _, done = step(s, A.STAY, A.STAY)
        assert done and s.done
        with pytest.raises(EpisodeOver):
            step(s, A.STAY, A.STAY)

    def test_same_target_conflict(self):
        lay = fc()
        s = reset(lay)
        # Both players walk toward the divider cell column; pick a pair of
        # moves that target one cell: place them around (2, 1).
        s = put_player(s, 0, (1, 1), A.SOUTH)
        s = put_player(s, 1, (3, 1), A.NORTH)
        nxt, *_ = step(s, A.SOUTH, A.NORTH)
        assert nxt.players[0].pos == (1, 1)
        assert nxt.players[1].pos == (3, 1)

    def test_swap_conflict(self):
        s = reset(fc())
        s = put_player(s, 0, (1, 1), A.SOUTH)
        s = put_player(s, 1, (2, 1), A.NORTH)
        nxt, *_ = step(s, A.SOUTH, A.NORTH)
        assert nxt.players[0].pos == (1, 1)
        assert nxt.players[1].pos == (2, 1)

    def test_follow_into_vacated_cell(self):
        s = reset(fc())
        s = put_player(s, 0, (1, 1), A.SOUTH)
        s = put_player(s, 1, (2, 1), A.SOUTH)
        nxt, *_ = step(s, A.SOUTH, A.SOUTH)
        assert nxt.players[0].pos == (2, 1)
        assert nxt.players[1].pos == (3, 1)

    def test_move_into_wall_turns_only(self):
        s = reset(fc())  # spawn (2,1) facing N; onion source west at (2,0)
        nxt, *_ = step(s, A.WEST, A.STAY)
        assert nxt.players[0].pos == (2, 1)
        assert nxt.players[0].facing == A.WEST

    def test_pickup_and_pot_shaping(self):
        lay = fc()
        s = reset(lay)
        s = put_player(s, 0, (2, 1), A.WEST)  # facing onion source
        s, ra, rb, _ = step(s, A.INTERACT, A.STAY)
        assert s.players[0].held == Item("onion") and ra == 0
        # Hand the onion over the divider: face the middle counter.
        s = put_player(s, 0, (2, 1), A.EAST, s.players[0].held)
        s, *_ = step(s, A.INTERACT, A.STAY)
        assert s.counters[(2, 2)] == Item("onion")
        # Player 1 picks it up and puts it in the pot at (1, 4).
        s = put_player(s, 1, (2, 3), A.WEST)
        s, ra, rb, _ = step(s, A.STAY, A.INTERACT)
        assert s.players[1].held == Item("onion")
        s = put_player(s, 1, (1, 3), A.EAST, s.players[1].held)
        s, ra, rb, _ = step(s, A.STAY, A.INTERACT)
        assert rb == 3 and ra == 0, "placement shaping goes to the acting player"
        assert s.pots[(1, 4)].contents == ("onion",)
        assert s.score == 3

    def test_cooking_and_delivery_rewards_both(self):
        lay = fc()
        s = reset(lay)
        pots = dict(s.pots)
        pots[(1, 4)] = Pot(("onion", "onion"), None)
        s = GameState(layout=lay, players=s.players, pots=pots, counters={},
                      t=0, score=0, horizon=200)
        s = put_player(s, 1, (1, 3), A.EAST, Item("onion"))
        s, _, rb, _ = step(s, A.STAY, A.INTERACT)
        assert rb == 3
        pot = s.pots[(1, 4)]
        assert pot.state == "cooking" and pot.timer == lay.cook_time - 1
        for _ in range(lay.cook_time - 1):
            assert s.pots[(1, 4)].state == "cooking"
            s, *_ = step(s, A.STAY, A.STAY)
        assert s.pots[(1, 4)].state == "ready"
        # Dish pickup is useful while a pot is cooking or ready.
        s = put_player(s, 1, (1, 3), A.EAST, Item("dish"))
        s, _, rb, _ = step(s, A.STAY, A.INTERACT)
        assert rb == 5, "soup pickup shaping"
        held = s.players[1].held
        assert held.kind == "soup" and held.contents == ("onion", "onion", "onion")
        assert s.pots[(1, 4)].state == "empty"
        s = put_player(s, 1, (3, 3), A.SOUTH, held)
        s, ra, rb, _ = step(s, A.STAY, A.INTERACT)
        assert ra == 60 and rb == 60, "delivery pays both players the same"
        assert s.players[1].held is None

    def test_mixed_soup_scores_oc(self):
        lay = builtin_layout("optional_collaboration")
        s = reset(lay)
        soup = Item("soup", ("onion", "onion", "tomato"))
        s = put_player(s, 0, (1, 1), A.WEST, soup)
        s, ra, rb, _ = step(s, A.INTERACT, A.STAY)
        assert ra == rb == 50
        assert lay.recipe_score(("onion", "onion", "onion")) == 30

    def test_useful_dish_pickup_rule(self):
        lay = fc()
        s = reset(lay)
        # No pot in progress: dish pickup earns nothing.
        s = put_player(s, 0, (3, 1), A.WEST)
        s1, ra, _, _ = step(s, A.INTERACT, A.STAY)
        assert s1.players[0].held == Item("dish") and ra == 0
        # One pot cooking, no staged dish: +3.
        pots = dict(s.pots)
        pots[(1, 4)] = Pot(("onion",) * 3, 10)
        s2 = GameState(layout=lay, players=s.players, pots=pots, counters={},
                       t=0, score=0, horizon=200)
        s2 = put_player(s2, 0, (3, 1), A.WEST)
        s2, ra, _, _ = step(s2, A.INTERACT, A.STAY)
        assert ra == 3
        # Second dish while only one pot cooks: not useful.
        s2 = put_player(s2, 0, (3, 1), A.WEST, None)
        s2 = put_player(s2, 1, (2, 3), A.NORTH, Item("dish"))
        s2, ra, _, _ = step(s2, A.INTERACT, A.STAY)
        assert ra == 0

    def test_determinism(self):
        lay = fc()
        s = reset(lay)
        a = step(s, A.NORTH, A.INTERACT)
        b = step(s, A.NORTH, A.INTERACT)
        assert a == b

    def test_score_never_decreases_and_conservation(self):
        import numpy as np

        from treechef.agents import RandomPolicy
        from treechef.training.rollout import run_episode

        lay = builtin_layout("coordination_ring")
        items_in_world = []

        def count_items(rec, state):
            n = sum(1 for p in state.players if p.held is not None)
            n += len(state.counters)
            items_in_world.append(n)

        scores = []
        run_episode(lay, RandomPolicy(), RandomPolicy(),
                    rng=np.random.default_rng(7),
                    on_tick=lambda rec, state: (count_items(rec, state), scores.append(state.score)))
        assert all(b >= a for a, b in zip(scores, scores[1:]))
        assert all(n >= 0 for n in items_in_world)


class TestLegalInteractions:
    def test_empty_hand_facing_onion(self):
        s = reset(fc())
        s = put_player(s, 0, (2, 1), A.WEST)
        assert legal_interactions(s, 0) == {PICKUP_ONION}

    def test_holding_soup_facing_serve(self):
        s = reset(fc())
        s = put_player(s, 1, (3, 3), A.SOUTH, Item("soup", ("onion",) * 3))
        assert legal_interactions(s, 1) == {SERVE_SOUP}

    def test_interact_table_against_enumeration(self):
        # Oracle: holding a dish facing a pot yields PickupSoup exactly when
        # the pot is ready; an ingredient exactly when it has capacity.
        lay = fc()
        base = reset(lay)
        for pot in (Pot(), Pot(("onion",), None), Pot(("onion",) * 3, 5), Pot(("onion",) * 3, 0)):
            pots = dict(base.pots)
            pots[(1, 4)] = pot
            s = GameState(layout=lay, players=base.players, pots=pots, counters={},
                          t=0, score=0, horizon=200)
            s_dish = put_player(s, 1, (1, 3), A.EAST, Item("dish"))
            expected = {PICKUP_SOUP} if pot.state == "ready" else set()
            assert legal_interactions(s_dish, 1) == expected
            s_onion = put_player(s, 1, (1, 3), A.EAST, Item("onion"))
            expected = {ADD_TO_POT} if pot.has_capacity else set()
            assert legal_interactions(s_onion, 1) == expected

    def test_dish_source(self):
        s = reset(fc())
        s = put_player(s, 0, (3, 1), A.WEST)
        assert legal_interactions(s, 0) == {PICKUP_DISH}
