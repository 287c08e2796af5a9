import io

import numpy as np
import pytest

from treechef.agents import RandomPolicy, ScriptedPolicy, collaborative_policy
from treechef.env import PrimitiveAction as A, builtin_layout, reset, step
from treechef.env.layout import load_layout
from treechef.episode_log import (
    EpisodeLogWriter,
    bc_pairs_from_log,
    layout_text_of,
    parse_log,
    replay,
    state_to_dict,
)
from treechef.features import featurize
from treechef.planning import MacroAction as M, plan_step
from treechef.training.rollout import applicable_mask


def record_episode(layout, policy_a, policy_b, seed=0, log_macros=False):
    sink = io.StringIO()
    state = reset(layout)
    writer = EpisodeLogWriter(sink, layout, state.horizon, seats={"0": "a", "1": "b"})
    rng = np.random.default_rng(seed)
    while not state.done:
        acts, macros = [], []
        for i, pol in enumerate((policy_a, policy_b)):
            x = featurize(state, i)
            mask = applicable_mask(state, i)
            macro, _, _ = pol.choose(state, i, x, mask, rng)
            macros.append(macro)
            acts.append(plan_step(state, i, M(macro)).action)
        prev = state
        state, ra, rb, _ = step(state, acts[0], acts[1])
        writer.record(prev, acts, (ra, rb), state,
                      macros=macros if log_macros else None)
    writer.finish()
    return sink.getvalue(), state.score


class TestLayoutText:
    @pytest.mark.parametrize(
        "name", ["forced_coordination", "optional_collaboration", "coordination_ring"]
    )
    def test_round_trip(self, name):
        layout = builtin_layout(name)
        again = load_layout(layout_text_of(layout))
        assert again.grid == layout.grid
        assert again.spawn_a == layout.spawn_a and again.spawn_b == layout.spawn_b
        assert again.recipe_table == layout.recipe_table
        assert again.shared_counters == layout.shared_counters
        assert again.cook_time == layout.cook_time


class TestReplay:
    def test_scripted_episode_replays_exactly(self):
        layout = builtin_layout("optional_collaboration")
        policy = ScriptedPolicy(collaborative_policy)
        text, score = record_episode(layout, policy, policy)
        result = replay(io.StringIO(text))
        assert result.exact
        assert result.final_score == score == result.logged_score
        assert result.ticks == 200

    def test_random_episode_replays_exactly(self):
        layout = builtin_layout("coordination_ring")
        text, score = record_episode(layout, RandomPolicy(), RandomPolicy(), seed=5)
        result = replay(io.StringIO(text))
        assert result.exact and result.final_score == score

    def test_tampered_log_detected(self):
        layout = builtin_layout("coordination_ring")
        text, _ = record_episode(layout, RandomPolicy(), RandomPolicy(), seed=2)
        lines = text.splitlines()
        # Corrupt one tick's logged score.
        import json

        for i, ln in enumerate(lines):
            obj = json.loads(ln)
            if obj.get("type") == "tick" and obj["score"] > 0:
                obj["score"] += 1
                lines[i] = json.dumps(obj)
                break
        result = replay(io.StringIO("\n".join(lines)))
        assert not result.exact and result.mismatches

    def test_header_required(self):
        with pytest.raises(ValueError):
            replay(io.StringIO('{"type":"tick","t":0}\n'))


class TestBcPairs:
    def test_logged_macros_win(self):
        layout = builtin_layout("optional_collaboration")
        policy = ScriptedPolicy(collaborative_policy)
        text, _ = record_episode(layout, policy, policy, log_macros=True)
        pairs = bc_pairs_from_log(io.StringIO(text), seat=0)
        assert len(pairs) == 200
        macros = {m for _, m in pairs}
        assert macros <= set(range(8))
        assert int(M.PLACE_IN_POT) in macros

    def test_primitive_segmentation(self):
        # A hand-scripted primitive episode: walk to the onion source,
        # pick up, walk to the pot, place. Segmentation labels the first
        # segment get_onion and the second place_in_pot.
        layout = builtin_layout("forced_coordination")
        state = reset(layout)
        sink = io.StringIO()
        writer = EpisodeLogWriter(sink, layout, state.horizon)
        script = [A.WEST, A.INTERACT,  # face + take onion (spawn is adjacent)
                  A.EAST, A.INTERACT]  # face divider counter + place
        for act in script:
            prev = state
            state, ra, rb, _ = step(state, act, A.STAY)
            writer.record(prev, (act, A.STAY), (ra, rb), state)
        while not state.done:
            prev = state
            state, ra, rb, _ = step(state, A.STAY, A.STAY)
            writer.record(prev, (A.STAY, A.STAY), (ra, rb), state)
        writer.finish()
        pairs = bc_pairs_from_log(io.StringIO(sink.getvalue()), seat=0)
        labels = [m for _, m in pairs]
        assert labels[0] == int(M.GET_ONION) and labels[1] == int(M.GET_ONION)
        assert labels[2] == int(M.PLACE_ON_COUNTER) and labels[3] == int(M.PLACE_ON_COUNTER)
        assert labels[-1] == int(M.WAIT)

    def test_features_match_replayed_states(self):
        layout = builtin_layout("optional_collaboration")
        policy = ScriptedPolicy(collaborative_policy)
        text, _ = record_episode(layout, policy, policy, log_macros=True)
        pairs = bc_pairs_from_log(io.StringIO(text), seat=1)
        state = reset(layout)
        assert np.array_equal(pairs[0][0], featurize(state, 1))


def test_state_dict_shape():
    state = reset(builtin_layout("forced_coordination"))
    d = state_to_dict(state)
    assert d["t"] == 0 and d["score"] == 0
    assert len(d["players"]) == 2
    assert set(d["pots"]) == {"0,3", "1,4"}
