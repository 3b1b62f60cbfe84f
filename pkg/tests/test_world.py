import json

import pytest
from hypothesis import given, strategies as st

from eccl.world import Env
from eccl.world.engine import check_task_success, reset, step
from eccl.world.generate import check_params, generate_world, sample_goal
from eccl.world.parse import parse_action
from eccl.world.reach import enumerate_reachable
from eccl.world.reference import reference_kitchen_goal
from eccl.world.solver import check_solvable, plan_solution
from eccl.world.types import (
    Action, EnvState, LocationSpec, NOTHING_HAPPENS, ObjectSpec, TaskGoal, WorldSpec,
)
from strategies import all_actions, world_and_actions, worlds


def test_bedroom_layout_matches_case_study(bedroom):
    ids = bedroom.location_ids
    assert {"bed 1", "diningtable 1", "garbagecan 1", "sidetable 1", "sidetable 2"} <= set(ids)
    assert [i for i in ids if i.startswith("drawer")] == ["drawer 1", "drawer 2", "drawer 3", "drawer 4"]


def test_generator_emits_bedroom_layout_at_seed_7():
    w = generate_world(7, 9, 12, "bedroom")
    assert sorted(w.location_ids) == sorted(
        ["bed 1", "diningtable 1", "drawer 1", "drawer 2", "drawer 3", "drawer 4",
         "garbagecan 1", "sidetable 1", "sidetable 2"])


def test_generation_is_deterministic():
    assert generate_world(11, 7, 9).to_json() == generate_world(11, 7, 9).to_json()


def test_neighbouring_seeds_place_objects_differently():
    same = 0
    for s in range(100):
        a, b = generate_world(2 * s, 8, 10), generate_world(2 * s + 1, 8, 10)
        same += [o.initial_location for o in a.objects] == [o.initial_location for o in b.objects] \
            and a.location_ids == b.location_ids
    assert same == 0


@pytest.mark.parametrize("nl,no,kind,name", [(3, 8, "bedroom", "n_locations"), (8, 40, "kitchen", "n_objects"),
                                             (8, 8, "bathroom", "room_kind")])
def test_generator_range_errors_name_the_parameter(nl, no, kind, name):
    with pytest.raises(ValueError, match=name):
        check_params(nl, no, kind)


def test_world_json_round_trip(bedroom):
    assert WorldSpec.from_json(bedroom.to_json()) == bedroom


def test_world_validation():
    loc = LocationSpec("bed 1", "bed", False)
    with pytest.raises(ValueError):
        WorldSpec("w", 0, "bedroom", (loc, loc), ())
    with pytest.raises(ValueError):
        WorldSpec("w", 0, "bedroom", (loc,), (ObjectSpec("book 1", "book", "desk 1"),))
    with pytest.raises(ValueError):
        WorldSpec("w", 0, "bedroom", (LocationSpec("bed 1", "bed", False, initially_open=False),), ())
    with pytest.raises(ValueError):
        WorldSpec("w", 0, "bedroom", (loc,), (), device_map={"slice": "knife"})


def test_reset_observation(bedroom):
    _, obs = reset(bedroom)
    assert obs.startswith("You are in the middle of a room. Looking quickly around you, you see a bed 1, "
                          "a diningtable 1,")


def test_reset_is_deterministic_and_goal_free(bedroom):
    s1, o1 = reset(bedroom)
    s2, o2 = reset(bedroom, TaskGoal.make("pick_and_place_simple", "book", "sidetable 1"))
    assert o1 == o2 and s1.snapshot() == s2.snapshot()


def test_reset_rejects_unsatisfiable_goal(bedroom):
    with pytest.raises(ValueError):
        reset(bedroom, TaskGoal.make("pick_and_place_simple", "apple", "bed 1"))


def test_case_study_step_semantics(bedroom):
    env = Env(bedroom)
    env.step("go to bed 1")
    assert env.step("examine book 1").observation == NOTHING_HAPPENS
    rec = env.step("take book 1 from bed 1")
    assert rec.outcome == "ok" and env.state.carrying == "book 1"
    assert env.step("take laptop 1 from bed 1").observation == NOTHING_HAPPENS


def test_cool_away_from_fridge_noops(kitchen):
    env = Env(kitchen)
    env.step("go to countertop 1")
    env.step("take mug 1 from countertop 1")
    assert env.step("cool mug 1 with fridge 1").outcome == "noop"


@pytest.mark.parametrize("text,want", [
    ("take mug 1 from countertop 1", Action("take", "mug 1", "countertop 1")),
    ("LOOK", Action("look")),
    ("go to bed 1", Action("goto", "bed 1")),
    ("cool mug 1 with fridge 1", Action("cool", "mug 1", "fridge 1")),
    ("grab the mug", None),
    ("", None),
])
def test_parse_action(text, want):
    assert parse_action(text) == want


@given(st.sampled_from(all_actions(generate_world(0, 8, 8))))
def test_parse_round_trips_action_text(a):
    assert parse_action(a.text) == a


@pytest.mark.parametrize("verb,args", [("take", ("mug 1",)), ("look", ("x 1",)), ("goto", ())])
def test_action_arity(verb, args):
    with pytest.raises(ValueError):
        Action(verb, *args)


def test_success_predicate(kitchen):
    goal = reference_kitchen_goal()
    env = Env(kitchen, goal)
    assert not env.success
    for a in ["go to countertop 1", "take mug 1 from countertop 1", "go to coffeemachine 1",
              "move mug 1 to coffeemachine 1"]:
        env.step(a)
    assert env.state.object_locations["mug 1"] == "coffeemachine 1" and not env.success
    env2 = Env(kitchen, goal)
    for a in ["go to countertop 1", "take mug 1 from countertop 1", "go to fridge 1", "cool mug 1 with fridge 1",
              "go to coffeemachine 1", "move mug 1 to coffeemachine 1"]:
        env2.step(a)
    assert env2.success


def test_no_generated_goal_is_presatisfied():
    n = 0
    for s in range(500):
        w = generate_world(s, 4 + s % 6, 4 + s % 9, ("bedroom", "kitchen")[s % 2])
        try:
            g = sample_goal(w, s)
        except ValueError:
            continue
        n += 1
        state, _ = reset(w, check=False)
        assert not check_task_success(state, g)
    assert n > 400


def test_reachability_of_bedroom(bedroom):
    r = enumerate_reachable(bedroom)
    assert set(bedroom.location_ids) <= r.locations
    assert "pencil 2" in r.objects
    assert ("open", "drawer 1", None) in r.affordances


def test_reachability_without_containers():
    locs = (LocationSpec("bed 1", "bed", False), LocationSpec("sidetable 1", "sidetable", False))
    objs = (ObjectSpec("book 1", "book", "bed 1"), ObjectSpec("pencil 1", "pencil", "sidetable 1"))
    r = enumerate_reachable(WorldSpec("flat", 0, "bedroom", locs, objs))
    assert r.locations == {"bed 1", "sidetable 1"} and r.objects == {"book 1", "pencil 1"}
    takes = {a[1:] for a in r.affordances if a[0] == "take"}
    assert takes == {(o, l) for o in ("book 1", "pencil 1") for l in ("bed 1", "sidetable 1")}
    assert not {a for a in r.affordances if a[0] in ("open", "close")}


def test_solvability(bedroom, kitchen):
    assert check_solvable(kitchen, reference_kitchen_goal())
    assert not check_solvable(bedroom, TaskGoal.make("pick_and_place_simple", "apple", "bed 1"))
    assert not check_solvable(bedroom, TaskGoal.make("pick_cool_then_place_in_recep", "mug", "bed 1"))


def test_generated_pairs_are_solvable_and_plans_work():
    n = 0
    for s in range(500):
        w = generate_world(s, 4 + s % 9, 4 + s % 13, ("bedroom", "kitchen")[s % 2])
        try:
            g = sample_goal(w, s)
        except ValueError:
            continue
        assert check_solvable(w, g)
        if s % 10 == 0:
            env = Env(w, g)
            for a in plan_solution(w, g):
                assert env.step(a).outcome == "ok"
            assert env.success
        n += 1
    assert n > 400


def test_state_round_trip(kitchen):
    env = Env(kitchen)
    env.step("go to fridge 1")
    env.step("open fridge 1")
    d = json.loads(json.dumps(env.state.to_dict()))
    assert EnvState.from_dict(d, kitchen).to_dict() == env.state.to_dict()


def _replay(world, actions):
    state, _ = reset(world, check=False)
    return state, [step(state, a)[1] for a in actions]


@given(world_and_actions())
def test_replay_is_deterministic(wa):
    w, acts = wa
    assert _replay(w, acts)[1] == _replay(w, acts)[1]


@given(world_and_actions())
def test_state_invariants_hold_along_any_action_sequence(wa):
    w, acts = wa
    state, _ = reset(w, check=False)
    all_objects = sorted(o.id for o in w.objects)
    containers = {l.id for l in w.locations if l.container}
    for n, a in enumerate(acts, 1):
        before = state.copy().snapshot()
        _, rec = step(state, a)
        assert (rec.outcome == "noop") == (rec.observation == NOTHING_HAPPENS)
        assert (rec.outcome == "terminal") == (a.verb == "done")
        if rec.outcome == "noop":
            assert state.snapshot() == before
        placed = set(state.object_locations)
        held = {state.carrying} if state.carrying else set()
        assert not placed & held
        assert sorted(placed | held) == all_objects
        assert set(state.container_open) == containers
        assert state.step_count == n


@given(world_and_actions(), st.lists(st.sampled_from(["look", "inventory", "examine"]), min_size=1, max_size=5))
def test_info_actions_never_change_success(wa, extra):
    w, acts = wa
    try:
        g = sample_goal(w, 0)
    except ValueError:
        return
    state, _ = reset(w, check=False)
    for a in acts:
        step(state, a)
    before = check_task_success(state, g)
    for v in extra:
        a = Action(v, state.carrying) if v == "examine" and state.carrying else Action("look") if v == "examine" else Action(v)
        step(state, a)
        assert check_task_success(state, g) == before


@given(worlds())
def test_container_gating(w):
    closed = [l.id for l in w.locations if l.container and not l.initially_open]
    for c in closed:
        inside = [o.id for o in w.objects if o.initial_location == c]
        if not inside:
            continue
        state, _ = reset(w, check=False)
        step(state, Action("goto", c))
        assert step(state, Action("take", inside[0], c))[1].outcome == "noop"
        step(state, Action("open", c))
        assert step(state, Action("take", inside[0], c))[1].outcome == "ok"
