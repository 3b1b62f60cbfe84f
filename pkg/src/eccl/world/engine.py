"""Action semantics and observation rendering.

``step`` mutates the given ``EnvState`` in place and returns it alongside the
``StepRecord``; callers who need the prior state keep a ``state.copy()``.
"""
from __future__ import annotations

from typing import Optional

from .types import (
    NOTHING_HAPPENS, PROPERTY_OF_VERB, STATE_OF_VERB,
    Action, EnvState, StepRecord, TaskGoal, WorldSpec, display_order,
)


def listing(ids) -> str:
    items = [f"a {i}" for i in display_order(ids)]
    if not items:
        return "nothing"
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + ", and " + items[-1]


def room_overview(world: WorldSpec) -> str:
    return ("You are in the middle of a room. Looking quickly around you, you see "
            f"{listing(world.location_ids)}.")


def _contents(state: EnvState, loc_id: str) -> str:
    loc = state.world.location_by_id[loc_id]
    if loc.container:
        if not state.container_open[loc_id]:
            return f"The {loc_id} is closed."
        return f"The {loc_id} is open. In it, you see {listing(state.objects_at(loc_id))}."
    return f"On the {loc_id}, you see {listing(state.objects_at(loc_id))}."


def arrival(loc_id: str) -> str:
    return f"You arrive at {loc_id}."


def initial_state(world: WorldSpec) -> EnvState:
    return EnvState(
        world=world,
        agent_location=None,
        carrying=None,
        object_locations={o.id: o.initial_location for o in world.objects},
        container_open={loc.id: loc.initially_open for loc in world.locations if loc.container},
        object_state={o.id: set() for o in world.objects},
    )


def reset(world: WorldSpec, goal: Optional[TaskGoal] = None, check: bool = True) -> tuple[EnvState, str]:
    """Fresh state plus the room overview. The goal never enters the observation."""
    if goal is not None and check:
        from .solver import check_solvable
        if not check_solvable(world, goal):
            raise ValueError(f"goal {goal.text!r} is not satisfiable in world {world.world_id}")
    return initial_state(world), room_overview(world)


def _open_or_plain(state: EnvState, loc_id: str) -> bool:
    loc = state.world.location_by_id[loc_id]
    return (not loc.container) or state.container_open[loc_id]


def _apply(state: EnvState, a: Action) -> Optional[str]:
    """Return the observation on success, None for a no-op. Mutates on success only."""
    w = state.world
    v = a.verb
    here = state.agent_location
    if v == "look":
        if here is None:
            return room_overview(w)
        return f"You are facing the {here}. " + _contents(state, here)
    if v == "inventory":
        if state.carrying is None:
            return "You are not carrying anything."
        return f"You are carrying: a {state.carrying}."
    if v == "goto":
        if a.arg1 not in w.location_by_id:
            return None
        state.agent_location = a.arg1
        return arrival(a.arg1) + " " + _contents(state, a.arg1)
    if v in ("open", "close"):
        loc = w.location_by_id.get(a.arg1)
        if loc is None or not loc.container or here != a.arg1:
            return None
        is_open = state.container_open[a.arg1]
        if v == "open":
            if is_open:
                return None
            state.container_open[a.arg1] = True
            return f"You open the {a.arg1}. " + _contents(state, a.arg1)
        if not is_open:
            return None
        state.container_open[a.arg1] = False
        return f"You close the {a.arg1}."
    if v == "take":
        o, r = a.arg1, a.arg2
        if (state.carrying is not None or here != r or r not in w.location_by_id
                or state.object_locations.get(o) != r or not _open_or_plain(state, r)):
            return None
        del state.object_locations[o]
        state.carrying = o
        return f"You pick up the {o} from the {r}."
    if v == "move":
        o, r = a.arg1, a.arg2
        if state.carrying != o or here != r or r not in w.location_by_id or not _open_or_plain(state, r):
            return None
        if w.location_by_id[r].requires_clear and state.objects_at(r):
            return None
        state.object_locations[o] = r
        state.carrying = None
        return f"You move the {o} to the {r}."
    if v == "examine":
        o = a.arg1
        if state.carrying != o:
            return None
        flags = state.object_state.get(o, set())
        if not flags:
            return f"There's nothing special about {o}."
        return f"The {o} is " + " and ".join(sorted(flags)) + "."
    if v in ("heat", "cool", "clean"):
        o, r = a.arg1, a.arg2
        loc = w.location_by_id.get(r)
        obj = w.object_by_id.get(o)
        if (loc is None or obj is None or state.carrying != o or here != r
                or loc.kind != w.device_map.get(v) or PROPERTY_OF_VERB[v] not in obj.properties):
            return None
        flags = state.object_state[o]
        if v == "heat":
            flags.discard("cold")
        elif v == "cool":
            flags.discard("hot")
        flags.add(STATE_OF_VERB[v])
        return f"You {v} the {o} using the {r}."
    raise AssertionError(v)


def step(state: EnvState, action: Action) -> tuple[EnvState, StepRecord]:
    if state.terminal:
        raise ValueError("step called on a terminal state")
    state.step_count += 1
    if action.verb == "done":
        state.terminal = True
        return state, StepRecord(state.step_count, action.text, action, "You end the episode.", "terminal")
    obs = _apply(state, action)
    if obs is None:
        return state, StepRecord(state.step_count, action.text, action, NOTHING_HAPPENS, "noop")
    return state, StepRecord(state.step_count, action.text, action, obs, "ok")


def noop_record(state: EnvState, text: str) -> StepRecord:
    """Record for unparseable agent output: counts as a step, changes nothing."""
    if state.terminal:
        raise ValueError("step called on a terminal state")
    state.step_count += 1
    return StepRecord(state.step_count, text, None, NOTHING_HAPPENS, "noop")


def check_task_success(state: EnvState, goal: TaskGoal) -> bool:
    w = state.world
    for oid, where in state.object_locations.items():
        if where != goal.target_receptacle:
            continue
        if w.object_by_id[oid].cls == goal.target_object_class and goal.required_state <= state.object_state[oid]:
            return True
    return False


class Env:
    """Convenience wrapper holding one world, one state and a running trajectory."""

    def __init__(self, world: WorldSpec, goal: Optional[TaskGoal] = None, check: bool = True):
        self.world = world
        self.goal = goal
        self._check = check
        self.state, self.observation = reset(world, goal, check=check)

    def reset(self) -> str:
        self.state, self.observation = reset(self.world, self.goal, check=False)
        return self.observation

    def step(self, action) -> StepRecord:
        from .parse import parse_action
        if isinstance(action, str):
            parsed = parse_action(action)
            if parsed is None:
                rec = noop_record(self.state, action)
                self.observation = rec.observation
                return rec
            action = parsed
        _, rec = step(self.state, action)
        self.observation = rec.observation
        return rec

    @property
    def success(self) -> bool:
        return self.goal is not None and check_task_success(self.state, self.goal)
