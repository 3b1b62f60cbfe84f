"""Full-knowledge planning on the ground-truth state (solvability oracle)."""
from __future__ import annotations

from typing import Optional

from .engine import check_task_success, initial_state, step
from .types import VERB_OF_STATE, Action, TaskGoal, WorldSpec


class _PlanFailed(Exception):
    pass


def _attempt(world: WorldSpec, goal: TaskGoal, obj: str) -> list[Action]:
    state = initial_state(world)
    plan: list[Action] = []

    def do(action: Action):
        _, rec = step(state, action)
        if rec.outcome != "ok":
            raise _PlanFailed(action.text)
        plan.append(action)

    def reach(loc: str):
        if state.agent_location != loc:
            do(Action("goto", loc))
        if world.location_by_id[loc].container and not state.container_open[loc]:
            do(Action("open", loc))

    target = goal.target_receptacle
    tloc = world.location_by_id[target]
    if tloc.requires_clear:
        for blocker in sorted(state.objects_at(target)):
            if blocker == obj:
                continue
            spare = [l.id for l in world.locations
                     if l.id != target and not (l.requires_clear and state.objects_at(l.id))]
            if not spare:
                raise _PlanFailed("nowhere to put blocker")
            reach(target)
            do(Action("take", blocker, target))
            reach(spare[0])
            do(Action("move", blocker, spare[0]))

    src = state.object_locations[obj]
    reach(src)
    do(Action("take", obj, src))
    for flag in sorted(goal.required_state):
        verb = VERB_OF_STATE[flag]
        devices = world.devices(verb)
        if not devices:
            raise _PlanFailed(f"no device for {verb}")
        if state.agent_location != devices[0]:
            do(Action("goto", devices[0]))
        do(Action(verb, obj, devices[0]))
    if tloc.requires_clear and state.objects_at(target):
        raise _PlanFailed("target still blocked")
    reach(target)
    do(Action("move", obj, target))
    if not check_task_success(state, goal):
        raise _PlanFailed("goal unmet after plan")
    return plan


def plan_solution(world: WorldSpec, goal: TaskGoal) -> Optional[list[Action]]:
    """Shortest-effort scripted plan for ``goal`` or ``None`` when no object works."""
    if goal.target_receptacle not in world.location_by_id:
        return None
    for o in world.objects:
        if o.cls != goal.target_object_class:
            continue
        try:
            return _attempt(world, goal, o.id)
        except _PlanFailed:
            continue
    return None


def check_solvable(world: WorldSpec, goal: TaskGoal) -> bool:
    return plan_solution(world, goal) is not None
