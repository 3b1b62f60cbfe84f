"""Candidate actions and the versioned sparse feature schema (v1).

Every feature is binary, so a FeatureVector is stored as a sorted tuple of
active indices. The table ``FEATURE_NAMES`` maps index -> meaning.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..world.types import (
    DEFAULT_DEVICE_MAP, DEVICE_VERBS, LOCATION_KINDS, VERB_OF_STATE, VERBS, Action, TaskGoal,
    kind_of,
)
from .view import AgentView

SCHEMA_VERSION = "eccl-features/v1"
MODES = ("explore", "act")

# verb x receptacle-kind block, shared by both modes
VK_VERBS = ("goto", "open", "close", "take", "move", "examine", "heat", "cool", "clean")
KIND_SLOTS = tuple(LOCATION_KINDS) + ("none",)
# argument-free verbs get one shared column each so both modes can move them
BARE_VERBS = ("look", "inventory", "done")

HISTORY_BITS = (
    "repeat_prev",            # candidate text equals the previous action text
    "goto_visited",           # goto a location already visited this episode
    "goto_current",           # goto where the agent already stands
    "goto_uninspected",       # goto a location whose contents were never observed
    "obj_seen_earlier",       # object argument observed before the current step
    "nooped_before",          # this exact text produced "Nothing happens." earlier
    "ok_before",              # this exact text already succeeded earlier
    "at_target",              # agent stands at the receptacle the action needs
    "take_while_carrying",    # hands are full
    "take_from_closed",       # receptacle believed closed
    "toggle_redundant",       # open an open / close a closed container
    "open_uninspected",       # open a container whose contents are unknown
    "device_untested",        # no successful use of this verb on this device yet
    "examine_not_carried",    # examine an object that is not in hand
)

ACT_BITS = (
    "goal_class_match",       # object argument is of the goal class
    "take_goal",              # take a goal-class object with empty hands
    "goto_target_ready",      # carrying a finished goal object, goto the target
    "move_goal_target_ready", # place a finished goal object on the target
    "goto_device_needed",     # carrying goal object, goto a device it still needs
    "device_for_goal",        # apply a still-missing transformation
    "goto_goal_believed",     # goto where a goal object is believed to be
    "knowledge_goal_here",    # the knowledge summary places a goal object at this receptacle
    "move_goal_elsewhere",    # put the goal object down somewhere other than the target
    "goto_unvisited_search",  # no goal object located yet, goto an unvisited location
    "open_search",            # no goal object located yet, open an uninspected container
    "move_other",             # put down a non-goal object
)


def _build_names() -> list[str]:
    names = [f"vk:{v}:{k}" for v in VK_VERBS for k in KIND_SLOTS]
    names += [f"vk:{v}:none" for v in BARE_VERBS]
    names += [f"hist:{b}" for b in HISTORY_BITS]
    names += [f"prev_noop:{v}" for v in VERBS]
    names += [f"bias:{m}:{v}" for m in MODES for v in VERBS]
    names += [f"act:{b}" for b in ACT_BITS]
    return names


FEATURE_NAMES: tuple = tuple(_build_names())
D = len(FEATURE_NAMES)
INDEX = {n: i for i, n in enumerate(FEATURE_NAMES)}

_VK = {(v, k): INDEX[f"vk:{v}:{k}"] for v in VK_VERBS for k in KIND_SLOTS}
_VK.update({(v, "none"): INDEX[f"vk:{v}:none"] for v in BARE_VERBS})
_H = {b: INDEX[f"hist:{b}"] for b in HISTORY_BITS}
_PN = {v: INDEX[f"prev_noop:{v}"] for v in VERBS}
_BIAS = {(m, v): INDEX[f"bias:{m}:{v}"] for m in MODES for v in VERBS}
_A = {b: INDEX[f"act:{b}"] for b in ACT_BITS}
ACT_BLOCK = frozenset(_A.values())
KNOWLEDGE_BITS = frozenset({_A["knowledge_goal_here"]})


def feature_table() -> list[dict]:
    return [{"index": i, "name": n} for i, n in enumerate(FEATURE_NAMES)]


@dataclass
class PolicyContext:
    mode: str
    view: AgentView
    goal: Optional[TaskGoal] = None
    knowledge: object = None
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "explore" and self.goal is not None:
            raise ValueError("exploration is goal-free")


def legal_actions(view: AgentView) -> list[Action]:
    """Deterministic candidate set over entities mentioned so far."""
    out = [Action("goto", loc) for loc in view.locations]
    here = view.at
    if here is not None and view.is_container(here):
        out.append(Action("open", here))
        out.append(Action("close", here))
    for o in view.known_objects:
        loc = view.where.get(o)
        if loc is not None and o != view.carrying:
            out.append(Action("take", o, loc))
    held = view.carrying
    if held is not None:
        if here is not None:
            out.append(Action("move", held, here))
        out.append(Action("examine", held))
    if here is not None:
        for o in view.contents.get(here, ()):
            if o != held:
                out.append(Action("examine", o))
        if held is not None:
            for verb in DEVICE_VERBS:
                out.append(Action(verb, held, here))
    out += [Action("look"), Action("inventory"), Action("done")]
    return out


def _cls(obj: str) -> str:
    return kind_of(obj)


class _GoalInfo:
    __slots__ = ("cls", "target", "carried_goal", "ready", "missing_kinds", "missing_verbs",
                 "goal_locs", "k_locs", "searching")

    def __init__(self, ctx: PolicyContext):
        view, goal = ctx.view, ctx.goal
        self.cls = goal.target_object_class
        self.target = goal.target_receptacle
        held = view.carrying
        self.carried_goal = held is not None and _cls(held) == self.cls
        flags = view.flags.get(held, set()) if self.carried_goal else set()
        missing = [s for s in sorted(goal.required_state) if s not in flags]
        self.ready = self.carried_goal and not missing
        self.missing_verbs = {VERB_OF_STATE[s] for s in missing}
        self.missing_kinds = {DEFAULT_DEVICE_MAP[v] for v in self.missing_verbs}
        self.goal_locs = {loc for o, loc in view.where.items() if _cls(o) == self.cls and loc != self.target}
        k = ctx.knowledge
        self.k_locs = set()
        if k is not None:
            self.k_locs = {loc for o, loc in k.object_placements.items()
                           if _cls(o) == self.cls and loc != self.target}
        self.searching = not self.carried_goal and not self.goal_locs


def _receptacle(a: Action) -> Optional[str]:
    if a.verb in ("goto", "open", "close"):
        return a.arg1
    if a.verb in ("take", "move") or a.verb in DEVICE_VERBS:
        return a.arg2
    return None


def features(ctx: PolicyContext, a: Action, _goal: Optional[_GoalInfo] = None) -> tuple:
    view = ctx.view
    v = a.verb
    text = a.text
    idx = [_BIAS[(ctx.mode, v)]]
    rec = _receptacle(a)
    idx.append(_VK[(v, kind_of(rec) if rec is not None else "none")])
    if text == view.prev_text:
        idx.append(_H["repeat_prev"])
    if text in view.nooped:
        idx.append(_H["nooped_before"])
    if text in view.ok_texts:
        idx.append(_H["ok_before"])
    if view.prev_outcome == "noop":
        idx.append(_PN[v])
    obj = a.arg1 if v not in ("goto", "open", "close") else None
    if v == "goto":
        if rec in view.visited:
            idx.append(_H["goto_visited"])
        if rec == view.at:
            idx.append(_H["goto_current"])
        if rec not in view.inspected:
            idx.append(_H["goto_uninspected"])
    elif rec is not None and rec == view.at:
        idx.append(_H["at_target"])
    if obj is not None and view.first_seen.get(obj, view.step) < view.step:
        idx.append(_H["obj_seen_earlier"])
    if v == "take":
        if view.carrying is not None:
            idx.append(_H["take_while_carrying"])
        if view.open_state.get(rec) is False:
            idx.append(_H["take_from_closed"])
    elif v in ("open", "close"):
        state = view.open_state.get(rec)
        if state is not None and state == (v == "open"):
            idx.append(_H["toggle_redundant"])
        if v == "open" and rec not in view.inspected:
            idx.append(_H["open_uninspected"])
    elif v in DEVICE_VERBS:
        if not any(t.startswith(f"{v} ") and t.endswith(f" with {rec}") for t in view.ok_texts):
            idx.append(_H["device_untested"])
    elif v == "examine" and obj != view.carrying:
        idx.append(_H["examine_not_carried"])

    if ctx.mode == "act" and ctx.goal is not None:
        g = _goal or _GoalInfo(ctx)
        is_goal_obj = obj is not None and _cls(obj) == g.cls
        if is_goal_obj:
            idx.append(_A["goal_class_match"])
        if v == "take":
            if is_goal_obj and view.carrying is None:
                idx.append(_A["take_goal"])
            if rec in g.k_locs and not g.carried_goal:
                idx.append(_A["knowledge_goal_here"])
        elif v == "goto":
            if g.ready and rec == g.target:
                idx.append(_A["goto_target_ready"])
            if g.carried_goal and kind_of(rec) in g.missing_kinds:
                idx.append(_A["goto_device_needed"])
            if not g.carried_goal and rec in g.goal_locs:
                idx.append(_A["goto_goal_believed"])
            if not g.carried_goal and rec in g.k_locs:
                idx.append(_A["knowledge_goal_here"])
            if g.searching and rec not in view.visited:
                idx.append(_A["goto_unvisited_search"])
        elif v == "move":
            if is_goal_obj:
                idx.append(_A["move_goal_target_ready"] if (g.ready and rec == g.target)
                           else _A["move_goal_elsewhere"])
            else:
                idx.append(_A["move_other"])
        elif v in DEVICE_VERBS:
            if is_goal_obj and v in g.missing_verbs and kind_of(rec) == DEFAULT_DEVICE_MAP[v]:
                idx.append(_A["device_for_goal"])
        elif v == "open":
            if g.searching and rec not in view.inspected:
                idx.append(_A["open_search"])
    return tuple(sorted(idx))


def feature_rows(ctx: PolicyContext, candidates: list[Action]) -> list[tuple]:
    g = _GoalInfo(ctx) if ctx.mode == "act" and ctx.goal is not None else None
    return [features(ctx, a, g) for a in candidates]


def as_feature_vector(row: tuple) -> dict:
    return {i: 1.0 for i in row}
