"""Deterministic scripted policies used as oracles.

Both are written as generators that read the live ``AgentView`` between
yields, so every decision sees the observation of the previous step.
"""
from __future__ import annotations

from typing import Iterator

from ..world.generate import CLASS_PRIORS, CLASS_PROPERTIES
from ..world.types import DEVICE_VERBS, PROPERTY_OF_VERB, VERB_OF_STATE, Action, kind_of, split_id
from .features import PolicyContext
from .softmax import Decision

DONE = Action("done")


class _Scripted:
    records_features = False

    def begin(self, ctx: PolicyContext) -> None:
        self._gen = self._script(ctx)

    def decide(self, ctx: PolicyContext, rng=None) -> Decision:
        a = next(self._gen, DONE)
        return Decision(a, a.text)

    def _script(self, ctx) -> Iterator[Action]:
        raise NotImplementedError


class ScriptedExplorer(_Scripted):
    """Systematic sweep: every receptacle, every container toggle, every object
    picked up and put back, each device tried once with a suitable object."""

    name = "scripted-explorer"

    def _script(self, ctx):
        view = ctx.view
        yield Action("look")
        tested: set = set()
        examined = False
        for loc in list(view.locations):
            yield Action("goto", loc)
            closed_on_arrival = view.is_container(loc) and view.open_state.get(loc) is False
            if closed_on_arrival:
                yield Action("open", loc)
            elif view.is_container(loc):
                yield Action("close", loc)
                yield Action("open", loc)
            for o in list(view.contents.get(loc, [])):
                yield Action("take", o, loc)
                if view.carrying != o:
                    continue
                if not examined:
                    yield Action("examine", o)
                    yield Action("inventory")
                    examined = True
                props = CLASS_PROPERTIES.get(kind_of(o), ())
                for verb in DEVICE_VERBS:
                    if PROPERTY_OF_VERB[verb] not in props:
                        continue
                    for dev in view.devices(verb):
                        if (verb, dev) in tested:
                            continue
                        if view.at != dev:
                            yield Action("goto", dev)
                        yield Action(verb, o, dev)
                        if view.prev_outcome == "ok":
                            tested.add((verb, dev))
                if view.at != loc:
                    yield Action("goto", loc)
                yield Action("move", o, loc)
            if closed_on_arrival:
                yield Action("close", loc)
        yield DONE


class ScriptedExecutor(_Scripted):
    """Plans from believed placements, otherwise searches receptacles of the
    kinds the goal class usually occupies. Replans after any no-op.

    Receptacles listed as visited in a knowledge summary are taken as already
    searched: the executor trusts the summary to be a complete account of them.
    """

    name = "scripted-executor"

    def _script(self, ctx):
        view, goal = ctx.view, ctx.goal
        if goal is None:
            raise ValueError("the executor needs a goal")
        cls, target = goal.target_object_class, goal.target_receptacle
        searched: set = set(ctx.knowledge.visited_locations) if ctx.knowledge is not None else set()
        yield Action("look")

        def reach(loc):
            if view.at != loc:
                yield Action("goto", loc)
            if view.is_container(loc) and view.open_state.get(loc) is False:
                yield Action("open", loc)

        def spare(exclude):
            for loc in view.locations:
                if loc not in exclude and loc not in view.move_blocked:
                    return loc
            return None

        failures = 0
        while failures < 8:
            held = view.carrying
            if held is not None and kind_of(held) != cls:
                loc = view.at or spare({target})
                yield from reach(loc)
                yield Action("move", held, loc)
                if view.prev_outcome != "ok":
                    failures += 1
                    view.move_blocked.add(loc)
                continue
            if held is not None:
                flags = view.flags.get(held, set())
                for state in sorted(goal.required_state - flags):
                    verb = VERB_OF_STATE[state]
                    devs = view.devices(verb)
                    if not devs:
                        yield DONE
                        return
                    if view.at != devs[0]:
                        yield Action("goto", devs[0])
                    yield Action(verb, held, devs[0])
                if not goal.required_state <= view.flags.get(held, set()):
                    failures += 1
                    continue
                yield from reach(target)
                yield Action("move", held, target)
                if view.prev_outcome == "ok":
                    yield DONE
                    return
                failures += 1
                # target must be cleared first: park the goal object, move the blocker away
                park = spare({target})
                if park is None:
                    yield DONE
                    return
                yield from reach(park)
                yield Action("move", held, park)
                yield from reach(target)
                for blocker in list(view.contents.get(target, [])):
                    yield Action("take", blocker, target)
                    if view.carrying == blocker:
                        dump = spare({target, park})
                        yield from reach(dump)
                        yield Action("move", blocker, dump)
                    break
                yield from reach(park)
                yield Action("take", held, park)
                continue

            located = [o for o in view.known_objects
                       if kind_of(o) == cls and view.where.get(o) not in (None, target)]
            if located:
                # cheapest first: no walk if already there, no open if known open
                def cost(o):
                    loc = view.where[o]
                    return (loc != view.at) + (view.is_container(loc) and view.open_state.get(loc) is not True)
                o = min(located, key=cost)
                loc = view.where[o]
                yield from reach(loc)
                if view.where.get(o) != loc:
                    continue
                yield Action("take", o, loc)
                if view.carrying != o:
                    failures += 1
                    view.where.pop(o, None)
                continue

            by_number = sorted(view.locations, key=split_id)
            order = [l for k in CLASS_PRIORS.get(cls, []) for l in by_number if kind_of(l) == k]
            pending = [l for l in order if l not in searched and l not in view.inspected and l != target]
            if not pending:
                yield DONE
                return
            loc = pending[0]
            searched.add(loc)
            yield from reach(loc)
        yield DONE
