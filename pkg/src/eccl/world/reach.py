"""Reachability closure over positions and legal interactions."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .types import DEVICE_VERBS, PROPERTY_OF_VERB, Action, WorldSpec


@dataclass(frozen=True)
class Reachable:
    locations: frozenset
    objects: frozenset
    affordances: frozenset  # (verb, arg1, arg2) triples

    def as_triples(self) -> set:
        """Flat ``(location, object, affordance)`` view: one triple per fact, unused slots None."""
        out = {(l, None, None) for l in self.locations}
        out |= {(None, o, None) for o in self.objects}
        out |= {(None, None, a) for a in self.affordances}
        return out


def descriptor(action: Action) -> tuple:
    return (action.verb, action.arg1, action.arg2)


def enumerate_reachable(world: WorldSpec) -> Reachable:
    """Worklist closure of facts reachable from the initial state.

    Facts are ``("stand", loc)``, ``("access", loc)`` (contents visible and
    usable), ``("see", obj)``, ``("hold", obj)`` and ``("clear", loc)``. Rules
    fire in FIFO order until no new fact appears; every rule mirrors one
    precondition of the engine.
    """
    locs = world.location_by_id
    facts: set = set()
    queue: deque = deque()
    affordances: set = {("look", None, None), ("inventory", None, None), ("done", None, None)}

    def add(fact):
        if fact not in facts:
            facts.add(fact)
            queue.append(fact)

    for loc in world.locations:
        add(("stand", loc.id))

    def occupants(loc_id):
        return [o.id for o in world.objects if o.initial_location == loc_id]

    def spare_exists(loc_id):
        return any(l.id != loc_id and not l.requires_clear for l in world.locations)

    changed = True
    while changed:
        changed = False
        while queue:
            kind, x = queue.popleft()
            if kind == "stand":
                affordances.add(("goto", x, None))
                loc = locs[x]
                if loc.container:
                    affordances.add(("open", x, None))
                    affordances.add(("close", x, None))
                add(("access", x))
            elif kind == "access":
                for o in occupants(x):
                    add(("see", o))
                    add(("hold", o))
            elif kind == "hold":
                affordances.add(("take", x, None))
                affordances.add(("examine", x, None))
        # Second-order rules: moves into cleared receptacles and device use.
        for loc in world.locations:
            if ("access", loc.id) not in facts:
                continue
            blockers = occupants(loc.id)
            cleared = (not loc.requires_clear or not blockers
                       or (all(("hold", b) in facts for b in blockers) and spare_exists(loc.id)))
            if cleared and ("clear", loc.id) not in facts:
                add(("clear", loc.id))
                changed = True
        for o in world.objects:
            if ("hold", o.id) not in facts:
                continue
            for loc in world.locations:
                if ("clear", loc.id) in facts:
                    affordances.add(("move", o.id, loc.id))
            for verb in DEVICE_VERBS:
                if PROPERTY_OF_VERB[verb] not in o.properties:
                    continue
                for dev in world.devices(verb):
                    if ("stand", dev) in facts:
                        affordances.add((verb, o.id, dev))

    # take affordances carry their source receptacle, which can be any accessible one
    takes = {a for a in affordances if a[0] == "take"}
    affordances -= takes
    for _, o, _ in takes:
        for loc in world.locations:
            if ("access", loc.id) in facts:
                affordances.add(("take", o, loc.id))

    return Reachable(
        locations=frozenset(x for k, x in facts if k == "stand"),
        objects=frozenset(x for k, x in facts if k == "see"),
        affordances=frozenset(affordances),
    )
