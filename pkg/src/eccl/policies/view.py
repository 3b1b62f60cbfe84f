"""What an agent can know: a belief state rebuilt purely from observations.

Everything here is parsed from the canonical observation strings, so it works
identically on live rollouts, persisted trajectories and external agents.
"""
from __future__ import annotations

import re
from typing import Optional

from ..world.types import CONTAINER_KINDS, DEFAULT_DEVICE_MAP, DEVICE_VERBS, STATE_OF_VERB, StepRecord, kind_of

_ITEM = re.compile(r"\ba ([a-z]+ \d+)")
_ROOM = re.compile(r"you see (.*)\.$")
_ARRIVE = re.compile(r"^You arrive at ([a-z]+ \d+)\. (.*)$")
_FACING = re.compile(r"^You are facing the ([a-z]+ \d+)\. (.*)$")
_OPENED = re.compile(r"^You open the ([a-z]+ \d+)\. (.*)$")
_CARRYING = re.compile(r"^You are carrying: a ([a-z]+ \d+)\.$")


def parse_listing(text: str) -> list[str]:
    return _ITEM.findall(text)


def parse_room(observation: str) -> list[str]:
    m = _ROOM.search(observation)
    return parse_listing(m.group(1)) if m else []


def parse_contents(loc: str, text: str) -> tuple[Optional[bool], Optional[list[str]]]:
    """Parse the receptacle part of an observation -> (is_open or None, contents or None)."""
    if text.startswith(f"The {loc} is closed."):
        return False, None
    prefix_open = f"The {loc} is open. In it, you see "
    if text.startswith(prefix_open):
        return True, parse_listing(text[len(prefix_open):])
    prefix_on = f"On the {loc}, you see "
    if text.startswith(prefix_on):
        return None, parse_listing(text[len(prefix_on):])
    return None, None


class AgentView:
    """Belief state: locations, position, hand, believed placements, episode memory."""

    def __init__(self, initial_observation: str, knowledge=None):
        self.locations: list[str] = parse_room(initial_observation)
        self.location_set = set(self.locations)
        self.knowledge = knowledge
        self.at: Optional[str] = None
        self.carrying: Optional[str] = None
        self.where: dict[str, str] = {}          # believed object placement (episode evidence)
        self.known_objects: list[str] = []       # first-seen order
        self.first_seen: dict[str, int] = {}
        self.contents: dict[str, list[str]] = {}
        self.open_state: dict[str, bool] = {}
        self.visited: set[str] = set()
        self.inspected: set[str] = set()         # contents actually observed
        self.flags: dict[str, set] = {}
        self.nooped: set[str] = set()
        self.ok_texts: set[str] = set()
        self.move_blocked: set[str] = set()      # receptacles where a move nooped while at them
        self.prev_text: Optional[str] = None
        self.prev_outcome: Optional[str] = None
        self.step = 0
        self.last_obs = initial_observation
        if knowledge is not None:
            self._absorb(knowledge)

    def _absorb(self, k) -> None:
        # Knowledge seeds the belief as if it had been observed before step 1.
        for loc in k.visited_locations:
            if loc not in self.location_set:
                self.locations.append(loc)
                self.location_set.add(loc)
        for o in sorted(k.object_placements):
            loc = k.object_placements[o]
            self.where[o] = loc
            self.contents.setdefault(loc, []).append(o)
            if o not in self.first_seen:
                self.first_seen[o] = 0
                self.known_objects.append(o)
        for loc, is_open in k.open_states.items():
            self.open_state[loc] = is_open

    # -- queries -----------------------------------------------------------
    def is_container(self, loc: str) -> bool:
        return kind_of(loc) in CONTAINER_KINDS or loc in self.open_state

    def devices(self, verb: str) -> list[str]:
        kind = DEFAULT_DEVICE_MAP[verb]
        return [l for l in self.locations if kind_of(l) == kind]

    def believed(self, obj: str) -> Optional[str]:
        return self.where.get(obj)

    # -- updates -----------------------------------------------------------
    def _see(self, loc: str, objs: list[str]) -> None:
        for o, w in list(self.where.items()):
            if w == loc and o not in objs:
                del self.where[o]
        self.contents[loc] = list(objs)
        self.inspected.add(loc)
        for o in objs:
            self.where[o] = loc
            if o not in self.first_seen:
                self.first_seen[o] = self.step
                self.known_objects.append(o)

    def _receptacle_text(self, loc: str, text: str) -> None:
        is_open, objs = parse_contents(loc, text)
        if is_open is not None:
            self.open_state[loc] = is_open
        if objs is not None:
            self._see(loc, objs)

    def update(self, rec: StepRecord) -> None:
        self.step += 1
        text, obs, outcome = rec.action_text, rec.observation, rec.outcome
        a = rec.action
        if outcome == "noop":
            self.nooped.add(text)
            if a is not None and a.verb == "move" and self.at == a.arg2:
                self.move_blocked.add(a.arg2)
        elif outcome == "ok" and a is not None:
            self.ok_texts.add(text)
            v = a.verb
            if v == "goto":
                m = _ARRIVE.match(obs)
                self.at = a.arg1
                self.visited.add(a.arg1)
                if m:
                    self._receptacle_text(a.arg1, m.group(2))
            elif v == "look":
                m = _FACING.match(obs)
                if m:
                    self._receptacle_text(m.group(1), m.group(2))
                elif obs.startswith("You are in the middle of a room"):
                    for loc in parse_room(obs):
                        if loc not in self.location_set:
                            self.locations.append(loc)
                            self.location_set.add(loc)
            elif v == "open":
                m = _OPENED.match(obs)
                if m:
                    self._receptacle_text(a.arg1, m.group(2))
            elif v == "close":
                self.open_state[a.arg1] = False
            elif v == "take":
                self.carrying = a.arg1
                self.where.pop(a.arg1, None)
                if a.arg2 in self.contents and a.arg1 in self.contents[a.arg2]:
                    self.contents[a.arg2].remove(a.arg1)
                if a.arg1 not in self.first_seen:
                    self.first_seen[a.arg1] = self.step
                    self.known_objects.append(a.arg1)
            elif v == "move":
                self.carrying = None
                self.where[a.arg1] = a.arg2
                self.contents.setdefault(a.arg2, []).append(a.arg1)
            elif v in DEVICE_VERBS:
                flags = self.flags.setdefault(a.arg1, set())
                if v == "heat":
                    flags.discard("cold")
                elif v == "cool":
                    flags.discard("hot")
                flags.add(STATE_OF_VERB[v])
            elif v == "inventory":
                m = _CARRYING.match(obs)
                self.carrying = m.group(1) if m else None
        self.prev_text = text
        self.prev_outcome = outcome
        self.last_obs = obs
