"""Core data types of the household text world."""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

WORLD_SCHEMA = "eccl-world/v1"
STATE_SCHEMA = "eccl-state/v1"

LOCATION_KINDS = (
    "bed", "diningtable", "drawer", "sidetable", "cabinet", "countertop",
    "fridge", "garbagecan", "coffeemachine", "sinkbasin", "microwave",
)
CONTAINER_KINDS = frozenset({"drawer", "cabinet", "fridge", "microwave"})

VERBS = (
    "look", "inventory", "goto", "open", "close", "take", "move",
    "examine", "heat", "cool", "clean", "done",
)
NULLARY = frozenset({"look", "inventory", "done"})
UNARY = frozenset({"goto", "open", "close", "examine"})
BINARY = frozenset({"take", "move", "heat", "cool", "clean"})
DEVICE_VERBS = ("heat", "cool", "clean")

DEFAULT_DEVICE_MAP = {"heat": "microwave", "cool": "fridge", "clean": "sinkbasin"}
STATE_OF_VERB = {"heat": "hot", "cool": "cold", "clean": "clean"}
PROPERTY_OF_VERB = {"heat": "heatable", "cool": "coolable", "clean": "cleanable"}
VERB_OF_STATE = {v: k for k, v in STATE_OF_VERB.items()}
PROPERTIES = frozenset({"heatable", "coolable", "cleanable", "sliceable"})

NOTHING_HAPPENS = "Nothing happens."

_ID_RE = re.compile(r"^([a-z]+) (\d+)$")


def split_id(entity_id: str) -> tuple[str, int]:
    """``"drawer 3"`` -> ``("drawer", 3)``."""
    m = _ID_RE.match(entity_id)
    if not m:
        raise ValueError(f"malformed entity id {entity_id!r}")
    return m.group(1), int(m.group(2))


def kind_of(entity_id: str) -> str:
    return entity_id.rsplit(" ", 1)[0]


def display_order(ids) -> list[str]:
    """Listing order used in observations: by kind, then instance number descending."""
    return sorted(ids, key=lambda i: (split_id(i)[0], -split_id(i)[1]))


@dataclass(frozen=True)
class LocationSpec:
    id: str
    kind: str
    container: bool
    initially_open: bool = True
    requires_clear: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id, "kind": self.kind, "container": self.container,
            "initially_open": self.initially_open, "requires_clear": self.requires_clear,
        }


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    cls: str
    initial_location: str
    properties: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {
            "id": self.id, "class": self.cls, "initial_location": self.initial_location,
            "properties": sorted(self.properties),
        }


@dataclass(frozen=True)
class WorldSpec:
    world_id: str
    seed: int
    room_kind: str
    locations: tuple
    objects: tuple
    device_map: dict = field(default_factory=lambda: dict(DEFAULT_DEVICE_MAP))

    def __post_init__(self):
        ids = [loc.id for loc in self.locations]
        if len(set(ids)) != len(ids):
            raise ValueError("location ids must be unique")
        obj_ids = [o.id for o in self.objects]
        if len(set(obj_ids)) != len(obj_ids):
            raise ValueError("object ids must be unique")
        known = set(ids)
        for o in self.objects:
            if o.initial_location not in known:
                raise ValueError(f"object {o.id} placed at unknown location {o.initial_location}")
            if not o.properties <= PROPERTIES:
                raise ValueError(f"object {o.id} has unknown properties {set(o.properties) - PROPERTIES}")
        for loc in self.locations:
            if loc.kind not in LOCATION_KINDS:
                raise ValueError(f"unknown location kind {loc.kind!r}")
            if not loc.container and not loc.initially_open:
                raise ValueError(f"non-container {loc.id} must be initially open")
        if not set(self.device_map) <= set(DEVICE_VERBS):
            raise ValueError("device_map verbs must be within heat/cool/clean")

    @cached_property
    def location_by_id(self) -> dict:
        return {loc.id: loc for loc in self.locations}

    @cached_property
    def object_by_id(self) -> dict:
        return {o.id: o for o in self.objects}

    @property
    def location_ids(self) -> list[str]:
        return [loc.id for loc in self.locations]

    @property
    def containers(self) -> list[str]:
        return [loc.id for loc in self.locations if loc.container]

    def devices(self, verb: str) -> list[str]:
        kind = self.device_map.get(verb)
        return [loc.id for loc in self.locations if loc.kind == kind]

    def to_dict(self) -> dict:
        return {
            "schema": WORLD_SCHEMA,
            "world_id": self.world_id,
            "seed": self.seed,
            "room_kind": self.room_kind,
            "locations": [loc.to_dict() for loc in self.locations],
            "objects": [o.to_dict() for o in self.objects],
            "device_map": dict(sorted(self.device_map.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "WorldSpec":
        if d.get("schema") != WORLD_SCHEMA:
            raise ValueError(f"expected schema {WORLD_SCHEMA}, got {d.get('schema')!r}")
        return cls(
            world_id=d["world_id"],
            seed=int(d["seed"]),
            room_kind=d["room_kind"],
            locations=tuple(
                LocationSpec(x["id"], x["kind"], bool(x["container"]), bool(x["initially_open"]),
                             bool(x.get("requires_clear", False)))
                for x in d["locations"]
            ),
            objects=tuple(
                ObjectSpec(x["id"], x["class"], x["initial_location"], frozenset(x["properties"]))
                for x in d["objects"]
            ),
            device_map=dict(d["device_map"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "WorldSpec":
        return cls.from_dict(json.loads(text))


@dataclass
class EnvState:
    world: WorldSpec
    agent_location: Optional[str]
    carrying: Optional[str]
    object_locations: dict
    container_open: dict
    object_state: dict
    step_count: int = 0
    terminal: bool = False

    def copy(self) -> "EnvState":
        return EnvState(
            world=self.world,
            agent_location=self.agent_location,
            carrying=self.carrying,
            object_locations=dict(self.object_locations),
            container_open=dict(self.container_open),
            object_state={k: set(v) for k, v in self.object_state.items()},
            step_count=self.step_count,
            terminal=self.terminal,
        )

    def snapshot(self) -> dict:
        """Everything except ``step_count``; used for no-op purity checks."""
        return {
            "agent_location": self.agent_location,
            "carrying": self.carrying,
            "object_locations": dict(self.object_locations),
            "container_open": dict(self.container_open),
            "object_state": {k: sorted(v) for k, v in self.object_state.items()},
            "terminal": self.terminal,
        }

    def objects_at(self, loc: str) -> list[str]:
        return [o for o, where in self.object_locations.items() if where == loc]

    def to_dict(self) -> dict:
        d = self.snapshot()
        d["schema"] = STATE_SCHEMA
        d["world_id"] = self.world.world_id
        d["step_count"] = self.step_count
        return d

    @classmethod
    def from_dict(cls, d: dict, world: WorldSpec) -> "EnvState":
        if d.get("schema") != STATE_SCHEMA:
            raise ValueError(f"expected schema {STATE_SCHEMA}, got {d.get('schema')!r}")
        if d["world_id"] != world.world_id:
            raise ValueError("state snapshot belongs to a different world")
        return cls(
            world=world,
            agent_location=d["agent_location"],
            carrying=d["carrying"],
            object_locations=dict(d["object_locations"]),
            container_open=dict(d["container_open"]),
            object_state={k: set(v) for k, v in d["object_state"].items()},
            step_count=int(d["step_count"]),
            terminal=bool(d["terminal"]),
        )


@dataclass(frozen=True)
class Action:
    verb: str
    arg1: Optional[str] = None
    arg2: Optional[str] = None

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValueError(f"unknown verb {self.verb!r}")
        n = (self.arg1 is not None) + (self.arg2 is not None)
        want = 0 if self.verb in NULLARY else 1 if self.verb in UNARY else 2
        if n != want or (self.arg1 is None and self.arg2 is not None):
            raise ValueError(f"verb {self.verb!r} takes {want} argument(s)")

    @property
    def text(self) -> str:
        v = self.verb
        if v in NULLARY:
            return v
        if v == "goto":
            return f"go to {self.arg1}"
        if v in UNARY:
            return f"{v} {self.arg1}"
        if v == "take":
            return f"take {self.arg1} from {self.arg2}"
        if v == "move":
            return f"move {self.arg1} to {self.arg2}"
        return f"{v} {self.arg1} with {self.arg2}"

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class StepRecord:
    index: int
    action_text: str
    action: Optional[Action]
    observation: str
    outcome: str  # "ok" | "noop" | "terminal"


@dataclass(frozen=True)
class TaskGoal:
    template: str
    target_object_class: str
    target_receptacle: str
    required_state: frozenset = frozenset()

    TEMPLATES = {
        "pick_and_place_simple": frozenset(),
        "pick_cool_then_place_in_recep": frozenset({"cold"}),
        "pick_heat_then_place_in_recep": frozenset({"hot"}),
        "pick_clean_then_place_in_recep": frozenset({"clean"}),
    }

    def __post_init__(self):
        want = self.TEMPLATES.get(self.template)
        if want is None:
            raise ValueError(f"unknown goal template {self.template!r}")
        if frozenset(self.required_state) != want:
            raise ValueError(f"template {self.template} requires state {sorted(want)}")

    @classmethod
    def make(cls, template: str, cls_name: str, receptacle: str) -> "TaskGoal":
        return cls(template, cls_name, receptacle, cls.TEMPLATES[template])

    @property
    def text(self) -> str:
        adjective = {"cold": "cool ", "hot": "hot ", "clean": "clean "}
        state = "".join(adjective[s] for s in sorted(self.required_state))
        return f"put a {state}{self.target_object_class} on {self.target_receptacle}"

    def to_dict(self) -> dict:
        return {
            "schema": "eccl-goal/v1",
            "template": self.template,
            "target_object_class": self.target_object_class,
            "target_receptacle": self.target_receptacle,
            "required_state": sorted(self.required_state),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskGoal":
        if d.get("schema", "eccl-goal/v1") != "eccl-goal/v1":
            raise ValueError(f"unexpected goal schema {d.get('schema')!r}")
        return cls(d["template"], d["target_object_class"], d["target_receptacle"],
                   frozenset(d["required_state"]))


@dataclass
class Trajectory:
    world_id: str
    mode: str  # "explore" | "act"
    initial_observation: str = ""
    steps: list = field(default_factory=list)
    seed: Optional[int] = None
    goal: Optional[TaskGoal] = None

    def __len__(self) -> int:
        return len(self.steps)

    def prefix(self, k: int) -> "Trajectory":
        t = copy.copy(self)
        t.steps = list(self.steps[:k])
        return t
