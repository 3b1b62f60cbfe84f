"""Checkpoint construction, per-step verification and coverage scoring."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

from .world.engine import arrival
from .world.reach import enumerate_reachable
from .world.types import DEVICE_VERBS, StepRecord, Trajectory, WorldSpec

CHECKPOINT_SCHEMA = "eccl-checkpoints/v1"

# Verbs whose successful observation may reveal objects.
OBJECT_REVEALING = frozenset({"goto", "open", "examine", "take", "look"})

_MENTION = re.compile(r"\b([a-z]+ \d+)\b")


def mention_pattern(entity_id: str) -> re.Pattern:
    return re.compile(r"(?<![a-z0-9])" + re.escape(entity_id) + r"(?![0-9])", re.IGNORECASE)


@dataclass(frozen=True)
class Checkpoint:
    id: str
    category: str  # "location" | "object" | "affordance"
    target: str
    verb: Optional[str] = None
    description: Optional[str] = None

    def match_spec(self) -> dict:
        if self.category == "location":
            return {"location": self.target, "description": self.description}
        if self.category == "object":
            return {"object": self.target, "enabling_verbs": sorted(OBJECT_REVEALING)}
        return {"verb": self.verb, "target": self.target, "outcome": "ok"}


@dataclass(frozen=True)
class CheckpointSet:
    world_id: str
    checkpoints: tuple

    def __post_init__(self):
        if not self.checkpoints:
            raise ValueError("a checkpoint set needs at least one checkpoint")
        ids = [c.id for c in self.checkpoints]
        if len(ids) != len(set(ids)):
            raise ValueError("checkpoint ids must be unique")

    @property
    def M(self) -> int:
        return len(self.checkpoints)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.checkpoints]

    def to_dict(self) -> dict:
        return {
            "schema": CHECKPOINT_SCHEMA,
            "world_id": self.world_id,
            "M": self.M,
            "checkpoints": [
                {"id": c.id, "category": c.category, "match_spec": c.match_spec()}
                for c in self.checkpoints
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CheckpointSet":
        if d.get("schema") != CHECKPOINT_SCHEMA:
            raise ValueError(f"expected schema {CHECKPOINT_SCHEMA}, got {d.get('schema')!r}")
        cps = []
        for c in d["checkpoints"]:
            spec = c["match_spec"]
            if c["category"] == "location":
                cps.append(Checkpoint(c["id"], "location", spec["location"], description=spec["description"]))
            elif c["category"] == "object":
                cps.append(Checkpoint(c["id"], "object", spec["object"]))
            elif c["category"] == "affordance":
                cps.append(Checkpoint(c["id"], "affordance", spec["target"], verb=spec["verb"]))
            else:
                raise ValueError(f"unknown checkpoint category {c['category']!r}")
        return cls(d["world_id"], tuple(cps))


def build_checkpoints(world: WorldSpec) -> CheckpointSet:
    reach = enumerate_reachable(world)
    candidates: list[Checkpoint] = []
    for loc in world.locations:
        candidates.append(Checkpoint(f"location:{loc.id}", "location", loc.id, description=arrival(loc.id)))
    for o in world.objects:
        candidates.append(Checkpoint(f"object:{o.id}", "object", o.id))
    for loc in world.locations:
        if loc.container:
            for verb in ("open", "close"):
                candidates.append(Checkpoint(f"affordance:{verb}:{loc.id}", "affordance", loc.id, verb=verb))
    for o in world.objects:
        candidates.append(Checkpoint(f"affordance:take:{o.id}", "affordance", o.id, verb="take"))
    for verb in DEVICE_VERBS:
        for dev in world.devices(verb):
            candidates.append(Checkpoint(f"affordance:{verb}:{dev}", "affordance", dev, verb=verb))

    takes = {a[1] for a in reach.affordances if a[0] == "take"}
    device_use = {(a[0], a[2]) for a in reach.affordances if a[0] in DEVICE_VERBS}

    def reachable(c: Checkpoint) -> bool:
        if c.category == "location":
            return c.target in reach.locations
        if c.category == "object":
            return c.target in reach.objects
        if c.verb == "take":
            return c.target in takes
        if c.verb in DEVICE_VERBS:
            return (c.verb, c.target) in device_use
        return (c.verb, c.target, None) in reach.affordances

    unique: dict[str, Checkpoint] = {}
    for c in candidates:
        unique.setdefault(c.id, c)
    return CheckpointSet(world.world_id, tuple(c for c in unique.values() if reachable(c)))


def affordance_target(rec: StepRecord) -> Optional[str]:
    a = rec.action
    if a is None:
        return None
    if a.verb in DEVICE_VERBS:
        return a.arg2
    return a.arg1


def match_step(cp: Checkpoint, rec: StepRecord, carried_context: Optional[str] = None) -> bool:
    """Deterministic string/action matching of one checkpoint against one step."""
    if cp.category == "location":
        return cp.description.lower() in rec.observation.lower()
    if cp.category == "object":
        if rec.outcome != "ok" or rec.action is None or rec.action.verb not in OBJECT_REVEALING:
            return False
        return mention_pattern(cp.target).search(rec.observation) is not None
    if rec.outcome != "ok" or rec.action is None:
        return False
    return rec.action.verb == cp.verb and affordance_target(rec) == cp.target


@dataclass
class CoverageRecord:
    hits: dict
    M: int
    covered_count: int = 0

    def __post_init__(self):
        self.covered_count = sum(1 for v in self.hits.values() if v is not None)


def coverage(traj: Trajectory, cps: CheckpointSet) -> CoverageRecord:
    if traj.world_id != cps.world_id:
        raise ValueError(f"trajectory world {traj.world_id!r} != checkpoint world {cps.world_id!r}")
    hits: dict = {c.id: None for c in cps.checkpoints}
    carried = None
    for rec in traj.steps:
        for c in cps.checkpoints:
            if hits[c.id] is None and match_step(c, rec, carried):
                hits[c.id] = rec.index
        if rec.outcome == "ok" and rec.action is not None:
            if rec.action.verb == "take":
                carried = rec.action.arg1
            elif rec.action.verb == "move":
                carried = None
    return CoverageRecord(hits, cps.M)


def ecc(cov: CoverageRecord) -> float:
    if cov.M < 1:
        raise ValueError("ECC undefined for an empty checkpoint set")
    return cov.covered_count / cov.M


@dataclass
class CoverageTracker:
    """Streaming coverage: indexed lookups instead of a scan over every checkpoint."""

    cps: CheckpointSet
    hits: dict = field(init=False)
    covered: int = field(init=False, default=0)

    def __post_init__(self):
        self.hits = {c.id: None for c in self.cps.checkpoints}
        self._arrival = {}
        self._objects = {}
        self._afford = {}
        for c in self.cps.checkpoints:
            if c.category == "location":
                self._arrival[c.description.lower()] = c.id
            elif c.category == "object":
                self._objects[c.target.lower()] = c.id
            else:
                self._afford[(c.verb, c.target)] = c.id

    def _hit(self, cid: str, index: int) -> None:
        if self.hits[cid] is None:
            self.hits[cid] = index
            self.covered += 1

    def observe(self, rec: StepRecord) -> int:
        """Feed the next record; returns how many checkpoints it newly covered."""
        before = self.covered
        obs = rec.observation.lower()
        if "you arrive at " in obs:
            for desc, cid in self._arrival.items():
                if desc in obs:
                    self._hit(cid, rec.index)
        if rec.outcome == "ok" and rec.action is not None:
            verb = rec.action.verb
            if verb in OBJECT_REVEALING:
                for name in _MENTION.findall(obs):
                    cid = self._objects.get(name)
                    if cid is not None:
                        self._hit(cid, rec.index)
            cid = self._afford.get((verb, affordance_target(rec)))
            if cid is not None:
                self._hit(cid, rec.index)
        return self.covered - before

    def current_ecc(self) -> float:
        return self.covered / self.cps.M

    def record(self) -> CoverageRecord:
        return CoverageRecord(dict(self.hits), self.cps.M)


def incremental_tracker(cps: CheckpointSet) -> CoverageTracker:
    return CoverageTracker(cps)
