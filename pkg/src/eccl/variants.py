"""Single-axis perturbations of a base world: relocation, preconditions, distractors."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

from . import rng as rngmod
from .world.generate import class_properties
from .world.solver import check_solvable
from .world.types import ObjectSpec, TaskGoal, WorldSpec, split_id

log = logging.getLogger(__name__)

VARIANT_KINDS = ("object_relocation", "precondition_change", "distractor_injection")
AXIS_OF_KIND = {"object_relocation": "placements", "precondition_change": "flags",
                "distractor_injection": "objects"}
MAX_RESEEDS = 100
DEFAULT_DISTRACTORS = 2


class VariantError(ValueError):
    pass


@dataclass(frozen=True)
class VariantSpec:
    kind: str
    seed: int
    base_world_id: str
    perturbation_log: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if not self.perturbation_log:
            raise ValueError("a variant must record at least one edit")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "base_world_id": self.base_world_id,
                "perturbation_log": list(self.perturbation_log)}


def _rename(world: WorldSpec, suffix: str, **changes) -> WorldSpec:
    return dataclasses.replace(world, world_id=f"{world.world_id}~{suffix}", **changes)


def relocate_objects(world: WorldSpec, goal: TaskGoal, seed: int) -> tuple[WorldSpec, VariantSpec]:
    """Move every goal-class object to another receptacle (never its own, never the target)."""
    movers = [o for o in world.objects if o.cls == goal.target_object_class]
    if not movers:
        raise VariantError(f"no {goal.target_object_class} object to relocate")
    for attempt in range(MAX_RESEEDS):
        r = rngmod.stream(seed, "relocate", world.world_id, attempt)
        edits, objects = [], []
        for o in world.objects:
            if o not in movers:
                objects.append(o)
                continue
            options = [loc.id for loc in world.locations
                       if loc.id not in (o.initial_location, goal.target_receptacle)]
            if not options:
                raise VariantError(f"no alternative receptacle for {o.id}")
            dest = options[int(r.integers(len(options)))]
            objects.append(dataclasses.replace(o, initial_location=dest))
            edits.append(f"move {o.id}: {o.initial_location} -> {dest}")
        out = _rename(world, f"reloc{seed}", objects=tuple(objects))
        if check_solvable(out, goal):
            return out, VariantSpec("object_relocation", seed, world.world_id, tuple(edits))
    raise VariantError(f"relocation of {world.world_id} unsolvable after {MAX_RESEEDS} reseeds")


def perturb_preconditions(world: WorldSpec, seed: int, goal: TaskGoal | None = None,
                          allow_clear: bool = True) -> tuple[WorldSpec, VariantSpec]:
    """Flip the start state of a nonempty subset of containers; sometimes also mark
    one single-occupant receptacle as needing to be cleared before a new item fits."""
    containers = [loc.id for loc in world.locations if loc.container]
    occupancy: dict = {}
    for o in world.objects:
        occupancy[o.initial_location] = occupancy.get(o.initial_location, 0) + 1
    clearable = [loc.id for loc in world.locations if occupancy.get(loc.id) == 1 and not loc.requires_clear]
    if not containers and not (allow_clear and clearable):
        raise VariantError(f"{world.world_id} has no container or clearable receptacle")
    for attempt in range(MAX_RESEEDS):
        r = rngmod.stream(seed, "preconditions", world.world_id, attempt)
        flip: set = set()
        if containers:
            while not flip:
                flip = {c for c in containers if r.random() < 0.5}
        mark = None
        if allow_clear and clearable and (not containers or r.random() < 0.5):
            mark = clearable[int(r.integers(len(clearable)))]
        edits, locations = [], []
        for loc in world.locations:
            new = loc
            if loc.id in flip:
                new = dataclasses.replace(new, initially_open=not loc.initially_open)
                edits.append(f"{loc.id} starts {'open' if new.initially_open else 'closed'}")
            if loc.id == mark:
                new = dataclasses.replace(new, requires_clear=True)
                edits.append(f"{loc.id} must be cleared before placing")
            locations.append(new)
        out = _rename(world, f"pre{seed}", locations=tuple(locations))
        if goal is None or check_solvable(out, goal):
            return out, VariantSpec("precondition_change", seed, world.world_id, tuple(edits))
    raise VariantError(f"precondition change of {world.world_id} unsolvable after {MAX_RESEEDS} reseeds")


def inject_distractors(world: WorldSpec, goal: TaskGoal, seed: int,
                       count: int = DEFAULT_DISTRACTORS) -> tuple[WorldSpec, VariantSpec]:
    """Add ``count`` extra objects of the goal class at distinct non-target receptacles."""
    if count < 1:
        raise VariantError("distractor count must be >= 1")
    cls = goal.target_object_class
    options = [loc.id for loc in world.locations if loc.id != goal.target_receptacle]
    if len(options) < count:
        raise VariantError(f"only {len(options)} receptacles available for {count} distractors")
    r = rngmod.stream(seed, "distractors", world.world_id)
    picks = sorted(int(i) for i in r.choice(len(options), size=count, replace=False))
    numbers = [split_id(o.id)[1] for o in world.objects if o.cls == cls]
    start = max(numbers, default=0) + 1
    template = next((o for o in world.objects if o.cls == cls), None)
    props = template.properties if template is not None else class_properties(cls)
    added, edits = [], []
    for n, i in enumerate(picks):
        oid = f"{cls} {start + n}"
        added.append(ObjectSpec(oid, cls, options[i], props))
        edits.append(f"add {oid} at {options[i]}")
    out = _rename(world, f"dis{seed}", objects=world.objects + tuple(added))
    return out, VariantSpec("distractor_injection", seed, world.world_id, tuple(edits))


def structural_diff(base: WorldSpec, variant: WorldSpec) -> set:
    """Which field classes differ: placements, flags, objects, layout, devices."""
    out = set()
    if [(l.id, l.kind, l.container) for l in base.locations] != \
            [(l.id, l.kind, l.container) for l in variant.locations]:
        out.add("layout")
    elif [(l.initially_open, l.requires_clear) for l in base.locations] != \
            [(l.initially_open, l.requires_clear) for l in variant.locations]:
        out.add("flags")
    base_objs = {o.id: o for o in base.objects}
    var_objs = {o.id: o for o in variant.objects}
    if set(base_objs) - set(var_objs):
        out.add("objects")
    if set(var_objs) - set(base_objs):
        out.add("objects")
    for oid in set(base_objs) & set(var_objs):
        a, b = base_objs[oid], var_objs[oid]
        if a.initial_location != b.initial_location:
            out.add("placements")
        if (a.cls, a.properties) != (b.cls, b.properties):
            out.add("objects")
    if base.device_map != variant.device_map or base.room_kind != variant.room_kind:
        out.add("devices")
    return out


def make_variant(kind: str, world: WorldSpec, goal: TaskGoal, seed: int) -> tuple[WorldSpec, VariantSpec]:
    if kind == "object_relocation":
        return relocate_objects(world, goal, seed)
    if kind == "precondition_change":
        return perturb_preconditions(world, seed, goal)
    if kind == "distractor_injection":
        return inject_distractors(world, goal, seed)
    raise ValueError(f"unknown variant kind {kind!r}")


def build_suite(base_worlds: list, goals: list, per_variant: int = 274, seed: int = 0) -> dict:
    """Original instances plus one variant of each kind per kept pair.

    Pairs whose original or any variant cannot be made solvable are skipped
    and listed under ``skipped``.
    """
    if len(base_worlds) != len(goals):
        raise ValueError("base_worlds and goals must pair up")
    if per_variant > len(base_worlds):
        raise ValueError(f"per_variant={per_variant} exceeds {len(base_worlds)} available pairs")
    entries, skipped = [], []
    kept = 0
    for i, (world, goal) in enumerate(zip(base_worlds, goals)):
        if kept == per_variant:
            break
        if not check_solvable(world, goal):
            skipped.append({"pair": i, "world_id": world.world_id, "reason": "base unsolvable"})
            continue
        pair_entries = [{"kind": "original", "seed": None, "world": world, "goal": goal,
                         "base_world_id": world.world_id, "perturbation_log": []}]
        failed = None
        for kind in VARIANT_KINDS:
            vseed = rngmod.child_seed(seed, "suite", i, kind)
            try:
                vworld, vspec = make_variant(kind, world, goal, vseed)
            except VariantError as exc:
                failed = f"{kind}: {exc}"
                break
            if not check_solvable(vworld, goal):
                failed = f"{kind}: unsolvable"
                break
            pair_entries.append({"kind": kind, "seed": vseed, "world": vworld, "goal": goal,
                                 "base_world_id": world.world_id,
                                 "perturbation_log": list(vspec.perturbation_log)})
        if failed:
            log.warning("skipping pair %d (%s): %s", i, world.world_id, failed)
            skipped.append({"pair": i, "world_id": world.world_id, "reason": failed})
            continue
        entries.extend(pair_entries)
        kept += 1
    if kept < per_variant:
        raise ValueError(f"only {kept} usable pairs for per_variant={per_variant}")
    return {"schema": "eccl-suite/v1", "per_variant": per_variant, "seed": seed,
            "entries": entries, "skipped": skipped}


def suite_to_json_dict(suite: dict, world_paths: dict | None = None) -> dict:
    """JSON form of a suite. With ``world_paths`` (world_id -> path) entries reference files."""
    out = dict(suite)
    out["entries"] = [dict(e, world=world_paths[e["world"].world_id] if world_paths else e["world"].to_dict(),
                           goal=e["goal"].to_dict()) for e in suite["entries"]]
    return out


def suite_from_json_dict(d: dict, base_dir=None) -> dict:
    """Inverse of ``suite_to_json_dict``; string world entries are paths relative to ``base_dir``."""
    import json
    from pathlib import Path
    if d.get("schema") != "eccl-suite/v1":
        raise ValueError(f"expected schema eccl-suite/v1, got {d.get('schema')!r}")
    entries = []
    for e in d["entries"]:
        w = e["world"]
        if isinstance(w, str):
            w = json.loads((Path(base_dir or ".") / w).read_text(encoding="utf-8"))
        entries.append(dict(e, world=WorldSpec.from_dict(w), goal=TaskGoal.from_dict(e["goal"])))
    return dict(d, entries=entries)


def desk_pairs(n: int, seed: int = 0, room_kinds=("bedroom", "kitchen"),
               loc_range=(6, 12), obj_range=(6, 12)) -> tuple[list, list]:
    """Deterministic base (world, goal) pairs for suites and evaluations."""
    from .world.generate import generate_world, sample_goal
    worlds, goals = [], []
    i = 0
    while len(worlds) < n:
        r = rngmod.stream(seed, "pairs", i)
        kind = room_kinds[int(r.integers(len(room_kinds)))]
        nl = int(r.integers(loc_range[0], loc_range[1] + 1))
        no = int(r.integers(obj_range[0], obj_range[1] + 1))
        wseed = rngmod.child_seed(seed, "pairs", i, "world")
        i += 1
        w = generate_world(wseed, nl, no, kind)
        try:
            g = sample_goal(w, wseed)
        except ValueError:
            continue
        if check_solvable(w, g):
            worlds.append(w)
            goals.append(g)
    return worlds, goals
