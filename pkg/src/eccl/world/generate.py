"""Seeded procedural generation of household worlds and task goals."""
from __future__ import annotations

from .. import rng as rngmod
from .types import (
    CONTAINER_KINDS, DEFAULT_DEVICE_MAP, PROPERTY_OF_VERB, STATE_OF_VERB,
    LocationSpec, ObjectSpec, TaskGoal, WorldSpec, kind_of,
)

ROOM_KINDS = ("bedroom", "kitchen")

# Kind order consumed left to right; instance numbers follow first appearance.
LAYOUTS = {
    "bedroom": ["bed", "drawer", "sidetable", "garbagecan", "diningtable", "drawer",
                "drawer", "drawer", "sidetable", "cabinet", "cabinet", "countertop"],
    "kitchen": ["fridge", "sinkbasin", "coffeemachine", "countertop", "cabinet", "microwave",
                "countertop", "cabinet", "drawer", "cabinet", "countertop", "garbagecan"],
}

# Receptacle kinds an object class spawns on. The scripted executor's search prior
# is read from the same table, so unperturbed layouts always agree with it.
CLASS_PRIORS = {
    "book": ["bed", "sidetable", "diningtable", "drawer", "countertop"],
    "laptop": ["bed", "diningtable", "sidetable", "countertop"],
    "cellphone": ["bed", "sidetable", "diningtable", "drawer"],
    "pencil": ["drawer", "sidetable", "diningtable", "countertop"],
    "pillow": ["bed"],
    "cd": ["drawer", "sidetable", "diningtable", "cabinet"],
    "keychain": ["sidetable", "drawer", "diningtable"],
    "mug": ["countertop", "cabinet", "coffeemachine", "sinkbasin", "diningtable"],
    "apple": ["countertop", "fridge", "diningtable", "garbagecan"],
    "plate": ["cabinet", "countertop", "diningtable"],
    "glassbottle": ["countertop", "fridge", "cabinet"],
    "egg": ["fridge", "countertop"],
    "bowl": ["cabinet", "countertop", "fridge"],
    "saltshaker": ["countertop", "cabinet", "drawer"],
    "vase": ["cabinet", "countertop"],
    "papertowelroll": ["countertop"],
    "soapbottle": ["sinkbasin", "countertop", "cabinet"],
}

CLASS_PROPERTIES = {
    "mug": {"heatable", "coolable", "cleanable"},
    "apple": {"heatable", "coolable", "cleanable", "sliceable"},
    "plate": {"heatable", "coolable", "cleanable"},
    "glassbottle": {"coolable", "cleanable"},
    "egg": {"heatable", "coolable"},
    "bowl": {"heatable", "coolable", "cleanable"},
}

TASK_CLASSES = {
    "bedroom": ["book", "laptop", "cellphone", "pencil"],
    "kitchen": ["mug", "apple", "plate", "glassbottle"],
}
EXTRA_CLASSES = {
    "bedroom": ["pillow", "cd", "keychain", "book", "cellphone", "pencil"],
    "kitchen": ["egg", "bowl", "saltshaker", "vase", "papertowelroll", "soapbottle", "mug", "apple"],
}

CONTAINER_OPEN_PROB = 0.3

PARAM_RANGES = {"n_locations": (4, 12), "n_objects": (4, 20)}


def class_properties(cls: str) -> frozenset:
    return frozenset(CLASS_PROPERTIES.get(cls, ()))


def check_params(n_locations: int, n_objects: int, room_kind: str) -> None:
    for name, value in (("n_locations", n_locations), ("n_objects", n_objects)):
        lo, hi = PARAM_RANGES[name]
        if not isinstance(value, int) or not lo <= value <= hi:
            raise ValueError(f"{name} must be an int in [{lo}, {hi}], got {value!r}")
    if room_kind not in ROOM_KINDS:
        raise ValueError(f"room_kind must be one of {ROOM_KINDS}, got {room_kind!r}")


def generate_world(seed: int, n_locations: int = 9, n_objects: int = 12,
                   room_kind: str = "bedroom") -> WorldSpec:
    check_params(n_locations, n_objects, room_kind)
    r = rngmod.stream(seed, "world", room_kind, n_locations, n_objects)

    counts: dict[str, int] = {}
    locations = []
    for kind in LAYOUTS[room_kind][:n_locations]:
        counts[kind] = counts.get(kind, 0) + 1
        container = kind in CONTAINER_KINDS
        is_open = (not container) or bool(r.random() < CONTAINER_OPEN_PROB)
        locations.append(LocationSpec(f"{kind} {counts[kind]}", kind, container, is_open))

    by_kind: dict[str, list[str]] = {}
    for loc in locations:
        by_kind.setdefault(loc.kind, []).append(loc.id)

    def placeable(cls):
        return [lid for k in CLASS_PRIORS[cls] for lid in by_kind.get(k, [])]

    task = [c for c in TASK_CLASSES[room_kind] if placeable(c)]
    extras = [c for c in EXTRA_CLASSES[room_kind] if placeable(c)]
    classes = list(task)
    while len(classes) < n_objects:
        classes.append(extras[int(r.integers(len(extras)))])
    classes = classes[:n_objects]

    obj_counts: dict[str, int] = {}
    objects = []
    for cls in classes:
        obj_counts[cls] = obj_counts.get(cls, 0) + 1
        spots = placeable(cls)
        where = spots[int(r.integers(len(spots)))]
        objects.append(ObjectSpec(f"{cls} {obj_counts[cls]}", cls, where, class_properties(cls)))

    world_id = f"{room_kind}-s{seed}-l{n_locations}-o{n_objects}"
    return WorldSpec(world_id, int(seed), room_kind, tuple(locations), tuple(objects),
                     dict(DEFAULT_DEVICE_MAP))


def feasible_templates(world: WorldSpec) -> dict[str, list[str]]:
    """Template -> goal classes it can be instantiated with in this world."""
    present = sorted({o.cls for o in world.objects})
    out = {"pick_and_place_simple": present}
    for verb, template in (("cool", "pick_cool_then_place_in_recep"),
                           ("heat", "pick_heat_then_place_in_recep"),
                           ("clean", "pick_clean_then_place_in_recep")):
        if not world.devices(verb):
            continue
        prop = PROPERTY_OF_VERB[verb]
        classes = sorted({o.cls for o in world.objects if prop in o.properties})
        if classes:
            out[template] = classes
    return out


def sample_goal(world: WorldSpec, seed: int, classes: list[str] | None = None) -> TaskGoal:
    """Draw a goal that is not already satisfied in the initial state.

    Goal classes default to the room's task classes; targets exclude the
    template's own device and any receptacle already holding the class.
    """
    r = rngmod.stream(seed, "goal", world.world_id)
    allowed = set(classes or TASK_CLASSES.get(world.room_kind, []))
    options = {}
    for template, cls_list in feasible_templates(world).items():
        cls_list = [c for c in cls_list if c in allowed]
        if cls_list:
            options[template] = cls_list
    if not options:
        raise ValueError(f"no feasible goal in world {world.world_id}")
    templates = sorted(options)
    template = templates[int(r.integers(len(templates)))]
    cls_list = options[template]
    cls = cls_list[int(r.integers(len(cls_list)))]
    required = TaskGoal.TEMPLATES[template]
    device_kinds = {world.device_map[v] for v in (k for k, s in STATE_OF_VERB.items() if s in required)}
    holding = {o.initial_location for o in world.objects if o.cls == cls}
    targets = [loc.id for loc in world.locations
               if loc.kind not in device_kinds and loc.id not in holding
               and kind_of(loc.id) != "garbagecan"]
    if not targets:
        raise ValueError(f"no target receptacle for {cls} in {world.world_id}")
    target = targets[int(r.integers(len(targets)))]
    return TaskGoal(template, cls, target, required)
