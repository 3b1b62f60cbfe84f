"""Hand-built reference instances: a nine-receptacle bedroom and a cool-mug kitchen."""
from __future__ import annotations

from .generate import class_properties
from .types import CONTAINER_KINDS, LocationSpec, ObjectSpec, TaskGoal, WorldSpec


def _locations(ids, open_ids=()) -> tuple:
    out = []
    for lid in ids:
        kind = lid.split()[0]
        container = kind in CONTAINER_KINDS
        out.append(LocationSpec(lid, kind, container, (not container) or lid in open_ids))
    return tuple(out)


def _objects(placement: dict) -> tuple:
    return tuple(ObjectSpec(o, o.split()[0], loc, class_properties(o.split()[0]))
                 for loc, objs in placement.items() for o in objs)


def reference_bedroom() -> WorldSpec:
    locs = _locations(["bed 1", "diningtable 1", "drawer 1", "drawer 2", "drawer 3", "drawer 4",
                       "garbagecan 1", "sidetable 1", "sidetable 2"])
    objs = _objects({
        "bed 1": ["book 1", "laptop 1", "pillow 1", "pillow 2"],
        "diningtable 1": ["cd 2", "cellphone 1", "cellphone 3", "mug 1", "keychain 1"],
        "drawer 1": ["pencil 2"],
        "sidetable 1": ["pencil 1"],
        "sidetable 2": ["cellphone 2"],
    })
    return WorldSpec("reference-bedroom", 0, "bedroom", locs, objs)


def reference_bedroom_goal() -> TaskGoal:
    return TaskGoal.make("pick_and_place_simple", "book", "sidetable 1")


def reference_kitchen() -> WorldSpec:
    locs = _locations([f"cabinet {i}" for i in range(1, 7)]
                      + ["coffeemachine 1", "countertop 1", "countertop 2", "countertop 3",
                         "drawer 1", "drawer 2", "fridge 1", "garbagecan 1", "microwave 1",
                         "sinkbasin 1"])
    objs = _objects({
        "countertop 1": ["glassbottle 2", "mug 1", "papertowelroll 1"],
        "fridge 1": ["apple 1", "bowl 1", "egg 1"],
        "cabinet 1": ["vase 1"],
        "cabinet 2": ["glassbottle 1", "saltshaker 1", "vase 2"],
        "cabinet 3": ["plate 1"],
        "cabinet 4": ["saltshaker 2"],
        "cabinet 5": ["soapbottle 1"],
        "countertop 2": ["apple 2"],
    })
    return WorldSpec("reference-kitchen", 0, "kitchen", locs, objs)


def reference_kitchen_goal() -> TaskGoal:
    return TaskGoal.make("pick_cool_then_place_in_recep", "mug", "coffeemachine 1")
