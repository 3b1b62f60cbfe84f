"""Hypothesis strategies shared across test modules."""
from hypothesis import strategies as st

from eccl.world.generate import generate_world
from eccl.world.types import Action, DEVICE_VERBS


@st.composite
def worlds(draw, max_locations=8, max_objects=10):
    kind = draw(st.sampled_from(["bedroom", "kitchen"]))
    nl = draw(st.integers(4, max_locations))
    no = draw(st.integers(4, max_objects))
    return generate_world(draw(st.integers(0, 2 ** 31 - 1)), nl, no, kind)


def all_actions(world) -> list:
    """The full grammar instantiated over a world's entities, legal or not."""
    locs = [l.id for l in world.locations]
    objs = [o.id for o in world.objects]
    out = [Action("look"), Action("inventory")]
    out += [Action("goto", l) for l in locs]
    out += [Action(v, l) for v in ("open", "close") for l in locs]
    out += [Action("examine", x) for x in objs + locs]
    out += [Action(v, o, l) for v in ("take", "move") + DEVICE_VERBS for o in objs for l in locs]
    return out


@st.composite
def world_and_actions(draw, max_len=40):
    w = draw(worlds())
    acts = all_actions(w)
    seq = draw(st.lists(st.sampled_from(acts), max_size=max_len))
    return w, seq
