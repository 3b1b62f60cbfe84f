"""Named, hierarchical random streams derived from a single root seed.

Every consumer asks for ``stream(root, "component", instance, ...)`` and gets an
independent ``numpy.random.Generator``. No module touches global random state.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode("utf-8"))


def seed_sequence(root: int, *names) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(root), spawn_key=tuple(_key(n) for n in names))


def stream(root: int, *names) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(root, *names)))


def child_seed(root: int, *names) -> int:
    """A 32-bit integer seed for APIs that want a plain int."""
    return int(seed_sequence(root, *names).generate_state(1)[0])
