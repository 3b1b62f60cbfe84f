"""Text -> Action parsing for the canonical command grammar."""
from __future__ import annotations

import re
from typing import Optional

from .types import Action

_E = r"([a-z]+ \d+)"
_PATTERNS = [
    (re.compile(rf"^go to {_E}$"), "goto"),
    (re.compile(rf"^open {_E}$"), "open"),
    (re.compile(rf"^close {_E}$"), "close"),
    (re.compile(rf"^take {_E} from {_E}$"), "take"),
    (re.compile(rf"^move {_E} to {_E}$"), "move"),
    (re.compile(rf"^examine {_E}$"), "examine"),
    (re.compile(rf"^heat {_E} with {_E}$"), "heat"),
    (re.compile(rf"^cool {_E} with {_E}$"), "cool"),
    (re.compile(rf"^clean {_E} with {_E}$"), "clean"),
    (re.compile(r"^(look|inventory|done)$"), None),
]


def parse_action(text: str) -> Optional[Action]:
    """Parse a command; ``None`` means the text is outside the grammar."""
    if not isinstance(text, str):
        return None
    norm = " ".join(text.lower().split())
    for pattern, verb in _PATTERNS:
        m = pattern.match(norm)
        if m is None:
            continue
        if verb is None:
            return Action(m.group(1))
        return Action(verb, *m.groups())
    return None
