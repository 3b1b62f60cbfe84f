"""Reference wire agents. Run as ``python -m eccl.harness.agents --reply look``."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Optional


def serve_agent(rfile, wfile, choose: Callable[[dict], Optional[str]]) -> int:
    """Answer every obs message with ``choose(msg)``; returns the number of replies."""
    n = 0
    for line in rfile:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            continue
        if not isinstance(msg, dict) or msg.get("type") != "obs":
            continue
        action = choose(msg)
        if action is None:
            continue
        wfile.write(json.dumps({"type": "act", "episode": msg.get("episode"), "action": action}) + "\n")
        wfile.flush()
        n += 1
    return n


def echo_agent(reply: str = "look") -> Callable[[dict], str]:
    return lambda msg: reply


def cycle_agent(replies: list) -> Callable[[dict], str]:
    """Per-episode cycling through ``replies`` (step index modulo length)."""
    return lambda msg: replies[int(msg.get("step", 0)) % len(replies)]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="eccl-agent", description="reference wire agent")
    p.add_argument("--reply", default="look", help="action text sent for every observation")
    args = p.parse_args(argv)
    serve_agent(sys.stdin, sys.stdout, echo_agent(args.reply))
    return 0


if __name__ == "__main__":
    sys.exit(main())
