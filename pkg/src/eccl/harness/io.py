"""Artifact persistence: trajectory JSONL, canonical JSON, config files."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Optional

from ..world.parse import parse_action
from ..world.types import StepRecord, TaskGoal, Trajectory

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TRAJ_SCHEMA = "eccl-traj/v1"
OUTCOMES = ("ok", "noop", "terminal")


class ArtifactError(ValueError):
    """A file on disk does not match the expected schema."""


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def write_json(path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def read_json(path, schema: Optional[str] = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if schema is not None and (not isinstance(d, dict) or d.get("schema") != schema):
        got = d.get("schema") if isinstance(d, dict) else type(d).__name__
        raise ArtifactError(f"{path}: expected schema {schema}, got {got!r}")
    return d


def read_config(path) -> dict:
    """TOML or JSON, chosen by extension."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    if path.suffix == ".toml":
        try:
            return tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ArtifactError(f"{path}: {exc}") from None
    return read_json(path)


# -- trajectories ------------------------------------------------------------------

def trajectory_lines(traj: Trajectory) -> list[str]:
    header = {"schema": TRAJ_SCHEMA, "world_id": traj.world_id, "mode": traj.mode, "seed": traj.seed,
              "initial_observation": traj.initial_observation,
              "goal": traj.goal.to_dict() if traj.goal is not None else None}
    out = [json.dumps(header, sort_keys=True, ensure_ascii=False)]
    for r in traj.steps:
        out.append(json.dumps({"i": r.index, "action": r.action_text, "obs": r.observation,
                               "outcome": r.outcome}, sort_keys=True, ensure_ascii=False))
    return out


def persist_trajectory(traj: Trajectory, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(trajectory_lines(traj)) + "\n", encoding="utf-8")
    return path


def _step_from(d: Any, lineno: int, where: str) -> StepRecord:
    if not isinstance(d, dict):
        raise ArtifactError(f"{where}:{lineno}: step line must be a JSON object")
    missing = {"i", "action", "obs", "outcome"} - set(d)
    if missing:
        raise ArtifactError(f"{where}:{lineno}: missing fields {sorted(missing)}")
    if not isinstance(d["i"], int) or isinstance(d["i"], bool):
        raise ArtifactError(f"{where}:{lineno}: 'i' must be an integer")
    if not isinstance(d["action"], str) or not isinstance(d["obs"], str):
        raise ArtifactError(f"{where}:{lineno}: 'action' and 'obs' must be strings")
    if d["outcome"] not in OUTCOMES:
        raise ArtifactError(f"{where}:{lineno}: outcome {d['outcome']!r} not in {OUTCOMES}")
    return StepRecord(d["i"], d["action"], parse_action(d["action"]), d["obs"], d["outcome"])


def parse_trajectory(text: str, where: str = "<string>") -> Trajectory:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ArtifactError(f"{where}:1: missing header line")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{where}:1: header is not JSON ({exc.msg})") from None
    if not isinstance(head, dict) or head.get("schema") != TRAJ_SCHEMA:
        raise ArtifactError(f"{where}:1: expected schema {TRAJ_SCHEMA}")
    for key in ("world_id", "mode"):
        if key not in head:
            raise ArtifactError(f"{where}:1: header lacks {key!r}")
    goal = TaskGoal.from_dict(head["goal"]) if head.get("goal") else None
    traj = Trajectory(head["world_id"], head["mode"], head.get("initial_observation", ""), [],
                      head.get("seed"), goal)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            # tolerate a blank final line only
            if any(rest.strip() for rest in lines[lineno:]):
                raise ArtifactError(f"{where}:{lineno}: blank line inside trajectory")
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{where}:{lineno}: malformed step line ({exc.msg})") from None
        traj.steps.append(_step_from(d, lineno, where))
    return traj


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    return parse_trajectory(path.read_text(encoding="utf-8"), str(path))


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
