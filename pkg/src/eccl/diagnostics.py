"""Behavioral diagnostics, budget curves and the E-t-A minus Dir. delta."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from .checkpoints import CheckpointSet, incremental_tracker
from .world.types import Trajectory

INFO_VERBS = frozenset({"look", "examine", "inventory"})
LOOP_MAX_LEN = 4
LOOP_REPEATS = 3       # the pattern itself plus two immediate repetitions
RECOVERY_WINDOW = 3


def _nonempty(trajs) -> list:
    trajs = list(trajs)
    if not trajs:
        raise ValueError("diagnostics need at least one trajectory")
    return trajs


def _verb(rec) -> Optional[str]:
    return rec.action.verb if rec.action is not None else None


def repeated_action_counts(traj: Trajectory) -> tuple[int, int]:
    """(repeated steps, total steps). A step repeats when an earlier step had
    the same action text and produced the same observation."""
    seen: set = set()
    hits = 0
    for rec in traj.steps:
        key = (rec.action_text, rec.observation)
        if key in seen:
            hits += 1
        seen.add(key)
    return hits, len(traj.steps)


def repeated_action_rate(trajs: Iterable[Trajectory]) -> float:
    trajs = _nonempty(trajs)
    hits = total = 0
    for t in trajs:
        h, n = repeated_action_counts(t)
        hits += h
        total += n
    return hits / total if total else 0.0


def has_loop(actions: list[str], max_len: int = LOOP_MAX_LEN, repeats: int = LOOP_REPEATS) -> bool:
    n = len(actions)
    for length in range(1, max_len + 1):
        span = length * repeats
        for start in range(0, n - span + 1):
            block = actions[start:start + length]
            if all(actions[start + k * length:start + (k + 1) * length] == block for k in range(1, repeats)):
                return True
    return False


def loop_rate(trajs: Iterable[Trajectory], max_len: int = LOOP_MAX_LEN) -> float:
    trajs = _nonempty(trajs)
    looping = sum(1 for t in trajs if has_loop([r.action_text for r in t.steps], max_len))
    return looping / len(trajs)


def info_seeking_counts(traj: Trajectory) -> tuple[int, int]:
    return sum(1 for r in traj.steps if _verb(r) in INFO_VERBS), len(traj.steps)


def info_seeking_rate(trajs: Iterable[Trajectory]) -> float:
    trajs = _nonempty(trajs)
    hits = total = 0
    for t in trajs:
        h, n = info_seeking_counts(t)
        hits += h
        total += n
    return hits / total if total else 0.0


def recovery_counts(traj: Trajectory, window: int = RECOVERY_WINDOW) -> tuple[int, int]:
    """(recovered noops, noops)."""
    steps = traj.steps
    recovered = failures = 0
    for i, rec in enumerate(steps):
        if rec.outcome != "noop":
            continue
        failures += 1
        for nxt in steps[i + 1:i + 1 + window]:
            if nxt.outcome == "ok" and nxt.action_text != rec.action_text:
                recovered += 1
                break
    return recovered, failures


def error_recovery(trajs: Iterable[Trajectory], window: int = RECOVERY_WINDOW) -> tuple[float, bool]:
    """Rate plus a flag that is True when no noop occurred (rate is then vacuously 1.0)."""
    trajs = _nonempty(trajs)
    rec = fail = 0
    for t in trajs:
        r, f = recovery_counts(t, window)
        rec += r
        fail += f
    if fail == 0:
        return 1.0, True
    return rec / fail, False


def error_recovery_rate(trajs: Iterable[Trajectory], window: int = RECOVERY_WINDOW) -> float:
    return error_recovery(trajs, window)[0]


@dataclass
class DiagnosticsReport:
    repeated_action_rate: float
    loop_rate: float
    info_seeking_rate: float
    error_recovery_rate: float
    n_episodes: int
    n_steps: int
    recovery_vacuous: bool = False
    failure_only: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> list:
        return [self.repeated_action_rate, self.loop_rate, self.info_seeking_rate,
                self.error_recovery_rate, self.n_episodes, self.n_steps]

    CSV_HEADER = ["repeated_action_rate", "loop_rate", "info_seeking_rate",
                  "error_recovery_rate", "n_episodes", "n_steps"]


def diagnose(trajs: Iterable[Trajectory], successes: Optional[Iterable[bool]] = None,
             failure_only: bool = False) -> DiagnosticsReport:
    """All four rates. With ``failure_only`` only episodes whose success flag is
    False are scored (the fail-case mode); ``successes`` is then required."""
    trajs = list(trajs)
    if failure_only:
        if successes is None:
            raise ValueError("failure_only needs per-episode success flags")
        flags = list(successes)
        if len(flags) != len(trajs):
            raise ValueError("successes and trajectories differ in length")
        trajs = [t for t, s in zip(trajs, flags) if not s]
    trajs = _nonempty(trajs)
    rate, vacuous = error_recovery(trajs)
    return DiagnosticsReport(
        repeated_action_rate=repeated_action_rate(trajs),
        loop_rate=loop_rate(trajs),
        info_seeking_rate=info_seeking_rate(trajs),
        error_recovery_rate=rate,
        n_episodes=len(trajs),
        n_steps=sum(len(t.steps) for t in trajs),
        recovery_vacuous=vacuous,
        failure_only=failure_only,
    )


@dataclass
class BudgetCurve:
    points: list = field(default_factory=list)  # (k, ecc)

    def __post_init__(self):
        ks = [k for k, _ in self.points]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("budgets must be strictly increasing")

    def to_dict(self) -> dict:
        return {"points": [[k, v] for k, v in self.points]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "ecc"])
        w.writerows(self.points)
        return buf.getvalue()


def coverage_curve(traj: Trajectory, cps: CheckpointSet, budgets: list[int]) -> BudgetCurve:
    if list(budgets) != sorted(budgets):
        raise ValueError("budgets must be sorted ascending")
    if traj.world_id != cps.world_id:
        raise ValueError(f"trajectory world {traj.world_id!r} != checkpoint world {cps.world_id!r}")
    tracker = incremental_tracker(cps)
    points = []
    fed = 0
    for k in budgets:
        while fed < min(k, len(traj.steps)):
            tracker.observe(traj.steps[fed])
            fed += 1
        points.append((int(k), tracker.current_ecc()))
    return BudgetCurve(points)


def delta_task(success_eta: float, success_dir: float) -> float:
    for name, v in (("success_eta", success_eta), ("success_dir", success_dir)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return success_eta - success_dir
