"""Running one policy for one episode."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import rng as rngmod
from .checkpoints import CheckpointSet, incremental_tracker
from .policies.features import PolicyContext
from .policies.view import AgentView
from .world.engine import check_task_success, noop_record, reset, step
from .world.parse import parse_action
from .world.types import EnvState, TaskGoal, Trajectory, WorldSpec


class EpisodeAborted(RuntimeError):
    """Transport failure of an external policy; the episode must not be scored."""


@dataclass
class Episode:
    traj: Trajectory
    final_state: EnvState
    success: bool
    decisions: list = field(default_factory=list)  # (rows, chosen) per recorded decision
    sum_log_prob: float = 0.0
    ecc: Optional[float] = None
    invalid: bool = False


def run_episode(policy, world: WorldSpec, mode: str, goal: Optional[TaskGoal] = None,
                knowledge=None, max_steps: int = 50, rng=None, seed: Optional[int] = None,
                cps: Optional[CheckpointSet] = None, state: Optional[EnvState] = None,
                observation: Optional[str] = None) -> Episode:
    """Act until ``done``, task success (act mode) or ``max_steps``.

    ``state``/``observation`` continue from an existing state instead of a reset.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if rng is None and seed is not None:
        rng = rngmod.stream(seed, "episode")
    if state is None:
        state, observation = reset(world, goal, check=False)
    else:
        state = state.copy()
        state.step_count = 0
    view = AgentView(observation, knowledge)
    ctx = PolicyContext(mode, view, goal if mode == "act" else None, knowledge)
    traj = Trajectory(world.world_id, mode, observation, [], seed, goal if mode == "act" else None)
    tracker = incremental_tracker(cps) if cps is not None else None
    ep = Episode(traj, state, False)
    policy.begin(ctx)
    try:
        for _ in range(max_steps):
            d = policy.decide(ctx, rng)
            action = d.action if d.action is not None else parse_action(d.text)
            if action is None:
                rec = noop_record(state, d.text)
            else:
                _, rec = step(state, action)
            if d.rows is not None:
                ep.decisions.append((d.rows, d.chosen))
                ep.sum_log_prob += d.log_prob
            traj.steps.append(rec)
            ctx.history.append(rec)
            view.update(rec)
            if tracker is not None:
                tracker.observe(rec)
            if mode == "act" and goal is not None and check_task_success(state, goal):
                ep.success = True
                break
            if state.terminal:
                break
    except EpisodeAborted:
        ep.invalid = True
    if tracker is not None:
        ep.ecc = tracker.current_ecc()
    return ep
