"""Explore-then-Act: goal-free exploration, rule-based summary, knowledge-conditioned acting."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import rng as rngmod
from .checkpoints import build_checkpoints
from .policies.view import _ARRIVE, _FACING, _OPENED, parse_contents, parse_room
from .rollout import Episode, run_episode
from .world.engine import room_overview
from .world.types import DEVICE_VERBS, TaskGoal, Trajectory, WorldSpec

KNOWLEDGE_SCHEMA = "eccl-knowledge/v1"
KNOWLEDGE_BEGIN = "=== ENVIRONMENT KNOWLEDGE BEGIN ==="
KNOWLEDGE_END = "=== ENVIRONMENT KNOWLEDGE END ==="

CONSTRAINT_TAGS = ("single_item_inventory", "proximity_required", "container_gating",
                   "examine_requires_holding", "noop_error_signal")


@dataclass
class KnowledgeSummary:
    known_locations: list = field(default_factory=list)
    visited_locations: set = field(default_factory=set)
    object_placements: dict = field(default_factory=dict)
    verified_affordances: set = field(default_factory=set)
    open_states: dict = field(default_factory=dict)
    discovered_constraints: set = field(default_factory=set)
    failure_log: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)  # fact key -> step index

    def is_empty(self) -> bool:
        return not (self.visited_locations or self.object_placements or self.verified_affordances
                    or self.open_states or self.discovered_constraints or self.failure_log)

    def to_dict(self) -> dict:
        return {
            "schema": KNOWLEDGE_SCHEMA,
            "known_locations": list(self.known_locations),
            "visited_locations": sorted(self.visited_locations),
            "object_placements": dict(sorted(self.object_placements.items())),
            "verified_affordances": [list(a) for a in sorted(self.verified_affordances)],
            "open_states": dict(sorted(self.open_states.items())),
            "discovered_constraints": sorted(self.discovered_constraints),
            "failure_log": [list(f) for f in self.failure_log],
            "evidence": dict(sorted(self.evidence.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "KnowledgeSummary":
        if d.get("schema") != KNOWLEDGE_SCHEMA:
            raise ValueError(f"expected schema {KNOWLEDGE_SCHEMA}, got {d.get('schema')!r}")
        return cls(
            known_locations=list(d["known_locations"]),
            visited_locations=set(d["visited_locations"]),
            object_placements=dict(d["object_placements"]),
            verified_affordances={tuple(a) for a in d["verified_affordances"]},
            open_states=dict(d["open_states"]),
            discovered_constraints=set(d["discovered_constraints"]),
            failure_log=[tuple(f) for f in d["failure_log"]],
            evidence=dict(d["evidence"]),
        )

    def render(self) -> str:
        """Canonical text block injected into external agents' prompts."""
        lines = [KNOWLEDGE_BEGIN]
        lines.append("Locations: " + (", ".join(self.known_locations) or "none"))
        lines.append("Visited: " + (", ".join(sorted(self.visited_locations)) or "none"))
        by_loc: dict = {}
        for o, loc in sorted(self.object_placements.items()):
            by_loc.setdefault(loc, []).append(o)
        lines.append("Objects:")
        for loc in sorted(by_loc):
            lines.append(f"  {loc}: {', '.join(by_loc[loc])}")
        if self.open_states:
            lines.append("Containers: " + ", ".join(
                f"{loc} {'open' if v else 'closed'}" for loc, v in sorted(self.open_states.items())))
        if self.verified_affordances:
            lines.append("Verified actions: " + ", ".join(
                f"{v} {t}" for v, t in sorted(self.verified_affordances)))
        if self.discovered_constraints:
            lines.append("Constraints: " + ", ".join(sorted(self.discovered_constraints)))
        lines.append(KNOWLEDGE_END)
        return "\n".join(lines)


def _target(a) -> Optional[str]:
    if a.verb in DEVICE_VERBS:
        return a.arg2
    return a.arg1


def summarize(traj: Trajectory) -> KnowledgeSummary:
    """Deterministic extraction; every fact cites the step index that proves it."""
    k = KnowledgeSummary()
    k.known_locations = parse_room(traj.initial_observation) if traj.initial_observation else []
    at: Optional[str] = None
    carrying: Optional[str] = None
    seen_closed: set = set()

    def place(loc, objs, i):
        for o in objs:
            k.object_placements[o] = loc
            k.evidence[f"placement:{o}"] = i

    def receptacle_text(loc, text, i):
        is_open, objs = parse_contents(loc, text)
        if is_open is not None:
            k.open_states[loc] = is_open
            k.evidence[f"open_state:{loc}"] = i
            if not is_open:
                seen_closed.add(loc)
        if objs is not None:
            place(loc, objs, i)

    def constraint(tag, i):
        if tag not in k.discovered_constraints:
            k.discovered_constraints.add(tag)
            k.evidence[f"constraint:{tag}"] = i

    for rec in traj.steps:
        a, i = rec.action, rec.index
        if rec.outcome == "noop":
            constraint("noop_error_signal", i)
            tag = "untyped"
            if a is not None:
                if a.verb == "take" and carrying is not None:
                    tag = "single_item_inventory"
                elif a.verb == "examine" and carrying != a.arg1:
                    tag = "examine_requires_holding"
                elif a.verb in ("take", "move", "open", "close") + DEVICE_VERBS:
                    need = a.arg1 if a.verb in ("open", "close") else a.arg2
                    if need != at:
                        tag = "proximity_required"
                    elif a.verb == "take" and k.open_states.get(need) is False:
                        tag = "container_gating"
            if tag != "untyped":
                constraint(tag, i)
            k.failure_log.append((rec.action_text, tag))
            continue
        if rec.outcome != "ok" or a is None:
            continue
        v = a.verb
        if v not in ("look", "inventory", "done"):
            fact = (v, _target(a))
            if fact not in k.verified_affordances:
                k.verified_affordances.add(fact)
                k.evidence[f"affordance:{v}:{fact[1]}"] = i
        if v == "goto":
            at = a.arg1
            if at not in k.visited_locations:
                k.visited_locations.add(at)
                k.evidence[f"visited:{at}"] = i
            m = _ARRIVE.match(rec.observation)
            if m:
                receptacle_text(at, m.group(2), i)
        elif v == "look":
            m = _FACING.match(rec.observation)
            if m:
                receptacle_text(m.group(1), m.group(2), i)
        elif v == "open":
            m = _OPENED.match(rec.observation)
            if m:
                receptacle_text(a.arg1, m.group(2), i)
            if a.arg1 in seen_closed:
                constraint("container_gating", i)
        elif v == "close":
            k.open_states[a.arg1] = False
            k.evidence[f"open_state:{a.arg1}"] = i
        elif v == "take":
            carrying = a.arg1
        elif v == "move":
            carrying = None
            place(a.arg2, [a.arg1], i)
    return k


@dataclass
class EtaResult:
    exploration_traj: Trajectory
    ecc_at_budget: float
    knowledge: KnowledgeSummary
    acting_traj: Trajectory
    success: bool
    steps_to_success: Optional[int]
    acting_episode: Optional[Episode] = None

    def to_dict(self) -> dict:
        return {
            "schema": "eccl-eta/v1",
            "world_id": self.exploration_traj.world_id,
            "exploration_steps": len(self.exploration_traj),
            "ecc_at_budget": self.ecc_at_budget,
            "acting_steps": len(self.acting_traj),
            "success": self.success,
            "steps_to_success": self.steps_to_success,
            "knowledge": self.knowledge.to_dict(),
        }


def explore_phase(policy, world: WorldSpec, budget: int, rng=None, seed: Optional[int] = None,
                  cps=None) -> Episode:
    if budget < 1:
        raise ValueError("exploration budget N must be >= 1")
    return run_episode(policy, world, "explore", max_steps=budget, rng=rng, seed=seed, cps=cps)


def act_phase(policy, world: WorldSpec, goal: TaskGoal, knowledge: Optional[KnowledgeSummary],
              max_steps: int, rng=None, seed: Optional[int] = None, state=None,
              observation=None) -> Episode:
    if goal is None:
        raise ValueError("acting needs a goal")
    return run_episode(policy, world, "act", goal=goal, knowledge=knowledge, max_steps=max_steps,
                       rng=rng, seed=seed, state=state, observation=observation)


def run_eta(explorer, executor, world: WorldSpec, goal: TaskGoal, budget: int = 100,
            max_steps: int = 50, seed: int = 0, continue_in_place: bool = False,
            cps=None) -> EtaResult:
    cps = cps or build_checkpoints(world)
    exp = explore_phase(explorer, world, budget, rng=rngmod.stream(seed, "eta", "explore"),
                        seed=seed, cps=cps)
    knowledge = summarize(exp.traj)
    state = obs = None
    if continue_in_place:
        # the room layout is what the agent was shown at the start; position and hands carry over
        state, obs = exp.final_state, room_overview(world)
        if state.terminal:
            state = state.copy()
            state.terminal = False
    act = act_phase(executor, world, goal, knowledge, max_steps, rng=rngmod.stream(seed, "eta", "act"),
                    seed=seed, state=state, observation=obs)
    return EtaResult(exp.traj, exp.ecc, knowledge, act.traj, act.success,
                     len(act.traj) if act.success else None, act)


def run_direct(policy, world: WorldSpec, goal: TaskGoal, max_steps: int = 50, seed: int = 0) -> Episode:
    return act_phase(policy, world, goal, None, max_steps, rng=rngmod.stream(seed, "eta", "act"), seed=seed)
