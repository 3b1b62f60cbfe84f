"""Batch evaluation of explorer/executor pairs; produces ``eccl-results/v1`` payloads."""
from __future__ import annotations

from typing import Optional

from .. import rng as rngmod
from ..checkpoints import build_checkpoints
from ..diagnostics import coverage_curve, diagnose
from ..eta import run_direct, run_eta
from ..policies import PolicyParameters, RandomPolicy, SoftmaxPolicy, scripted_executor, scripted_explorer
from .io import read_json
from .report import RESULTS_SCHEMA

POLICY_KINDS = ("scripted", "random", "softmax:<params.json>", "greedy:<params.json>")


def load_params(path) -> PolicyParameters:
    return PolicyParameters.from_dict(read_json(path, "eccl-params/v1"))


class PolicySpec:
    """Parsed policy selector, e.g. ``scripted`` or ``greedy:run/params.json``."""

    def __init__(self, text: str):
        kind, _, arg = text.partition(":")
        if kind not in ("scripted", "random", "softmax", "greedy"):
            raise ValueError(f"unknown policy {text!r}; expected one of {POLICY_KINDS}")
        if kind in ("softmax", "greedy") and not arg:
            raise ValueError(f"policy {kind} needs a parameter file, e.g. {kind}:params.json")
        self.text = text
        self.kind = kind
        self.params = load_params(arg) if arg else None

    @classmethod
    def from_params(cls, params: PolicyParameters, greedy: bool = False) -> "PolicySpec":
        spec = cls.__new__(cls)
        spec.kind = "greedy" if greedy else "softmax"
        spec.text = f"{spec.kind}:<memory>"
        spec.params = params
        return spec

    def make(self, role: str):
        if self.kind == "scripted":
            return scripted_explorer() if role == "explore" else scripted_executor()
        if self.kind == "random":
            return RandomPolicy()
        return SoftmaxPolicy(self.params, greedy=self.kind == "greedy")

    def __repr__(self) -> str:
        return f"PolicySpec({self.text!r})"


def instance_seed(root: int, index: int) -> int:
    return rngmod.child_seed(root, "instance", index)


def evaluate(instances: list, explorer: PolicySpec, executor: PolicySpec, budget: int = 100,
             max_steps: int = 50, seed: int = 0, condition: str = "eval", with_direct: bool = True,
             budgets: Optional[list] = None, keep_trajectories: bool = False,
             continue_in_place: bool = False) -> dict:
    """``instances``: list of dicts with ``world``, ``goal`` and optional ``variant_kind``."""
    rows, direct_trajs, direct_ok, curves, trajs = [], [], [], [], []
    for i, inst in enumerate(instances):
        world, goal = inst["world"], inst["goal"]
        s = instance_seed(seed, i)
        cps = build_checkpoints(world)
        res = run_eta(explorer.make("explore"), executor.make("act"), world, goal, budget, max_steps,
                      seed=s, continue_in_place=continue_in_place, cps=cps)
        row = {"index": i, "world_id": world.world_id, "variant_kind": inst.get("variant_kind"),
               "success_eta": 1.0 if res.success else 0.0, "steps_eta": len(res.acting_traj),
               "ecc": res.ecc_at_budget, "explore_steps": len(res.exploration_traj)}
        if budgets:
            curves.append(coverage_curve(res.exploration_traj, cps, budgets).points)
        if with_direct:
            d = run_direct(executor.make("act"), world, goal, max_steps, seed=s)
            row["success_dir"] = 1.0 if d.success else 0.0
            row["steps_dir"] = len(d.traj)
            direct_trajs.append(d.traj)
            direct_ok.append(d.success)
            if keep_trajectories:
                trajs.append(("direct", i, d.traj))
        if keep_trajectories:
            trajs.append(("explore", i, res.exploration_traj))
            trajs.append(("act", i, res.acting_traj))
        rows.append(row)
    out = {"schema": RESULTS_SCHEMA, "condition": condition, "kind": "eta",
           "explorer": explorer.text, "executor": executor.text, "budget": budget,
           "max_steps": max_steps, "seed": seed, "instances": rows}
    if budgets:
        out["budget_curves"] = [[list(p) for p in c] for c in curves]
    if direct_trajs and not all(direct_ok):
        out["diagnostics"] = diagnose(direct_trajs, direct_ok, failure_only=True).to_dict()
    if keep_trajectories:
        out["_trajectories"] = trajs
    return out


def direct_episodes(instances: list, policy: PolicySpec, max_steps: int, seed: int = 0) -> list:
    """(trajectory, success) per instance, same per-instance seeds as ``evaluate``."""
    out = []
    for i, inst in enumerate(instances):
        ep = run_direct(policy.make("act"), inst["world"], inst["goal"], max_steps, seed=instance_seed(seed, i))
        out.append((ep.traj, ep.success))
    return out
