"""Group-relative policy optimisation for the linear softmax policy."""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from . import rng as rngmod
from .checkpoints import CheckpointSet, build_checkpoints, coverage, ecc
from .policies.softmax import PolicyParameters, SoftmaxPolicy, rows_to_csr
from .rollout import run_episode
from .world.engine import check_task_success
from .world.generate import generate_world, sample_goal
from .world.solver import check_solvable
from .world.types import EnvState, TaskGoal, Trajectory, WorldSpec

log = logging.getLogger(__name__)

MODES = ("task_only", "explore_only", "interleaved")
EPSILON = 1e-6


@dataclass
class TrainConfig:
    schedule_ratio: tuple = (5, 1)        # (task, explore)
    G: int = 8
    learning_rate: float = 0.05           # linear-softmax scale; LLM runs use 1e-6
    beta_kl: float = 0.01
    epsilon: float = EPSILON
    max_steps: int = 300
    rollouts_per_step: int = 128
    batch_size: int = 16
    mode: str = "interleaved"
    exploration_budget: int = 100
    act_max_steps: int = 50
    seed: int = 0
    interleave: str = "step"              # "step": homogeneous batches; "batch": mixed within a batch
    ref_refresh: int = 0                  # refresh the reference every n steps; 0 keeps it frozen
    world: dict = field(default_factory=lambda: {
        "room_kinds": ["bedroom", "kitchen"], "n_locations": [4, 6], "n_objects": [4, 8], "pool": 0})

    def __post_init__(self):
        self.schedule_ratio = tuple(int(x) for x in self.schedule_ratio)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "task_only":
            self.schedule_ratio = (max(self.schedule_ratio[0], 1), 0)
        elif self.mode == "explore_only":
            self.schedule_ratio = (0, max(self.schedule_ratio[1], 1))
        t, e = self.schedule_ratio
        if t < 0 or e < 0 or t + e == 0:
            raise ValueError("schedule_ratio needs non-negative parts with a positive sum")
        if self.mode == "interleaved" and (t == 0 or e == 0):
            raise ValueError("interleaved mode needs both ratio parts positive")
        if self.G < 2:
            raise ValueError("G must be >= 2")
        if self.rollouts_per_step != self.batch_size * self.G:
            raise ValueError("rollouts_per_step must equal batch_size * G")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.interleave not in ("step", "batch"):
            raise ValueError("interleave must be 'step' or 'batch'")
        for name in ("max_steps", "batch_size", "exploration_budget", "act_max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schedule_ratio"] = list(self.schedule_ratio)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


# -- rewards -------------------------------------------------------------------

def exploration_reward(traj: Trajectory, cps: CheckpointSet) -> float:
    return ecc(coverage(traj, cps))


def task_reward(traj: Trajectory, state_final: Optional[EnvState], goal: TaskGoal) -> float:
    if not traj.steps or state_final is None:
        return 0.0
    return 1.0 if check_task_success(state_final, goal) else 0.0


# -- advantages ----------------------------------------------------------------

@dataclass(frozen=True)
class AdvantageVector:
    values: tuple
    epsilon: float


def group_advantages(rewards, epsilon: float = EPSILON) -> AdvantageVector:
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("a group needs at least two rewards")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    # work with G*(r - mean) = G*r - sum(r): no rounded mean, so shifting every reward
    # by an exactly representable constant leaves the output bit-identical
    n = r.size
    dev = n * r - math.fsum(r)
    scaled_std = math.sqrt(float((dev ** 2).mean()))          # = n * std
    if scaled_std == 0.0:
        return AdvantageVector(tuple(0.0 for _ in r), epsilon)
    return AdvantageVector(tuple(float(x) for x in dev / (scaled_std + n * epsilon)), epsilon)


# -- groups, objective, gradient ------------------------------------------------

@dataclass
class RolloutGroup:
    context_id: str
    kind: str                 # "task" | "exploration"
    episodes: list            # Episode per member
    rewards: list

    def __post_init__(self):
        if len(self.episodes) < 2:
            raise ValueError("G must be >= 2")
        if len(self.episodes) != len(self.rewards):
            raise ValueError("one reward per rollout")

    @property
    def G(self) -> int:
        return len(self.episodes)

    @property
    def rollouts(self) -> list:
        return [(e.traj, e.sum_log_prob, r) for e, r in zip(self.episodes, self.rewards)]


@dataclass
class _Batch:
    row_ptr: np.ndarray
    feat_idx: np.ndarray
    point_ptr: np.ndarray
    chosen: np.ndarray
    coef: np.ndarray
    n_points: int


def _assemble(groups: list, epsilon: float, advantages: Optional[list] = None) -> _Batch:
    """Flatten every decision point, in (context_id, rollout index) order."""
    order = sorted(range(len(groups)), key=lambda i: groups[i].context_id)
    rows, point_sizes, chosen, coef = [], [], [], []
    n_groups = len(groups)
    for gi in order:
        g = groups[gi]
        adv = advantages[gi] if advantages is not None else group_advantages(g.rewards, epsilon).values
        for ep, a in zip(g.episodes, adv):
            c = a / (g.G * n_groups)
            for cand_rows, ch in ep.decisions:
                rows.extend(cand_rows)
                point_sizes.append(len(cand_rows))
                chosen.append(ch)
                coef.append(c)
    row_ptr, feat_idx = rows_to_csr(rows)
    point_ptr = np.zeros(len(point_sizes) + 1, dtype=np.int64)
    np.cumsum(point_sizes, out=point_ptr[1:])
    return _Batch(row_ptr, feat_idx, point_ptr, np.asarray(chosen, dtype=np.int64),
                  np.asarray(coef, dtype=np.float64), len(point_sizes))


def objective_and_grad(theta: np.ndarray, ref_theta: np.ndarray, groups: list, beta: float,
                       epsilon: float = EPSILON, advantages: Optional[list] = None):
    """J = mean_groups (1/G) sum_i A_i sum_t log pi(a_t) - beta * mean_points KL(pi || pi_ref)."""
    b = _assemble(groups, epsilon, advantages)
    if b.n_points == 0:
        return 0.0, np.zeros_like(theta), 0.0
    kl_w = beta / b.n_points
    grad, logp, kl = kernels.policy_grad(theta, ref_theta, b.row_ptr, b.feat_idx, b.point_ptr,
                                         b.chosen, b.coef, kl_w)
    mean_kl = float(kl.mean())
    j = float(np.dot(b.coef, logp)) - beta * mean_kl
    return j, grad, mean_kl


def kl_estimate(params: PolicyParameters, ref_params: PolicyParameters, group: RolloutGroup) -> float:
    _, _, kl = objective_and_grad(params.theta, ref_params.theta, [group], 1.0,
                                  advantages=[[0.0] * group.G])
    return max(kl, 0.0)


@dataclass
class UpdateResult:
    params: PolicyParameters
    grad_norm: float
    kl: float
    objective: float
    aborted: bool = False


def update_step(params: PolicyParameters, ref_params: PolicyParameters, groups: list,
                cfg: TrainConfig) -> UpdateResult:
    if not groups:
        raise ValueError("update_step needs at least one group")
    j, grad, kl = objective_and_grad(params.theta, ref_params.theta, groups, cfg.beta_kl, cfg.epsilon)
    norm = float(np.linalg.norm(grad))
    if not np.all(np.isfinite(grad)) or not math.isfinite(j):
        log.warning("non-finite gradient; step skipped")
        return UpdateResult(params, float("nan"), kl, j, aborted=True)
    new = PolicyParameters(params.theta + cfg.learning_rate * grad, params.feature_schema_version)
    return UpdateResult(new, norm, kl, j)


def schedule_kind(step_index: int, ratio: tuple) -> str:
    if step_index < 0:
        raise ValueError("step_index must be >= 0")
    task, explore = ratio
    period = task + explore
    if period <= 0:
        raise ValueError("ratio must have a positive sum")
    return "task" if step_index % period < task else "exploration"


# -- contexts --------------------------------------------------------------------

@dataclass
class Context:
    context_id: str
    world: WorldSpec
    goal: Optional[TaskGoal]
    cps: CheckpointSet


class DeskSampler:
    """Draws small generated worlds (and goals) from named random streams."""

    def __init__(self, room_kinds=("bedroom", "kitchen"), n_locations=(4, 6), n_objects=(4, 8),
                 pool: int = 0):
        self.room_kinds = tuple(room_kinds)
        self.n_locations = tuple(n_locations)
        self.n_objects = tuple(n_objects)
        self.pool = pool
        self._cache: dict = {}

    @classmethod
    def from_config(cls, d: dict) -> "DeskSampler":
        return cls(d.get("room_kinds", ("bedroom", "kitchen")), d.get("n_locations", (4, 6)),
                   d.get("n_objects", (4, 8)), d.get("pool", 0))

    def _instance(self, seed: int, index: int) -> tuple:
        key = (seed, index)
        if key not in self._cache:
            attempt = 0
            while True:
                r = rngmod.stream(seed, "sampler", index, attempt)
                kind = self.room_kinds[int(r.integers(len(self.room_kinds)))]
                nl = int(r.integers(self.n_locations[0], self.n_locations[1] + 1))
                no = int(r.integers(self.n_objects[0], self.n_objects[1] + 1))
                wseed = int(r.integers(2 ** 31))
                w = generate_world(wseed, nl, no, kind)
                try:
                    g = sample_goal(w, wseed)
                except ValueError:
                    attempt += 1
                    continue
                if check_solvable(w, g):
                    self._cache[key] = (w, g, build_checkpoints(w))
                    break
                attempt += 1
        return self._cache[key]

    def __call__(self, seed: int, step: int, slot: int, kind: str) -> Context:
        if self.pool:
            r = rngmod.stream(seed, "pick", step, slot)
            index = int(r.integers(self.pool))
        else:
            index = step * 100003 + slot
        w, g, cps = self._instance(seed, index)
        return Context(f"{w.world_id}/{kind}/{step}/{slot:04d}", w, g if kind == "task" else None, cps)


# -- training loop ------------------------------------------------------------------

@dataclass
class TrainingLog:
    records: list = field(default_factory=list)
    incidents: list = field(default_factory=list)

    def to_jsonl(self, with_timing: bool = False) -> str:
        out = []
        for r in self.records:
            r = dict(r)
            if not with_timing:
                r.pop("wall_ms", None)
            out.append(json.dumps(r, sort_keys=True))
        return "\n".join(out) + ("\n" if out else "")


def rollout_group(params: PolicyParameters, ctx: Context, kind: str, cfg: TrainConfig,
                  seed: int, step: int, slot: int) -> RolloutGroup:
    policy = SoftmaxPolicy(params)
    episodes, rewards = [], []
    for i in range(cfg.G):
        r = rngmod.stream(seed, "rollout", step, slot, i)
        if kind == "exploration":
            ep = run_episode(policy, ctx.world, "explore", max_steps=cfg.exploration_budget, rng=r,
                             cps=ctx.cps)
            reward = ep.ecc
        else:
            ep = run_episode(policy, ctx.world, "act", goal=ctx.goal, max_steps=cfg.act_max_steps,
                             rng=r, cps=ctx.cps)
            reward = 1.0 if ep.success else 0.0
        episodes.append(ep)
        rewards.append(reward)
    return RolloutGroup(ctx.context_id, kind, episodes, rewards)


def train(cfg: TrainConfig, world_sampler: Optional[Callable] = None,
          params: Optional[PolicyParameters] = None, on_step: Optional[Callable] = None,
          start_step: int = 0, ref_params: Optional[PolicyParameters] = None):
    """Run ``cfg.max_steps`` updates. Returns (final params, TrainingLog)."""
    sampler = world_sampler or DeskSampler.from_config(cfg.world)
    params = params or PolicyParameters.zeros()
    ref = ref_params or params
    tlog = TrainingLog()
    for step in range(start_step, cfg.max_steps):
        t0 = time.perf_counter()
        if cfg.ref_refresh and step > 0 and step % cfg.ref_refresh == 0:
            ref = params
        if cfg.interleave == "step":
            kinds = [schedule_kind(step, cfg.schedule_ratio)] * cfg.batch_size
        else:
            kinds = [schedule_kind(slot, cfg.schedule_ratio) for slot in range(cfg.batch_size)]
        groups = []
        for slot, kind in enumerate(kinds):
            ctx = sampler(cfg.seed, step, slot, kind)
            groups.append(rollout_group(params, ctx, kind, cfg, cfg.seed, step, slot))
        res = update_step(params, ref, groups, cfg)
        rewards = [r for g in groups for r in g.rewards]
        eccs = [e.ecc for g in groups for e in g.episodes if e.ecc is not None]
        succ = [1.0 if e.success else 0.0 for g in groups if g.kind == "task" for e in g.episodes]
        rec = {
            "step": step,
            "kind": kinds[0] if cfg.interleave == "step" else "mixed",
            "mean_reward": float(np.mean(rewards)),
            "mean_ecc": float(np.mean(eccs)) if eccs else None,
            "mean_success": float(np.mean(succ)) if succ else None,
            "mean_steps": float(np.mean([len(e.traj) for g in groups for e in g.episodes])),
            "kl": res.kl,
            "grad_norm": res.grad_norm if not res.aborted else None,
            "aborted": res.aborted,
            "wall_ms": round((time.perf_counter() - t0) * 1000.0, 3),
        }
        if res.aborted:
            tlog.incidents.append({"step": step, "reason": "non-finite gradient"})
        tlog.records.append(rec)
        params = res.params
        if on_step is not None:
            on_step(step, params, rec)
    return params, tlog


def save_checkpoint(path, params: PolicyParameters, ref: PolicyParameters, cfg: TrainConfig, step: int) -> None:
    payload = {"schema": "eccl-trainstate/v1", "step": step, "config": cfg.to_dict(),
               "params": params.to_dict(), "ref_params": ref.to_dict(),
               "rng": {"root_seed": cfg.seed, "derivation": "named streams keyed by step/slot/rollout"}}
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True)
        f.write("\n")


def load_checkpoint(path) -> tuple:
    with open(path) as f:
        d = json.load(f)
    if d.get("schema") != "eccl-trainstate/v1":
        raise ValueError(f"unexpected schema {d.get('schema')!r}")
    return (PolicyParameters.from_dict(d["params"]), PolicyParameters.from_dict(d["ref_params"]),
            TrainConfig.from_dict(d["config"]), int(d["step"]))
