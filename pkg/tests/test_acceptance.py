"""Acceptance criteria 1-11. Each test carries a ``criterion`` mark; conftest prints one
PASS/FAIL line per criterion at the end of the run.

The training criteria (5, 6, 9) share one module-scoped sweep: four schedule
configurations x three seeds, 200 GRPO steps each, from ``configs/desk_*.toml``.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from eccl import rng as rngmod
from eccl.checkpoints import build_checkpoints, coverage, incremental_tracker
from eccl.diagnostics import diagnose
from eccl.eta import run_direct, run_eta
from eccl.grpo import DeskSampler, TrainConfig, group_advantages, objective_and_grad, train
from eccl.harness.io import read_config
from eccl.policies import PolicyParameters, RandomPolicy, SoftmaxPolicy, scripted_executor, scripted_explorer
from eccl.rollout import run_episode
from eccl.variants import AXIS_OF_KIND, build_suite, desk_pairs, structural_diff
from eccl.world.generate import generate_world
from eccl.world.solver import check_solvable
from grpo_cases import fd_relative_error, random_groups
from oracles import advantages as oracle_advantages, coverage_hits
from pipeline import full_pipeline, snapshot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SWEEP = {"explore_only": "desk_explore_only.toml", "1:1": "desk_interleaved_1to1.toml",
         "5:1": "desk_interleaved_5to1.toml", "task_only": "desk_task_only.toml"}
SEEDS = (0, 1, 2)
EXPLORATION_TRAINED = "5:1"
HELD_OUT_SEED = 1_000_003
SUITE_SEED = 0


def _detail(record_property, text):
    record_property("detail", text)


# -- 1 ----------------------------------------------------------------------------------

@pytest.mark.criterion(1, "ECC tracker equals batch coverage on every prefix")
def test_c01_tracker_oracle_equivalence(record_property):
    t0 = time.perf_counter()
    prefixes = mismatches = 0
    for s in range(200):
        w = generate_world(s, 4 + s % 9, 4 + (s * 7) % 17, ("bedroom", "kitchen")[s % 2])
        cps = build_checkpoints(w)
        traj = run_episode(RandomPolicy(), w, "explore", max_steps=40,
                           rng=rngmod.stream(s, "acceptance", "c1")).traj
        tr = incremental_tracker(cps)
        for k, rec in enumerate(traj.steps, 1):
            tr.observe(rec)
            prefixes += 1
            mismatches += tr.hits != coverage(traj.prefix(k), cps).hits
        mismatches += coverage(traj, cps).hits != coverage_hits(traj.steps, cps.checkpoints)
    dt = time.perf_counter() - t0
    _detail(record_property, f"{prefixes} prefixes over 200 pairs, {mismatches} mismatches, {dt:.1f}s")
    assert mismatches == 0
    assert dt < 30


# -- 2 ----------------------------------------------------------------------------------

@pytest.mark.criterion(2, "group-relative advantage algebra")
def test_c02_advantage_algebra(record_property):
    t0 = time.perf_counter()
    r = np.random.default_rng(2)
    worst_mean = worst_oracle = 0.0
    nonzero_equal = shift_diffs = 0
    for _ in range(1000):
        G = int(r.integers(2, 17))
        rewards = [float(x) for x in r.normal(size=G) * r.uniform(0.01, 10)]
        a = group_advantages(rewards).values
        worst_mean = max(worst_mean, abs(sum(a)) / G)
        worst_oracle = max(worst_oracle, max(abs(x - y) for x, y in zip(a, oracle_advantages(rewards))))
        const = float(r.normal())
        nonzero_equal += group_advantages([const] * G).values != (0.0,) * G
        # shift on an exactly representable grid, so the shifted rewards carry no rounding
        grid = [float(k) / 64 for k in r.integers(-640, 641, size=G)]
        c = float(r.integers(-640, 641)) / 64
        shift_diffs += group_advantages(grid).values != group_advantages([x + c for x in grid]).values
    dt = time.perf_counter() - t0
    _detail(record_property, f"max |mean| {worst_mean:.1e}, max |oracle diff| {worst_oracle:.1e}, "
                             f"{nonzero_equal} non-zero constant groups, {shift_diffs} shift mismatches, {dt:.2f}s")
    assert worst_mean < 1e-9
    assert nonzero_equal == 0
    assert shift_diffs == 0
    assert worst_oracle <= 1e-12
    assert dt < 5


# -- 3 ----------------------------------------------------------------------------------

@pytest.mark.criterion(3, "analytic policy gradient vs central differences")
def test_c03_gradient_check(record_property):
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(50):
        theta, ref, groups = random_groups(10_000 + s)
        _, grad, _ = objective_and_grad(theta, ref, groups, 0.05)
        worst = max(worst, fd_relative_error(theta, ref, groups, 0.05, grad, h=1e-5))
    dt = time.perf_counter() - t0
    _detail(record_property, f"max relative error {worst:.2e} over 50 groups, {dt:.1f}s")
    assert worst < 1e-4
    assert dt < 60


# -- 4 ----------------------------------------------------------------------------------

@pytest.mark.criterion(4, "scripted explorer reaches full coverage within 100 steps")
def test_c04_scripted_explorer_completeness(record_property):
    t0 = time.perf_counter()
    short, longest = [], 0
    for s in range(100):
        w = generate_world(50_000 + s, 4 + s % 9, 4 + s % 17, ("bedroom", "kitchen")[s % 2])
        ep = run_episode(scripted_explorer(), w, "explore", max_steps=100, cps=build_checkpoints(w))
        longest = max(longest, len(ep.traj))
        if ep.ecc != 1.0:
            short.append((w.world_id, ep.ecc))
    dt = time.perf_counter() - t0
    _detail(record_property, f"{100 - len(short)}/100 worlds at ECC 1.0, longest run {longest} steps, {dt:.1f}s")
    assert short == []
    assert dt < 60


# -- shared training sweep ------------------------------------------------------------------

def _config(name: str, seed: int) -> TrainConfig:
    return TrainConfig.from_dict(dict(read_config(CONFIGS / SWEEP[name])["train"], seed=seed))


@pytest.fixture(scope="module")
def sweep():
    """{(config, seed): (params, log)} plus wall time per config."""
    out, wall = {}, {name: 0.0 for name in SWEEP}
    for seed in SEEDS:
        for name in SWEEP:
            t0 = time.perf_counter()
            out[(name, seed)] = train(_config(name, seed))
            wall[name] += time.perf_counter() - t0
    return out, wall


def _held_out_mean(params: PolicyParameters, kind: str, cfg: TrainConfig, n: int = 60) -> float:
    sampler = DeskSampler.from_config(cfg.world)
    policy = SoftmaxPolicy(params)
    vals = []
    for slot in range(n):
        ctx = sampler(HELD_OUT_SEED, 0, slot, kind)
        for rep in range(2):
            r = rngmod.stream(HELD_OUT_SEED, "held-out", slot, rep)
            if kind == "exploration":
                ep = run_episode(policy, ctx.world, "explore", max_steps=cfg.exploration_budget, rng=r, cps=ctx.cps)
                vals.append(ep.ecc)
            else:
                ep = run_episode(policy, ctx.world, "act", goal=ctx.goal, max_steps=cfg.act_max_steps, rng=r)
                vals.append(1.0 if ep.success else 0.0)
    return float(np.mean(vals))


# -- 5 ----------------------------------------------------------------------------------

@pytest.mark.criterion(5, "GRPO improves ECC (explore-only) and task reward (task-only)")
def test_c05_training_improvement(sweep, record_property):
    runs, wall = sweep
    t0 = time.perf_counter()
    gains = {}
    for name, kind in (("explore_only", "exploration"), ("task_only", "task")):
        cfg = _config(name, 0)
        before = _held_out_mean(PolicyParameters.zeros(), kind, cfg)
        after = [_held_out_mean(runs[(name, s)][0], kind, cfg) for s in SEEDS]
        gains[name] = (before, after)
    dt = wall["explore_only"] + wall["task_only"] + time.perf_counter() - t0
    e0, e1 = gains["explore_only"]
    s0, s1 = gains["task_only"]
    _detail(record_property,
            f"held-out ECC {e0:.3f} -> {np.mean(e1):.3f} (seeds {', '.join(f'{x:.3f}' for x in e1)}); "
            f"task reward {s0:.3f} -> {np.mean(s1):.3f} (seeds {', '.join(f'{x:.3f}' for x in s1)}); {dt:.0f}s")
    assert np.mean(e1) - e0 >= 0.15
    assert np.mean(s1) - s0 >= 0.15
    assert dt < 20 * 60


# -- 6 ----------------------------------------------------------------------------------

def _eval_pairs():
    return desk_pairs(150, seed=999, loc_range=(6, 8), obj_range=(4, 8))


@pytest.mark.criterion(6, "an interior schedule ratio gives the best combined score")
def test_c06_interior_optimum(sweep, record_property):
    runs, wall = sweep
    t0 = time.perf_counter()
    worlds, goals = _eval_pairs()
    combined, direct = {}, {}
    for name in SWEEP:
        per_seed_c, per_seed_d = [], []
        for s in SEEDS:
            params = runs[(name, s)][0]
            d = e = 0
            for i, (w, g) in enumerate(zip(worlds, goals)):
                d += run_direct(SoftmaxPolicy(params), w, g, 12, seed=i).success
                e += run_eta(SoftmaxPolicy(params), SoftmaxPolicy(params), w, g, 40, 12, seed=i).success
            n = len(worlds)
            # direct success + (E-t-A success - direct success)
            per_seed_d.append(d / n)
            per_seed_c.append(d / n + (e / n - d / n))
        combined[name], direct[name] = float(np.mean(per_seed_c)), float(np.mean(per_seed_d))
    dt = sum(wall.values()) + time.perf_counter() - t0
    best = max(combined, key=combined.get)
    _detail(record_property, "combined " + ", ".join(f"{k} {v:.3f}" for k, v in combined.items())
            + f"; best {best}; {dt:.0f}s")
    assert best in ("1:1", "5:1")
    assert dt < 60 * 60


# -- 7, 8 -------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def relocation_suite():
    t0 = time.perf_counter()
    worlds, goals = desk_pairs(110, seed=SUITE_SEED)
    suite = build_suite(worlds, goals, per_variant=100, seed=SUITE_SEED)
    entries = [e for e in suite["entries"] if e["kind"] == "object_relocation"]
    return entries, time.perf_counter() - t0


def _delta(entries, explorer_factory, budget):
    eta = direct = 0
    for i, e in enumerate(entries):
        eta += run_eta(explorer_factory(), scripted_executor(), e["world"], e["goal"], budget, 50, seed=i).success
        direct += run_direct(scripted_executor(), e["world"], e["goal"], 50, seed=i).success
    n = len(entries)
    return eta / n, direct / n


@pytest.mark.criterion(7, "explore-then-act dominates on the relocation suite")
def test_c07_eta_dominance(relocation_suite, record_property):
    entries, build_s = relocation_suite
    t0 = time.perf_counter()
    solvable = sum(check_solvable(e["world"], e["goal"]) for e in entries)
    eta, direct = _delta(entries, scripted_explorer, 100)
    dt = build_s + time.perf_counter() - t0
    _detail(record_property, f"{len(entries)} instances ({solvable} solvable): with knowledge {eta:.2f}, "
                             f"direct {direct:.2f}, delta {eta - direct:+.2f}, {dt:.0f}s")
    assert len(entries) == 100 and solvable == 100
    assert eta == 1.0
    assert direct < 1.0
    assert eta - direct > 0
    assert dt < 120


@pytest.mark.criterion(8, "random explorer with budget 10 does not help")
def test_c08_low_budget_degradation(relocation_suite, record_property):
    entries, build_s = relocation_suite
    t0 = time.perf_counter()
    eta, direct = _delta(entries, RandomPolicy, 10)
    dt = build_s + time.perf_counter() - t0
    _detail(record_property, f"N=10 random: with knowledge {eta:.2f}, direct {direct:.2f}, "
                             f"delta {eta - direct:+.2f}, {dt:.0f}s")
    assert eta - direct <= 0
    assert dt < 120


# -- 9 ----------------------------------------------------------------------------------------

@pytest.mark.criterion(9, "failure-episode diagnostics favour the exploration-trained policy")
def test_c09_diagnostics_direction(sweep, record_property):
    runs, _ = sweep
    t0 = time.perf_counter()
    worlds, goals = desk_pairs(100, seed=777, loc_range=(6, 8), obj_range=(4, 8))
    reports = {}
    for name in (EXPLORATION_TRAINED, "task_only"):
        trajs, flags = [], []
        for s in SEEDS:
            policy = SoftmaxPolicy(runs[(name, s)][0])
            for i, (w, g) in enumerate(zip(worlds, goals)):
                ep = run_direct(policy, w, g, 12, seed=i)
                trajs.append(ep.traj)
                flags.append(ep.success)
        reports[name] = diagnose(trajs, flags, failure_only=True)
    dt = time.perf_counter() - t0
    x, t = reports[EXPLORATION_TRAINED], reports["task_only"]
    fields = ("repeated_action_rate", "loop_rate", "info_seeking_rate", "error_recovery_rate")
    _detail(record_property, "; ".join(f"{f} {getattr(x, f):.4f} vs {getattr(t, f):.4f}" for f in fields)
            + f" ({x.n_episodes} vs {t.n_episodes} failures), {dt:.0f}s")
    assert x.repeated_action_rate < t.repeated_action_rate
    assert x.loop_rate < t.loop_rate
    assert x.info_seeking_rate > t.info_seeking_rate
    assert x.error_recovery_rate > t.error_recovery_rate
    assert dt < 5 * 60


# -- 10 -----------------------------------------------------------------------------------------

@pytest.mark.criterion(10, "variant suite of 274 pairs has 1096 solvable single-axis instances")
def test_c10_variant_suite(record_property):
    t0 = time.perf_counter()
    worlds, goals = desk_pairs(300, seed=0)
    suite = build_suite(worlds, goals, per_variant=274, seed=0)
    entries = suite["entries"]
    base = {w.world_id: w for w in worlds}
    unsolvable = sum(not check_solvable(e["world"], e["goal"]) for e in entries)
    multi_axis = sum(structural_diff(base[e["base_world_id"]], e["world"]) != {AXIS_OF_KIND[e["kind"]]}
                     for e in entries if e["kind"] != "original")
    kinds = {k: sum(e["kind"] == k for e in entries) for k in ("original", *AXIS_OF_KIND)}
    dt = time.perf_counter() - t0
    _detail(record_property, f"{len(entries)} instances {kinds}, {unsolvable} unsolvable, "
                             f"{multi_axis} not single-axis, {dt:.0f}s")
    assert len(entries) == 1096
    assert set(kinds.values()) == {274}
    assert unsolvable == 0 and multi_axis == 0
    assert dt < 120


# -- 11 -----------------------------------------------------------------------------------------

@pytest.mark.criterion(11, "CLI pipeline reruns are byte-identical")
def test_c11_cli_determinism(tmp_path, record_property):
    t0 = time.perf_counter()
    full_pipeline(tmp_path / "first")
    full_pipeline(tmp_path / "second")
    a, b = snapshot(tmp_path / "first"), snapshot(tmp_path / "second")
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    _detail(record_property, f"{len(a)} artifacts compared, {len(differing)} differ, "
                             f"{time.perf_counter() - t0:.1f}s")
    assert len(a) > 20 and differing == []
