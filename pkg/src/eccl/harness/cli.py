"""Command-line entry point: ``eccl <subcommand> [flags]``.

Every subcommand writes its artifacts under ``--out`` and prints a one-line
summary. Failures exit nonzero with a JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .. import grpo
from ..checkpoints import CheckpointSet, build_checkpoints, coverage, ecc
from ..diagnostics import coverage_curve, diagnose
from .. import rng as rngmod
from ..eta import explore_phase, run_direct, run_eta, summarize
from ..variants import VARIANT_KINDS, build_suite, desk_pairs, make_variant, suite_from_json_dict, suite_to_json_dict
from ..world import generate_world, sample_goal
from ..world.reference import reference_bedroom, reference_bedroom_goal, reference_kitchen, reference_kitchen_goal
from ..world.types import TaskGoal, WorldSpec
from . import wire
from .evaluate import PolicySpec, evaluate, instance_seed
from .io import (
    ArtifactError, ensure_dir, persist_trajectory, read_config, read_json, write_json,
)
from .report import RESULTS_SCHEMA, write_report

log = logging.getLogger("eccl")

SUBCOMMANDS = ("gen-world", "checkpoints", "explore", "direct", "eta", "train", "variants", "score",
               "report", "serve")
REFERENCES = {"bedroom": (reference_bedroom, reference_bedroom_goal),
              "kitchen": (reference_kitchen, reference_kitchen_goal)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_world(path) -> WorldSpec:
    return WorldSpec.from_dict(read_json(path, "eccl-world/v1"))


def _load_goal(path) -> TaskGoal:
    return TaskGoal.from_dict(read_json(path, "eccl-goal/v1"))


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


# -- subcommands --------------------------------------------------------------------

def cmd_gen_world(args, out: Path) -> str:
    if args.reference:
        world, goal = REFERENCES[args.reference][0](), REFERENCES[args.reference][1]()
    else:
        world = generate_world(args.seed, args.locations, args.objects, args.room)
        goal = sample_goal(world, args.seed)
    write_json(out / "world.json", world.to_dict())
    write_json(out / "goal.json", goal.to_dict())
    return f"world {world.world_id}: {len(world.locations)} locations, {len(world.objects)} objects; goal: {goal.text}"


def cmd_checkpoints(args, out: Path) -> str:
    _need(args, "world")
    cps = build_checkpoints(_load_world(args.world))
    write_json(out / "checkpoints.json", cps.to_dict())
    return f"{cps.M} checkpoints for {cps.world_id}"


def cmd_explore(args, out: Path) -> str:
    _need(args, "world")
    world = _load_world(args.world)
    cps = build_checkpoints(world)
    s = instance_seed(args.seed, 0)
    ep = explore_phase(PolicySpec(args.explorer).make("explore"), world, args.budget,
                       rng=rngmod.stream(s, "eta", "explore"), seed=s, cps=cps)
    persist_trajectory(ep.traj, out / "explore.traj.jsonl")
    write_json(out / "knowledge.json", summarize(ep.traj).to_dict())
    res = {"schema": RESULTS_SCHEMA, "condition": args.label or f"explore:{args.explorer}", "kind": "explore",
           "explorer": args.explorer, "budget": args.budget, "seed": args.seed,
           "instances": [{"index": 0, "world_id": world.world_id, "ecc": ep.ecc, "steps": len(ep.traj)}]}
    if args.budgets:
        res["budget_curves"] = [[list(p) for p in coverage_curve(ep.traj, cps, args.budgets).points]]
    write_json(out / "results.json", res)
    return f"explored {world.world_id} in {len(ep.traj)} steps: ECC {ep.ecc:.4f} ({round(ep.ecc * cps.M)}/{cps.M})"


def cmd_direct(args, out: Path) -> str:
    _need(args, "world", "goal")
    world, goal = _load_world(args.world), _load_goal(args.goal)
    policy = PolicySpec(args.policy)
    s = instance_seed(args.seed, 0)
    ep = run_direct(policy.make("act"), world, goal, args.max_steps, seed=s)
    persist_trajectory(ep.traj, out / "direct.traj.jsonl")
    row = {"index": 0, "world_id": world.world_id, "variant_kind": None,
           "success_dir": 1.0 if ep.success else 0.0, "steps_dir": len(ep.traj)}
    res = {"schema": RESULTS_SCHEMA, "condition": args.label or f"direct:{args.policy}", "kind": "direct",
           "executor": policy.text, "max_steps": args.max_steps, "seed": args.seed, "instances": [row]}
    write_json(out / "results.json", res)
    return f"direct on {world.world_id}: {'success' if ep.success else 'failure'} in {len(ep.traj)} steps"


def _suite_instances(path) -> list:
    suite = suite_from_json_dict(read_json(path, "eccl-suite/v1"), Path(path).parent)
    return [{"world": e["world"], "goal": e["goal"], "variant_kind": e["kind"]} for e in suite["entries"]]


def cmd_eta(args, out: Path) -> str:
    explorer, executor = PolicySpec(args.explorer), PolicySpec(args.executor)
    label = args.label or f"eta:{args.explorer}+{args.executor}@{args.budget}"
    if args.suite:
        instances = _suite_instances(args.suite)
        res = evaluate(instances, explorer, executor, args.budget, args.max_steps, args.seed, label,
                       with_direct=not args.no_direct, continue_in_place=args.continue_in_place)
        write_json(out / "results.json", res)
        rows = res["instances"]
        succ = sum(r["success_eta"] for r in rows) / len(rows)
        return f"E-t-A over {len(rows)} instances: success {succ:.3f}"
    _need(args, "world", "goal")
    world, goal = _load_world(args.world), _load_goal(args.goal)
    s = instance_seed(args.seed, 0)
    r = run_eta(explorer.make("explore"), executor.make("act"), world, goal, args.budget, args.max_steps,
                seed=s, continue_in_place=args.continue_in_place)
    persist_trajectory(r.exploration_traj, out / "explore.traj.jsonl")
    persist_trajectory(r.acting_traj, out / "act.traj.jsonl")
    write_json(out / "knowledge.json", r.knowledge.to_dict())
    (out / "knowledge.txt").write_text(r.knowledge.render() + "\n", encoding="utf-8")
    write_json(out / "eta.json", r.to_dict())
    row = {"index": 0, "world_id": world.world_id, "variant_kind": None,
           "success_eta": 1.0 if r.success else 0.0, "steps_eta": len(r.acting_traj), "ecc": r.ecc_at_budget}
    if not args.no_direct:
        d = run_direct(executor.make("act"), world, goal, args.max_steps, seed=s)
        persist_trajectory(d.traj, out / "direct.traj.jsonl")
        row.update(success_dir=1.0 if d.success else 0.0, steps_dir=len(d.traj))
    write_json(out / "results.json", {"schema": RESULTS_SCHEMA, "condition": label, "kind": "eta",
                                      "explorer": explorer.text, "executor": executor.text,
                                      "budget": args.budget, "max_steps": args.max_steps,
                                      "seed": args.seed, "instances": [row]})
    verdict = f"success in {r.steps_to_success} steps" if r.success else "failure"
    return f"E-t-A on {world.world_id}: ECC@{args.budget} {r.ecc_at_budget:.4f}, {verdict}"


def _train_config(args) -> grpo.TrainConfig:
    d = read_config(args.config) if args.config else {}
    d = dict(d.get("train", d))
    d["seed"] = args.seed
    if args.steps is not None:
        d["max_steps"] = args.steps
    try:
        return grpo.TrainConfig.from_dict(d)
    except TypeError as exc:
        raise ArtifactError(f"bad train config: {exc}") from None


def cmd_train(args, out: Path) -> str:
    cfg = _train_config(args)
    params = ref = None
    start = 0
    if args.resume:
        params, ref, saved, start = grpo.load_checkpoint(args.resume)
        if dict(saved.to_dict(), max_steps=cfg.max_steps) != cfg.to_dict():
            raise ArtifactError("resume checkpoint was produced by a different config")
    log_path = out / "train_log.jsonl"
    mode = "a" if args.resume else "w"
    with open(log_path, mode, encoding="utf-8") as f:
        def on_step(step, p, rec):
            if not args.timing:
                rec = {k: v for k, v in rec.items() if k != "wall_ms"}
            f.write(json.dumps(rec, sort_keys=True) + "\n")
            if args.checkpoint_every and (step + 1) % args.checkpoint_every == 0:
                grpo.save_checkpoint(out / "trainstate.json", p, ref_used, cfg, step + 1)
        ref_used = ref or params or grpo.PolicyParameters.zeros()
        params, tlog = grpo.train(cfg, params=params, ref_params=ref, on_step=on_step, start_step=start)
    write_json(out / "params.json", params.to_dict())
    write_json(out / "config.json", cfg.to_dict())
    grpo.save_checkpoint(out / "trainstate.json", params, ref_used, cfg, cfg.max_steps)
    last = tlog.records[-1] if tlog.records else {}
    return (f"trained {cfg.mode} {cfg.schedule_ratio} for {cfg.max_steps} steps: "
            f"last mean_reward {last.get('mean_reward', float('nan')):.3f}")


def cmd_variants(args, out: Path) -> str:
    if args.world:
        _need(args, "goal", "kind")
        world, goal = _load_world(args.world), _load_goal(args.goal)
        vworld, vspec = make_variant(args.kind, world, goal, args.seed)
        write_json(out / "world.json", vworld.to_dict())
        write_json(out / "variant.json", vspec.to_dict())
        return f"{args.kind} variant {vworld.world_id}: {len(vspec.perturbation_log)} edit(s)"
    n = args.pairs or int(args.per_variant * 1.25) + 10
    lo, hi = args.loc_range
    worlds, goals = desk_pairs(n, args.seed, loc_range=(lo, hi))
    suite = build_suite(worlds, goals, args.per_variant, args.seed)
    paths = {}
    for e in suite["entries"]:
        w = e["world"]
        if w.world_id not in paths:
            rel = f"worlds/{w.world_id.replace('~', '_')}.json"
            write_json(out / rel, w.to_dict())
            paths[w.world_id] = rel
    write_json(out / "suite.json", suite_to_json_dict(suite, paths))
    return f"suite: {len(suite['entries'])} instances ({args.per_variant} per kind), {len(suite['skipped'])} pairs skipped"


def cmd_score(args, out: Path) -> str:
    from .io import load_trajectory
    _need(args, "traj")
    traj = load_trajectory(args.traj)
    if args.checkpoints:
        cps = CheckpointSet.from_dict(read_json(args.checkpoints, "eccl-checkpoints/v1"))
    elif args.world:
        cps = build_checkpoints(_load_world(args.world))
    else:
        raise UsageError("score needs --checkpoints or --world")
    if cps.world_id != traj.world_id:
        raise ArtifactError(f"checkpoints are for {cps.world_id}, trajectory is from {traj.world_id}")
    cov = coverage(traj, cps)
    value = ecc(cov)
    payload = {"schema": "eccl-score/v1", "world_id": traj.world_id, "steps": len(traj),
               "M": cps.M, "hits": dict(sorted(cov.hits.items())), "ecc": value,
               "diagnostics": diagnose([traj]).to_dict()}
    if args.budgets:
        payload["budget_curve"] = coverage_curve(traj, cps, args.budgets).to_dict()
    write_json(out / "score.json", payload)
    return f"ECC {value:.4f} ({cov.covered_count}/{cps.M}) over {len(traj)} steps"


def cmd_report(args, out: Path) -> str:
    paths = []
    for p in args.results:
        p = Path(p)
        if p.is_dir():
            paths += sorted(p.rglob("results.json"))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"{p}: no such file")
    if not paths:
        raise ArtifactError("no results.json files found")
    rep = write_report(paths, out, args.expect)
    return f"report over {len(rep['rows'])} condition(s) written to {out}"


def cmd_serve(args, out: Path) -> str:
    _need(args, "world")
    world = _load_world(args.world)
    goal = _load_goal(args.goal) if args.goal else None
    jobs = [wire.WireJob(world, goal, args.mode, args.budget, args.max_steps, wire.job_seed(args.seed, i))
            for i in range(args.episodes)]
    if args.agent:
        channel = wire.subprocess_channel(args.agent)
    elif args.listen:
        host, _, port = args.listen.rpartition(":")
        channel = wire.listen_channel(host or "127.0.0.1", int(port))
    else:
        channel = wire.LineChannel(sys.stdin, sys.stdout)
    session = wire.WireSession(channel)
    try:
        episodes = wire.serve_wire_protocol(session, jobs, args.concurrency, args.timeout)
    finally:
        session.close()
    for ep in episodes:
        persist_trajectory(ep.traj, out / "episodes" / f"{ep.episode.replace('/', '_')}.traj.jsonl")
    summary = wire.tally(episodes)
    write_json(out / "serve.json", {"schema": "eccl-serve/v1", "episodes": [e.summary() for e in episodes],
                                    "tally": summary})
    return (f"served {summary['episodes']} episode(s), {summary['invalid']} invalid; "
            f"success {summary['success_rate']}, mean ECC {summary['mean_ecc']}")


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eccl", description="exploration checkpoint coverage laboratory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, seed=True, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--config", help="TOML or JSON file whose keys fill unset flags")
        if seed:
            sp.add_argument("--seed", type=int, help="root seed (mandatory)")
        return sp

    sp = add("gen-world", cmd_gen_world, help="generate a world and a goal")
    sp.add_argument("--locations", type=int, default=9)
    sp.add_argument("--objects", type=int, default=12)
    sp.add_argument("--room", choices=("bedroom", "kitchen"), default="bedroom")
    sp.add_argument("--reference", choices=sorted(REFERENCES), help="emit a hand-built reference instance")

    sp = add("checkpoints", cmd_checkpoints, seed=False, help="build the checkpoint set of a world")
    sp.add_argument("--world")

    sp = add("explore", cmd_explore, help="run one exploration episode")
    sp.add_argument("--world")
    sp.add_argument("--explorer", default="scripted")
    sp.add_argument("--budget", type=int, default=100)
    sp.add_argument("--budgets", type=_ints, help="budget-curve points, e.g. 10,20,50,100")
    sp.add_argument("--label")

    sp = add("direct", cmd_direct, help="direct execution without exploration")
    sp.add_argument("--world")
    sp.add_argument("--goal")
    sp.add_argument("--policy", default="scripted")
    sp.add_argument("--max-steps", type=int, default=50)
    sp.add_argument("--label")

    sp = add("eta", cmd_eta, help="explore-then-act on one instance or a suite")
    sp.add_argument("--world")
    sp.add_argument("--goal")
    sp.add_argument("--suite")
    sp.add_argument("--explorer", default="scripted")
    sp.add_argument("--executor", default="scripted")
    sp.add_argument("--budget", type=int, default=100)
    sp.add_argument("--max-steps", type=int, default=50)
    sp.add_argument("--continue-in-place", action="store_true")
    sp.add_argument("--no-direct", action="store_true", help="skip the direct-execution baseline")
    sp.add_argument("--label")

    sp = add("train", cmd_train, help="GRPO training")
    sp.add_argument("--steps", type=int, help="override max_steps")
    sp.add_argument("--resume", help="trainstate.json to continue from")
    sp.add_argument("--checkpoint-every", type=int, default=0)
    sp.add_argument("--timing", action="store_true", help="log wall_ms (breaks byte-identical reruns)")

    sp = add("variants", cmd_variants, help="build a variant suite or a single variant")
    sp.add_argument("--per-variant", type=int, default=274)
    sp.add_argument("--pairs", type=int, help="number of base pairs to draw from")
    sp.add_argument("--loc-range", type=_ints, default=[6, 12])
    sp.add_argument("--world")
    sp.add_argument("--goal")
    sp.add_argument("--kind", choices=VARIANT_KINDS)

    sp = add("score", cmd_score, seed=False, help="ECC and diagnostics of a stored trajectory")
    sp.add_argument("--traj")
    sp.add_argument("--checkpoints")
    sp.add_argument("--world")
    sp.add_argument("--budgets", type=_ints)

    sp = add("report", cmd_report, seed=False, help="tables from results files")
    sp.add_argument("--results", nargs="+", default=[])
    sp.add_argument("--expect", type=lambda s: s.split(","), help="condition labels that must be present")

    sp = add("serve", cmd_serve, help="run episodes against an external agent over NDJSON")
    sp.add_argument("--world")
    sp.add_argument("--goal")
    sp.add_argument("--mode", choices=("explore", "act", "eta"), default="explore")
    sp.add_argument("--budget", type=int, default=100)
    sp.add_argument("--max-steps", type=int, default=50)
    sp.add_argument("--episodes", type=int, default=1)
    sp.add_argument("--concurrency", type=int, default=1)
    sp.add_argument("--timeout", type=float, default=wire.DEFAULT_TIMEOUT)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--agent", help="agent command spoken to over its stdin/stdout")
    g.add_argument("--listen", help="HOST:PORT to accept one agent connection on")
    return p


def _apply_config(parser, args, argv) -> None:
    """Config keys fill only flags that were not given on the command line."""
    if not args.config or args.command == "train":
        return
    cfg = read_config(args.config)
    cfg = cfg.get(args.command, cfg)
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if dest not in given:
            setattr(args, dest, value)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
        _apply_config(parser, args, argv)
        if hasattr(args, "seed") and args.seed is None:
            raise UsageError("--seed is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        out = ensure_dir(args.out)
        summary = args.fn(args, out)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except FileNotFoundError as exc:
        return _fail("missing_file", str(exc), 1)
    except (ArtifactError, KeyError) as exc:
        return _fail("bad_artifact", str(exc), 1)
    except ValueError as exc:
        return _fail("invalid", str(exc), 1)
    stream = sys.stderr if getattr(args, "command", None) == "serve" and not (args.agent or args.listen) else sys.stdout
    stream.write(summary + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
