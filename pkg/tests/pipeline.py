"""A full CLI pipeline run inside one directory, for determinism checks."""
import contextlib
import io
import os
from pathlib import Path

from eccl.harness.cli import main

TRAIN_TOML = """
[train]
mode = "interleaved"
schedule_ratio = [1, 1]
G = 2
batch_size = 2
rollouts_per_step = 4
max_steps = 3
exploration_budget = 12
act_max_steps = 12
"""


def run(argv) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    assert code == 0, (argv, code)
    return buf.getvalue()


def full_pipeline(root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    cwd = os.getcwd()
    os.chdir(root)
    try:
        Path("train.toml").write_text(TRAIN_TOML)
        run(["gen-world", "--seed", "7", "--locations", "7", "--objects", "9", "--out", "w"])
        run(["checkpoints", "--world", "w/world.json", "--out", "w"])
        run(["explore", "--seed", "7", "--world", "w/world.json", "--explorer", "random", "--budget", "30",
             "--budgets", "5,10,30", "--out", "explore"])
        run(["score", "--traj", "explore/explore.traj.jsonl", "--checkpoints", "w/checkpoints.json",
             "--budgets", "10,20", "--out", "score"])
        run(["eta", "--seed", "7", "--world", "w/world.json", "--goal", "w/goal.json", "--out", "eta"])
        run(["train", "--seed", "7", "--config", "train.toml", "--out", "train"])
        run(["eta", "--seed", "7", "--world", "w/world.json", "--goal", "w/goal.json", "--explorer",
             "softmax:train/params.json", "--executor", "softmax:train/params.json", "--budget", "20",
             "--max-steps", "15", "--label", "trained", "--out", "eta_trained"])
        run(["variants", "--seed", "7", "--per-variant", "2", "--loc-range", "5,7", "--out", "suite"])
        run(["eta", "--seed", "7", "--suite", "suite/suite.json", "--label", "suite", "--out", "eta_suite"])
        run(["report", "--results", "eta", "eta_trained", "eta_suite", "explore", "--out", "report"])
    finally:
        os.chdir(cwd)


def snapshot(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
