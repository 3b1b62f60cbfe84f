"""Result tables: per-condition rows, ratio sweep, variant robustness, budget curves."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..diagnostics import DiagnosticsReport
from .io import read_json, write_json

log = logging.getLogger(__name__)

RESULTS_SCHEMA = "eccl-results/v1"
REPORT_SCHEMA = "eccl-report/v1"


def _mean(xs) -> Optional[float]:
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


@dataclass
class ReportRow:
    condition: str
    steps_mean: Optional[float]
    ecc_mean: Optional[float]
    success_dir: Optional[float]
    success_eta: Optional[float]
    delta: Optional[float] = field(init=False)
    diagnostics: Optional[DiagnosticsReport] = None
    n: int = 0

    def __post_init__(self):
        if self.success_dir is None or self.success_eta is None:
            self.delta = None
        else:
            self.delta = self.success_eta - self.success_dir

    def to_dict(self) -> dict:
        return {"condition": self.condition, "steps_mean": self.steps_mean, "ecc_mean": self.ecc_mean,
                "success_dir": self.success_dir, "success_eta": self.success_eta, "delta": self.delta,
                "n": self.n,
                "diagnostics": self.diagnostics.to_dict() if self.diagnostics is not None else None}


def row_from_instances(condition: str, instances: list, diagnostics: Optional[dict] = None) -> ReportRow:
    diag = None
    if diagnostics:
        fields = DiagnosticsReport.__dataclass_fields__
        diag = DiagnosticsReport(**{k: v for k, v in diagnostics.items() if k in fields})
    steps = [i.get("steps_eta", i.get("steps_dir", i.get("steps"))) for i in instances]
    return ReportRow(condition, _mean(steps), _mean(i.get("ecc") for i in instances),
                     _mean(i.get("success_dir") for i in instances),
                     _mean(i.get("success_eta") for i in instances), diag, len(instances))


def ratio_key(ratio) -> float:
    """Task share of the schedule: explore-only sorts first, task-only last."""
    t, e = ratio
    return t / (t + e)


def ratio_label(ratio) -> str:
    t, e = ratio
    if t == 0:
        return "explore-only"
    if e == 0:
        return "task-only"
    return f"{t}:{e}"


def ratio_sweep_table(results: list) -> list[dict]:
    rows = []
    for r in results:
        if r.get("ratio") is None:
            continue
        row = row_from_instances(r["condition"], r.get("instances", []))
        d = row.to_dict()
        d.pop("diagnostics")
        d.update(ratio=list(r["ratio"]), label=ratio_label(r["ratio"]),
                 combined=(row.success_dir + row.delta) if row.delta is not None else None)
        rows.append(d)
    rows.sort(key=lambda d: (ratio_key(d["ratio"]), d["condition"]))
    return rows


def variant_table(results: list) -> list[dict]:
    rows = []
    for r in results:
        by_kind: dict = {}
        for inst in r.get("instances", []):
            kind = inst.get("variant_kind")
            if kind is not None:
                by_kind.setdefault(kind, []).append(inst)
        for kind in sorted(by_kind):
            row = row_from_instances(r["condition"], by_kind[kind])
            rows.append({"condition": r["condition"], "variant_kind": kind, "n": row.n,
                         "success_dir": row.success_dir, "success_eta": row.success_eta,
                         "delta": row.delta})
    return rows


def budget_series(results: list) -> dict:
    """condition -> [[k, mean ECC at k], ...] averaged over the condition's curves."""
    out = {}
    for r in results:
        curves = r.get("budget_curves") or []
        if not curves:
            continue
        acc: dict = {}
        for curve in curves:
            for k, v in curve:
                acc.setdefault(int(k), []).append(v)
        out[r["condition"]] = [[k, sum(v) / len(v)] for k, v in sorted(acc.items())]
    return out


def load_results(paths) -> list[dict]:
    results = []
    for p in paths:
        d = read_json(p, RESULTS_SCHEMA)
        if "condition" not in d:
            log.warning("%s: no condition label, skipped", p)
            continue
        results.append(d)
    results.sort(key=lambda d: d["condition"])
    return results


def build_report(results: list, expected: Optional[list] = None) -> dict:
    rows = []
    present = set()
    for r in results:
        if not r.get("instances"):
            log.warning("condition %s has no instances; row omitted", r["condition"])
            continue
        present.add(r["condition"])
        rows.append(row_from_instances(r["condition"], r["instances"], r.get("diagnostics")).to_dict())
    warnings = []
    for name in expected or []:
        if name not in present:
            msg = f"missing condition {name}; row omitted"
            log.warning(msg)
            warnings.append(msg)
    return {"schema": REPORT_SCHEMA, "rows": rows, "ratio_sweep": ratio_sweep_table(results),
            "variants": variant_table(results), "budget_curves": budget_series(results),
            "warnings": warnings}


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.3f}"
    return str(x)


def _table(headers: list, rows: list) -> str:
    cells = [[_fmt(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return "\n".join([line(headers), line(["-" * w for w in widths])] + [line(r) for r in cells])


MAIN_COLUMNS = ["condition", "n", "steps_mean", "ecc_mean", "success_dir", "success_eta", "delta"]
DIAG_COLUMNS = ["repeated_action_rate", "loop_rate", "info_seeking_rate", "error_recovery_rate"]


def render_text(rep: dict) -> str:
    parts = ["Conditions", _table(MAIN_COLUMNS, [[r[c] for c in MAIN_COLUMNS] for r in rep["rows"]])]
    diag_rows = [[r["condition"]] + [r["diagnostics"][c] for c in DIAG_COLUMNS]
                 for r in rep["rows"] if r.get("diagnostics")]
    if diag_rows:
        parts += ["", "Diagnostics", _table(["condition"] + DIAG_COLUMNS, diag_rows)]
    if rep["ratio_sweep"]:
        cols = ["label", "success_dir", "success_eta", "delta", "combined"]
        parts += ["", "Ratio sweep", _table(cols, [[r[c] for c in cols] for r in rep["ratio_sweep"]])]
    if rep["variants"]:
        cols = ["condition", "variant_kind", "n", "success_dir", "success_eta", "delta"]
        parts += ["", "Variants", _table(cols, [[r[c] for c in cols] for r in rep["variants"]])]
    if rep["budget_curves"]:
        parts += ["", "Budget curves"]
        for cond, pts in rep["budget_curves"].items():
            parts.append(f"{cond}: " + " ".join(f"{k}:{v:.3f}" for k, v in pts))
    return "\n".join(parts) + "\n"


def render_csv(rep: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MAIN_COLUMNS + DIAG_COLUMNS)
    for r in rep["rows"]:
        d = r.get("diagnostics") or {}
        w.writerow([_fmt(r[c]) for c in MAIN_COLUMNS] + [_fmt(d.get(c)) for c in DIAG_COLUMNS])
    return buf.getvalue()


def write_report(result_paths, out_dir, expected: Optional[list] = None) -> dict:
    rep = build_report(load_results(result_paths), expected)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(render_text(rep), encoding="utf-8")
    (out / "report.csv").write_text(render_csv(rep), encoding="utf-8")
    write_json(out / "report.json", rep)
    return rep
