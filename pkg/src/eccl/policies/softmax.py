"""Linear softmax policy over the candidate set."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import kernels
from ..world.types import Action
from .features import D, SCHEMA_VERSION, PolicyContext, feature_rows, legal_actions

PARAMS_SCHEMA = "eccl-params/v1"


@dataclass(frozen=True)
class PolicyParameters:
    theta: np.ndarray
    feature_schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=np.float64)
        if th.shape != (D,):
            raise ValueError(f"theta must have length {D}, got {th.shape}")
        if not np.all(np.isfinite(th)):
            raise ValueError("theta has non-finite entries")
        th = th.copy()
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @classmethod
    def zeros(cls) -> "PolicyParameters":
        return cls(np.zeros(D))

    def to_dict(self) -> dict:
        # repr of a float round-trips exactly
        return {"schema": PARAMS_SCHEMA, "feature_schema_version": self.feature_schema_version,
                "theta": [float(x) for x in self.theta]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyParameters":
        if d.get("schema") != PARAMS_SCHEMA:
            raise ValueError(f"expected schema {PARAMS_SCHEMA}, got {d.get('schema')!r}")
        if d.get("feature_schema_version") != SCHEMA_VERSION:
            raise ValueError(f"feature schema {d.get('feature_schema_version')!r} unsupported")
        return cls(np.array(d["theta"], dtype=np.float64))


def rows_to_csr(rows) -> tuple[np.ndarray, np.ndarray]:
    lengths = [len(r) for r in rows]
    row_ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum(lengths, out=row_ptr[1:])
    feat_idx = np.fromiter((i for r in rows for i in r), dtype=np.int64, count=int(row_ptr[-1]))
    return row_ptr, feat_idx


def distribution_from_rows(theta: np.ndarray, rows) -> np.ndarray:
    row_ptr, feat_idx = rows_to_csr(rows)
    return np.exp(kernels.log_softmax(kernels.logits(theta, row_ptr, feat_idx)))


def log_distribution_from_rows(theta: np.ndarray, rows) -> np.ndarray:
    row_ptr, feat_idx = rows_to_csr(rows)
    return kernels.log_softmax(kernels.logits(theta, row_ptr, feat_idx))


def action_distribution(params: PolicyParameters, ctx: PolicyContext) -> tuple[list[Action], np.ndarray]:
    cands = legal_actions(ctx.view)
    return cands, distribution_from_rows(params.theta, feature_rows(ctx, cands))


@dataclass
class Decision:
    action: Optional[Action]
    text: str
    log_prob: float = 0.0
    rows: Optional[list] = None
    chosen: int = -1


def _categorical(logp: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(np.exp(logp))
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)


def sample_action(params: PolicyParameters, ctx: PolicyContext, rng: np.random.Generator) -> tuple[Action, float]:
    d = SoftmaxPolicy(params).decide(ctx, rng)
    return d.action, d.log_prob


class SoftmaxPolicy:
    """Samples from softmax(theta . phi). ``greedy`` picks the argmax instead."""

    name = "softmax"
    records_features = True

    def __init__(self, params: PolicyParameters, greedy: bool = False):
        self.params = params
        self.greedy = greedy

    def begin(self, ctx: PolicyContext) -> None:
        pass

    def decide(self, ctx: PolicyContext, rng: np.random.Generator) -> Decision:
        cands = legal_actions(ctx.view)
        rows = feature_rows(ctx, cands)
        logp = log_distribution_from_rows(self.params.theta, rows)
        i = int(np.argmax(logp)) if self.greedy else _categorical(logp, rng)
        return Decision(cands[i], cands[i].text, float(logp[i]), rows, i)


class RandomPolicy(SoftmaxPolicy):
    """theta = 0: uniform over the candidate set."""

    name = "random"

    def __init__(self):
        super().__init__(PolicyParameters.zeros())
