"""Numpy reference kernels. Same signatures as the compiled module."""
from __future__ import annotations

import numpy as np


def logits(theta, row_ptr, feat_idx):
    theta = np.asarray(theta, dtype=np.float64)
    row_ptr = np.asarray(row_ptr, dtype=np.int64)
    feat_idx = np.asarray(feat_idx, dtype=np.int64)
    n = len(row_ptr) - 1
    out = np.zeros(n)
    lengths = np.diff(row_ptr)
    nz = lengths > 0
    if feat_idx.size:
        sums = np.add.reduceat(theta[feat_idx], row_ptr[:-1][nz]) if nz.any() else np.zeros(0)
        out[nz] = sums
    return out


def log_softmax(z):
    z = np.asarray(z, dtype=np.float64)
    m = z.max()
    shifted = z - m
    return shifted - np.log(np.exp(shifted).sum())


def _segment_log_softmax(z, point_ptr):
    starts = point_ptr[:-1]
    seg = np.repeat(np.arange(len(starts)), np.diff(point_ptr))
    m = np.maximum.reduceat(z, starts)
    shifted = z - m[seg]
    lse = np.log(np.add.reduceat(np.exp(shifted), starts))
    return shifted - lse[seg], seg


def policy_grad(theta, ref_theta, row_ptr, feat_idx, point_ptr, chosen, coef, kl_weight):
    """Gradient of sum_p coef_p log pi(c_p) - kl_weight * sum_p KL_p.

    Returns (grad, logp_chosen per point, kl per point).
    """
    theta = np.asarray(theta, dtype=np.float64)
    ref_theta = np.asarray(ref_theta, dtype=np.float64)
    row_ptr = np.asarray(row_ptr, dtype=np.int64)
    feat_idx = np.asarray(feat_idx, dtype=np.int64)
    point_ptr = np.asarray(point_ptr, dtype=np.int64)
    chosen = np.asarray(chosen, dtype=np.int64)
    coef = np.asarray(coef, dtype=np.float64)
    n_points = len(point_ptr) - 1
    if n_points == 0:
        return np.zeros_like(theta), np.zeros(0), np.zeros(0)
    s, seg = _segment_log_softmax(logits(theta, row_ptr, feat_idx), point_ptr)
    r, _ = _segment_log_softmax(logits(ref_theta, row_ptr, feat_idx), point_ptr)
    p = np.exp(s)
    term = p * (s - r)
    kl = np.add.reduceat(term, point_ptr[:-1])
    pick = point_ptr[:-1] + chosen
    logp = s[pick]
    w = -coef[seg] * p - kl_weight * (term - kl[seg] * p)
    w[pick] += coef
    per_feat = np.repeat(w, np.diff(row_ptr))
    grad = np.bincount(feat_idx, weights=per_feat, minlength=len(theta))
    return grad, logp, kl
