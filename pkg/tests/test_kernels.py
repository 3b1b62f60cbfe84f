import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eccl import kernels
from eccl.policies import D

needs_compiled = pytest.mark.skipif(kernels.compiled_impl is None, reason="compiled kernels not built")


def batch(seed, n_points=30):
    r = np.random.default_rng(seed)
    n_cands = r.integers(1, 12, size=n_points)
    point_ptr = np.concatenate([[0], np.cumsum(n_cands)]).astype(np.int64)
    n_rows = int(point_ptr[-1])
    row_ptr = np.concatenate([[0], np.cumsum(r.integers(0, 6, size=n_rows))]).astype(np.int64)
    feat_idx = r.integers(0, D, size=int(row_ptr[-1])).astype(np.int64)
    chosen = np.array([r.integers(c) for c in n_cands], dtype=np.int64)
    theta = r.normal(scale=2.0, size=D)
    return theta, theta + r.normal(size=D), row_ptr, feat_idx, point_ptr, chosen, r.normal(size=n_points), 0.03


@needs_compiled
@given(st.integers(0, 10 ** 6))
def test_compiled_matches_numpy(seed):
    b = batch(seed)
    for got, want in zip(kernels.compiled_impl.policy_grad(*b), kernels.python_impl.policy_grad(*b)):
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(kernels.compiled_impl.logits(b[0], b[2], b[3]),
                               kernels.python_impl.logits(b[0], b[2], b[3]), rtol=0, atol=1e-12)


@needs_compiled
@given(st.lists(st.floats(-300, 300), min_size=1, max_size=20))
def test_log_softmax_agrees(z):
    z = np.array(z)
    np.testing.assert_allclose(kernels.compiled_impl.log_softmax(z), kernels.python_impl.log_softmax(z),
                               rtol=1e-12, atol=1e-12)


def test_empty_batch():
    theta = np.ones(D)
    e = np.zeros(1, dtype=np.int64)
    g, lp, kl = kernels.policy_grad(theta, theta, e, np.zeros(0, dtype=np.int64), e,
                                    np.zeros(0, dtype=np.int64), np.zeros(0), 0.1)
    assert not g.any() and lp.size == 0 and kl.size == 0


def test_kl_of_identical_policies_is_zero():
    b = list(batch(3))
    b[1] = b[0]
    _, _, kl = kernels.policy_grad(*b)
    assert np.all(np.abs(kl) < 1e-15)


def test_pure_python_fallback_selected_by_env():
    env = dict(os.environ, ECCL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import eccl.kernels as k; print(k.BACKEND, k.impl.__name__)"],
                         env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out == ["python", "eccl.kernels._pykernels"]


def test_fallback_training_matches_compiled(tmp_path):
    code = ("import numpy as np; from eccl.grpo import TrainConfig, train; "
            "p,_ = train(TrainConfig(G=2, batch_size=2, rollouts_per_step=4, max_steps=2, exploration_budget=8, "
            "act_max_steps=8, seed=5)); np.save(r'%s', p.theta)")
    runs = {}
    for flag in ("0", "1"):
        path = tmp_path / f"theta{flag}.npy"
        subprocess.run([sys.executable, "-c", code % path], env=dict(os.environ, ECCL_PURE_PYTHON=flag),
                       check=True)
        runs[flag] = np.load(path)
    np.testing.assert_allclose(runs["0"], runs["1"], rtol=0, atol=1e-12)
