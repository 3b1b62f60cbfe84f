"""Hot numeric kernels: compiled when available, numpy otherwise.

Set ``ECCL_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels as python_impl

compiled_impl = None
if os.environ.get("ECCL_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_impl
    except ImportError:
        compiled_impl = None

impl = compiled_impl if compiled_impl is not None else python_impl
BACKEND = "cython" if compiled_impl is not None else "python"

logits = impl.logits
log_softmax = impl.log_softmax
policy_grad = impl.policy_grad

__all__ = ["BACKEND", "compiled_impl", "log_softmax", "logits", "policy_grad", "python_impl"]
