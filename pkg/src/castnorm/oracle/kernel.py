"""Pick the enumeration kernel at import time.

The compiled ``_ckernel`` extension is used when it was built; otherwise,
or when ``CASTNORM_PURE_PYTHON=1`` is set, the pure-Python twin is used.
"""

from __future__ import annotations

import os
from array import array

from . import _pykernel

try:
    if os.environ.get("CASTNORM_PURE_PYTHON") == "1":
        raise ImportError("pure Python requested")
    from . import _ckernel
except ImportError:
    _ckernel = None

BACKEND = "cython" if _ckernel is not None else "python"


def _as_int64(xs) -> array:
    return array("q", xs)


def run_python(code, starts, lengths, n_ctx, dom_num, dom_den, dom_off, dom_len):
    return _pykernel.find_counterexample(code, starts, lengths, n_ctx, dom_num, dom_den,
                                         dom_off, dom_len)


def run_compiled(code, starts, lengths, n_ctx, dom_num, dom_den, dom_off, dom_len):
    """Run the compiled kernel; status 2 signals int64 overflow."""
    if _ckernel is None:
        raise RuntimeError("compiled kernel not available")
    try:
        args = [_as_int64(x) for x in (code, starts, lengths)]
        doms = [_as_int64(x) for x in (dom_num, dom_den, dom_off, dom_len)]
    except OverflowError:
        return 2, -1, 0
    return _ckernel.find_counterexample(*args, n_ctx, *doms)


def find_counterexample(code, starts, lengths, n_ctx, dom_num, dom_den, dom_off, dom_len,
                        backend: str | None = None):
    """Dispatch to the selected backend, redoing overflowed runs exactly."""
    backend = backend or BACKEND
    args = (code, starts, lengths, n_ctx, dom_num, dom_den, dom_off, dom_len)
    if backend == "cython":
        result = run_compiled(*args)
        if result[0] != 2:
            return result
    return run_python(*args)
