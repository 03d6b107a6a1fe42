"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``MSCALING_PURE_PYTHON=1`` to force the numpy kernels.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if not os.environ.get("MSCALING_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _uniform_step(qs: np.ndarray) -> float:
    if qs.size < 2:
        return 0.0
    d = np.diff(qs)
    if np.all(np.abs(d - d[0]) <= 1e-12 * max(1.0, abs(d[0]))):
        return float(d[0])
    return 0.0


def structure_function(log_prices, taus, qs, overlapping=True, backend=None):
    """Mean of ``|r_tau(t)|**q`` over windows, shape ``(len(taus), len(qs))``."""
    p = np.ascontiguousarray(log_prices, dtype=np.float64)
    t = np.ascontiguousarray(taus, dtype=np.int64)
    q = np.ascontiguousarray(qs, dtype=np.float64)
    use = backend or BACKEND
    if use not in ("cython", "python"):
        raise ValueError(f"unknown backend {use!r}")
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled.structure_function(p, t, q, bool(overlapping), _uniform_step(q))
    return _kernels_py.structure_function(p, t, q, overlapping)
