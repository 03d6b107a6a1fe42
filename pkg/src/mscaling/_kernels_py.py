"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np


def structure_function(log_prices, taus, qs, overlapping=True, q_step=0.0):
    p = np.asarray(log_prices, dtype=float)
    qs = np.asarray(qs, dtype=float)
    n = p.size
    out = np.full((len(taus), qs.size), np.nan)
    for i, tau in enumerate(taus):
        tau = int(tau)
        if tau >= n:
            continue
        a = np.abs(p[tau:] - p[:-tau])
        if not overlapping:
            a = a[::tau]
        count = a.size
        la = np.log(a[a > 0])
        # q_step is accepted for signature parity; exp(outer) is already vectorised
        out[i] = np.exp(np.outer(qs, la)).sum(axis=1) / count
    return out
