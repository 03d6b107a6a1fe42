"""Time the structure-function kernel on both backends.

Usage: python benchmarks/bench_kernels.py [--T 10000] [--lags 250] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mscaling import _backend
from mscaling.generators import MrwParams, simulate_mrw


def best_of(func, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=10_000)
    p.add_argument("--lags", type=int, default=250)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    logp = simulate_mrw(MrwParams(0.3, T=args.T), seed=0).log_prices
    taus = np.arange(1, args.lags + 1)
    qs = np.linspace(0.02, 1.0, 50)
    backends = ["python"] + (["cython"] if _backend._compiled is not None else [])
    results = {}
    for name in backends:
        results[name] = best_of(lambda: _backend.structure_function(logp, taus, qs, True, backend=name),
                                args.repeat)
        print(f"{name:7s} {results[name]:.3f} s  (T={args.T}, {args.lags} lags, 50 moments)")
    if len(results) == 2:
        a = _backend.structure_function(logp, taus, qs, True, backend="cython")
        b = _backend.structure_function(logp, taus, qs, True, backend="python")
        print(f"speed-up {results['python'] / results['cython']:.1f}x, "
              f"max relative difference {np.max(np.abs(a - b) / b):.1e}")


if __name__ == "__main__":
    main()
