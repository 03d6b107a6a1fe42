"""Simulation studies: estimator accuracy and test behaviour on MRW ensembles,
breakpoint recovery, and the anomaly bias on fractional Brownian motion."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .acsr import bootstrap_mean_ci, estimate_tau_star
from .errors import ConvergenceError
from .generators import AnomalySpec, FbmParams, MrwParams, inject_anomaly, simulate_fbm, simulate_mrw, \
    theoretical_spectrum
from .mstest import f_test_spectrum, t_test_increments
from .scaling import ESTIMATORS, fit_quadratic, fit_rnsghe_linear
from .series import LagGrid, MomentGrid, default_tau_cap, structure_tensor

log = logging.getLogger(__name__)

STUDY_LAMBDAS = (0.05, 0.1, 0.3)


@dataclass
class MrwEnsemble:
    """Per-path results for one intermittency value.

    ``coef[name]`` has shape ``(paths, 3)`` with columns ``A, B, H``;
    ``t_pvalues`` and ``f_pvalues`` come from the linear relative estimator.
    """

    lam: float
    seed: int
    tau_star: np.ndarray
    coef: dict
    t_pvalues: np.ndarray
    f_pvalues: np.ndarray
    failures: dict = field(default_factory=dict)

    @property
    def truth(self) -> tuple[float, float]:
        th = theoretical_spectrum(self.lam, np.array([1.0]))
        return th["A"], th["B"]

    def mean_se(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        c = self.coef[name]
        c = c[np.all(np.isfinite(c), axis=1)]
        return c.mean(axis=0), c.std(axis=0, ddof=1) / math.sqrt(c.shape[0])

    def rmse(self, name: str) -> tuple[float, float]:
        c = self.coef[name]
        c = c[np.all(np.isfinite(c), axis=1)]
        a, b = self.truth
        return (float(np.sqrt(np.mean((c[:, 0] - a) ** 2))),
                float(np.sqrt(np.mean((c[:, 1] - b) ** 2))))


def mrw_ensemble(lam: float, n_paths: int = 20, seed: int = 0, T: int = 10_000, L: float = 250.0,
                 sigma: float = 1.0, q: MomentGrid | None = None, cap_fraction: float = 0.2,
                 estimators: dict | None = None) -> MrwEnsemble:
    """Simulate ``n_paths`` MRW paths and run every estimator on each.

    The largest lag per path is its ACSR breakpoint. A nonlinear fit that
    fails to converge leaves NaN for that path and is counted in ``failures``.
    """
    q = MomentGrid.uniform() if q is None else q
    estimators = ESTIMATORS if estimators is None else estimators
    params = MrwParams(lam=lam, L=L, sigma=sigma, T=T)
    taus = np.empty(n_paths, dtype=int)
    coef = {k: np.full((n_paths, 3), np.nan) for k in estimators}
    tp = np.full((n_paths, len(q) - 1), np.nan)
    fp = np.full(n_paths, np.nan)
    failures: dict[str, int] = {}
    for i in range(n_paths):
        panel = simulate_mrw(params, seed, i)
        cap = default_tau_cap(panel.T, cap_fraction)
        taus[i] = estimate_tau_star(panel.base_returns, max_lag=cap).tau_star
        tensor = structure_tensor(panel, q, LagGrid.up_to(taus[i]))
        for name, fit in estimators.items():
            try:
                spec = fit(tensor)
            except ConvergenceError as exc:
                failures[name] = failures.get(name, 0) + 1
                log.warning("lambda=%g path %d: %s failed: %s", lam, i, name, exc)
                continue
            quad = fit_quadratic(spec)
            coef[name][i] = (quad.a, quad.b, quad.h_hat)
            if name == "RNSGHE_L":
                tp[i] = [t.p_value for t in t_test_increments(spec)]
                fp[i] = f_test_spectrum(spec, tensor).p_value
    return MrwEnsemble(lam, seed, taus, coef, tp, fp, failures)


def ensemble_seed(master: int, lam: float) -> int:
    """Seed of the ensemble for ``lam``, derived from a master seed."""
    return int(np.random.SeedSequence([int(master), int(round(lam * 1e6))]).generate_state(1)[0])


def run_ensembles(lams=STUDY_LAMBDAS, n_paths: int = 20, master_seed: int = 0, **kwargs) -> dict:
    return {lam: mrw_ensemble(lam, n_paths, ensemble_seed(master_seed, lam), **kwargs) for lam in lams}


# -- tables --------------------------------------------------------------------


def acsr_table(ensembles: dict, n_resamples: int = 200_000, level: float = 0.95) -> list[dict]:
    rows = []
    for lam, ens in ensembles.items():
        mean, lo, hi = bootstrap_mean_ci(ens.tau_star, n_resamples, level, seed=ens.seed)
        rows.append({"lambda": lam, "mean_tau_star": mean, "ci_low": lo, "ci_high": hi,
                     "median_tau_star": float(np.median(ens.tau_star)), "paths": int(ens.tau_star.size)})
    return rows


def rmse_experiment(ensembles: dict) -> list[dict]:
    """RMSE of ``A`` and ``B`` per estimator and intermittency value."""
    rows = []
    for lam, ens in ensembles.items():
        a, b = ens.truth
        for name in ens.coef:
            ra, rb = ens.rmse(name)
            mean, se = ens.mean_se(name)
            rows.append({"lambda": lam, "estimator": name, "rmse_A": ra, "rmse_B": rb,
                         "mean_A": float(mean[0]), "mean_B": float(mean[1]),
                         "se_A": float(se[0]), "se_B": float(se[1]), "true_A": a, "true_B": b})
    return rows


def ftest_table(ensembles: dict) -> list[dict]:
    rows = []
    for lam, ens in ensembles.items():
        p = ens.f_pvalues[np.isfinite(ens.f_pvalues)]
        rows.append({"lambda": lam, "median_p": float(np.median(p)), "mean_p": float(np.mean(p)),
                     "frac_not_rejected_5pct": float(np.mean(p >= 0.05)),
                     "frac_rejected_1pct": float(np.mean(p < 0.01)), "paths": int(p.size)})
    return rows


def _mean_ci(x: np.ndarray, level: float = 0.95) -> tuple[float, float, float]:
    """Mean and Student-t confidence interval."""
    x = x[np.isfinite(x)]
    m, se = float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))
    half = stats.t.ppf(0.5 + level / 2, x.size - 1) * se
    return m, m - half, m + half


def fbm_bias(n_paths: int = 100, h: float = 0.47, T: int = 1000, seed: int = 0,
             magnitude: float = 10.0, q: MomentGrid | None = None, cap_fraction: float = 0.2,
             scenarios=("none", "spike", "jump")) -> list[dict]:
    """Mean ``H, A, B`` on fBm paths with and without an injected anomaly.

    Each path uses its own ACSR breakpoint and the linear relative estimator;
    the anomaly position is drawn per path.
    """
    q = MomentGrid.uniform() if q is None else q
    params = FbmParams(h=h, T=T)
    est = {s: np.full((n_paths, 3), np.nan) for s in scenarios}
    for i in range(n_paths):
        clean = simulate_fbm(params, seed, i)
        for s in scenarios:
            panel = clean if s == "none" else inject_anomaly(
                clean, AnomalySpec(s, magnitude=magnitude, seed=seed * 100_003 + i))
            cap = default_tau_cap(panel.T, cap_fraction)
            tau = estimate_tau_star(panel.base_returns, max_lag=cap).tau_star
            quad = fit_quadratic(fit_rnsghe_linear(structure_tensor(panel, q, LagGrid.up_to(tau))))
            est[s][i] = (quad.h_hat, quad.a, quad.b)
    rows = []
    for s in scenarios:
        row = {"scenario": s, "paths": n_paths}
        for j, name in enumerate(("H", "A", "B")):
            m, lo, hi = _mean_ci(est[s][:, j])
            row.update({name: m, f"{name}_ci_low": lo, f"{name}_ci_high": hi})
        rows.append(row)
    return rows


def format_table(rows: list[dict], digits: int = 4) -> str:
    """Plain-text rendering of a list of records."""
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[f"{v:.{digits}g}" if isinstance(v, float) else str(v) for v in (r[c] for c in cols)]
             for r in rows]
    width = [max(len(c), *(len(row[j]) for row in cells)) for j, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, width))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, width)) for row in cells]
    return "\n".join(lines)
