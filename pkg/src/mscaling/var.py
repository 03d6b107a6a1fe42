"""Value at Risk: historical and Gaussian estimates, power-law time scaling,
and Monte Carlo VaR on multifractal random walks calibrated to the data."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .acsr import AcsrFit
from .errors import CalibrationError, InputError
from .generators import MrwParams, mrw_increments, path_rng
from .scaling import QuadraticFit
from .series import ReturnPanel

log = logging.getLogger(__name__)

YEAR = 250
_LAMBDA2_TOL = 1e-12


@dataclass(frozen=True)
class VarEstimate:
    """``value`` is the alpha-quantile of ``tau``-day log-returns
    (``alpha = 1 - confidence``), usually negative."""

    value: float
    tau: int
    confidence: float
    method: str

    def __post_init__(self):
        if not 0 < self.confidence < 1:
            raise InputError("confidence must lie in (0, 1)")

    @property
    def alpha(self) -> float:
        return 1.0 - self.confidence


def _alpha(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise InputError("confidence must lie in (0, 1)")
    return 1.0 - confidence


def historical_var(returns, confidence: float = 0.95, tau: int = 1) -> VarEstimate:
    """Empirical alpha-quantile, linear interpolation between order statistics."""
    r = np.asarray(returns, dtype=float)
    if r.size < 20:
        raise InputError(f"historical VaR needs at least 20 returns, got {r.size}")
    q = float(np.quantile(r, _alpha(confidence), method="linear"))
    return VarEstimate(q, tau, confidence, "historical")


def gaussian_var(mu: float, sigma: float, confidence: float = 0.95, tau: int = 1) -> VarEstimate:
    """``mu + z_alpha * sigma``."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    z = stats.norm.ppf(_alpha(confidence))
    return VarEstimate(float(mu + z * sigma), tau, confidence, "gaussian")


def scale_var(daily: VarEstimate, tau: int, k: float) -> VarEstimate:
    """Scale a one-day VaR to ``tau`` days by ``tau**k``."""
    if daily.tau != 1:
        raise InputError("scale_var expects a one-day VaR")
    if tau < 1:
        raise InputError("horizon must be >= 1 day")
    return VarEstimate(daily.value * tau**k, tau, daily.confidence, f"scaled:{daily.method}")


def relative_error(true_var: VarEstimate | float, scaled: VarEstimate | float) -> float:
    """``|true - scaled| / |true|``."""
    t = true_var.value if isinstance(true_var, VarEstimate) else float(true_var)
    s = scaled.value if isinstance(scaled, VarEstimate) else float(scaled)
    if t == 0:
        raise InputError("relative error undefined for a zero reference VaR")
    return abs(t - s) / abs(t)


def annual_var_direct(panel: ReturnPanel, confidence: float = 0.95, horizon: int = YEAR) -> VarEstimate:
    """Historical VaR of overlapping ``horizon``-day returns."""
    if panel.T <= 2 * horizon:
        raise InputError(f"direct {horizon}-day VaR needs more than {2 * horizon} prices, got {panel.T}")
    est = historical_var(panel.log_returns(horizon), confidence)
    return VarEstimate(est.value, horizon, confidence, "historical_direct")


@dataclass(frozen=True)
class CalibratedMrw:
    sigma2: float
    L: float
    lambda_a: float
    lambda_b: float

    def to_dict(self) -> dict:
        return {"sigma2": self.sigma2, "L": self.L, "lambda_a": self.lambda_a, "lambda_b": self.lambda_b}


def calibrate_mrw(quad: QuadraticFit, acsr: AcsrFit | int | float, returns) -> CalibratedMrw:
    """Invert ``A = lambda^2 + 1/2`` and ``B = -lambda^2 / 2``.

    ``L`` is the ACSR breakpoint (or a number) and ``sigma2`` the variance of
    daily returns.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise InputError("calibration needs at least 2 returns")
    la2, lb2 = quad.a - 0.5, -2.0 * quad.b
    # round-off around an exact Brownian spectrum is not infeasibility
    la2, lb2 = (0.0 if abs(v) <= _LAMBDA2_TOL else v for v in (la2, lb2))
    if la2 < 0 or lb2 < 0:
        raise CalibrationError(
            f"no real intermittency: A - 1/2 = {la2:.4g}, -2B = {lb2:.4g} (need both >= 0)")
    L = float(acsr.tau_star if isinstance(acsr, AcsrFit) else acsr)
    if L < 1:
        raise InputError("correlation length must be >= 1")
    return CalibratedMrw(sigma2=float(np.var(r, ddof=1)), L=L,
                         lambda_a=math.sqrt(la2), lambda_b=math.sqrt(lb2))


def simulate_annual_returns(lam: float, L: float, sigma: float, paths: int, seed: int,
                            horizon: int = YEAR, batch: int = 2000) -> np.ndarray:
    """Sum of ``horizon`` MRW increments on each of ``paths`` paths.

    Batch ``b`` draws from substream ``b`` of ``seed``, so results depend only
    on ``(seed, batch)`` and not on how batches are scheduled.
    """
    if paths < 1:
        raise InputError("need at least one path")
    params = MrwParams(lam=lam, L=L, sigma=sigma, T=horizon)
    out = np.empty(paths)
    for b, start in enumerate(range(0, paths, batch)):
        m = min(batch, paths - start)
        out[start:start + m] = mrw_increments(params, path_rng(seed, b), n_paths=m).sum(axis=1)
    return out


def quantile_se(sample: np.ndarray, alpha: float, n_boot: int = 200, seed: int = 0) -> float:
    """Bootstrap standard error of the alpha-quantile."""
    rng = np.random.default_rng(seed)
    boots = [np.quantile(sample[rng.integers(0, sample.size, sample.size)], alpha)
             for _ in range(n_boot)]
    return float(np.std(boots, ddof=1))


def msvar(calib: CalibratedMrw, horizon: int = YEAR, paths: int = 100_000,
          confidence: float = 0.95, seed: int = 0, which: str = "a") -> VarEstimate:
    """alpha-quantile of simulated ``horizon``-day MRW returns.

    ``which`` selects ``lambda_a`` or ``lambda_b``; both use the same seed.
    """
    if which not in ("a", "b"):
        raise InputError("which must be 'a' or 'b'")
    lam = calib.lambda_a if which == "a" else calib.lambda_b
    alpha = _alpha(confidence)
    annual = simulate_annual_returns(lam, calib.L, math.sqrt(calib.sigma2), paths, seed, horizon)
    value = float(np.quantile(annual, alpha))
    log.debug("MSVaR lambda_%s=%.4f: return quantile %.6g, loss quantile %.6g",
              which, lam, value, float(np.quantile(-annual, confidence)))
    return VarEstimate(value, horizon, confidence, f"msvar_lambda_{which}")


@dataclass(frozen=True)
class MsVarReport:
    hvar_daily: VarEstimate
    gvar_daily: VarEstimate
    hvar_annual_direct: VarEstimate
    scaled_05: dict
    scaled_H: dict
    msvar_lambda_a: VarEstimate | None
    msvar_lambda_b: VarEstimate | None
    relative_errors: dict
    calibration: CalibratedMrw | None = None
    h_hat: float = 0.5
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        c = self.calibration
        return {
            "hvar_1d": self.hvar_daily.value,
            "gvar_1d": self.gvar_daily.value,
            "hvar_250d_direct": self.hvar_annual_direct.value,
            "scaled_sqrt": {k: v.value for k, v in self.scaled_05.items()},
            "scaled_H": {k: v.value for k, v in self.scaled_H.items()},
            "msvar_lambdaA": None if self.msvar_lambda_a is None else self.msvar_lambda_a.value,
            "msvar_lambdaB": None if self.msvar_lambda_b is None else self.msvar_lambda_b.value,
            "re_sqrt": {k: v for k, v in self.relative_errors.items() if k.endswith("sqrt")},
            "re_H": {k: v for k, v in self.relative_errors.items() if k.endswith("_H")},
            "lambda_a": None if c is None else c.lambda_a,
            "lambda_b": None if c is None else c.lambda_b,
            "sigma2": None if c is None else c.sigma2,
            "L": None if c is None else c.L,
            "H_hat": self.h_hat,
            "notes": list(self.notes),
        }


def var_report(panel: ReturnPanel, quad: QuadraticFit, acsr: AcsrFit | int, confidence: float = 0.95,
               paths: int = 100_000, seed: int = 0, horizon: int = YEAR) -> MsVarReport:
    """Daily, scaled, direct annual and Monte Carlo VaR of one series.

    The scaling exponent is the intercept-only ``H``; an infeasible MRW
    calibration leaves the MSVaR fields empty and records why.
    """
    r = panel.base_returns
    hvar = historical_var(r, confidence)
    gvar = gaussian_var(float(r.mean()), float(r.std(ddof=1)), confidence)
    direct = annual_var_direct(panel, confidence, horizon)
    h = quad.h_hat
    sq = {"hvar": scale_var(hvar, horizon, 0.5), "gvar": scale_var(gvar, horizon, 0.5)}
    sh = {"hvar": scale_var(hvar, horizon, h), "gvar": scale_var(gvar, horizon, h)}
    re = {}
    for k in ("hvar", "gvar"):
        re[f"{k}_sqrt"] = relative_error(direct, sq[k])
        re[f"{k}_H"] = relative_error(direct, sh[k])
    notes = []
    try:
        calib = calibrate_mrw(quad, acsr, r)
    except CalibrationError as exc:
        calib, ma, mb = None, None, None
        notes.append(str(exc))
    else:
        ma = msvar(calib, horizon, paths, confidence, seed, "a")
        mb = msvar(calib, horizon, paths, confidence, seed, "b")
        re["msvar_a"] = relative_error(direct, ma)
        re["msvar_b"] = relative_error(direct, mb)
    return MsVarReport(hvar, gvar, direct, sq, sh, ma, mb, re, calib, h, notes)
