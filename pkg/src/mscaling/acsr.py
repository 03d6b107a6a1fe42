"""Autocorrelation Segmented Regression: pick the largest useful aggregation
lag from the decay of the absolute-return autocorrelation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError


@dataclass(frozen=True)
class AcfCurve:
    lags: np.ndarray
    rho: np.ndarray


@dataclass(frozen=True)
class AcsrFit:
    alpha: float
    beta: float
    tau_star: int
    ssr: float
    max_lag: int
    log_scale: bool = True

    @property
    def log_breakpoint(self) -> float:
        return math.log(self.tau_star)

    @property
    def boundary_hit(self) -> bool:
        return self.tau_star >= self.max_lag - 1

    @property
    def plateau(self) -> float:
        x = self.log_breakpoint if self.log_scale else float(self.tau_star)
        return self.alpha + self.beta * x

    def to_dict(self) -> dict:
        return {
            "tau_star": int(self.tau_star),
            "log_tau_star": self.log_breakpoint,
            "alpha": self.alpha,
            "beta": self.beta,
            "ssr": self.ssr,
            "boundary_hit": self.boundary_hit,
        }


def autocorrelation(series, max_lag: int, covariance: bool = False) -> AcfCurve:
    """Sample autocorrelation at lags ``1..max_lag``.

    Uses the global mean and the ``1/n`` normalisation, which keeps the
    sequence nonnegative definite and ``|rho| <= 1``. Computed by FFT.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    max_lag = int(max_lag)
    if max_lag < 1 or n <= max_lag + 1:
        raise InputError(f"max_lag={max_lag} out of range for a series of length {n}")
    dev = x - x.mean()
    var = np.mean(dev**2)
    if not var > 0:
        raise NumericalError("zero-variance series has no autocorrelation")
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(dev, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n
    rho = acov[1:] if covariance else acov[1:] / acov[0]
    return AcfCurve(lags=np.arange(1, max_lag + 1), rho=rho)


def _ssr_by_breakpoint(x: np.ndarray, y: np.ndarray, candidates: np.ndarray, fixed_alpha: bool):
    """Residual sum of squares of ``y ~ a + b * min(x, x[c-1])`` for every
    candidate breakpoint ``c`` (1-based lag), via prefix sums."""
    n = x.size
    cx = np.concatenate([[0.0], np.cumsum(x)])
    cxx = np.concatenate([[0.0], np.cumsum(x * x)])
    cxy = np.concatenate([[0.0], np.cumsum(x * y)])
    cy = np.concatenate([[0.0], np.cumsum(y)])
    k = candidates - 1  # points with index < k keep their own regressor
    xb = x[k]
    tail = n - k
    sx = cx[k] + tail * xb
    sxx = cxx[k] + tail * xb**2
    sxy = cxy[k] + xb * (cy[n] - cy[k])
    if fixed_alpha:
        # y - y[0] = b * (x' - x[0]); x[0] is never past the breakpoint
        y0, x0 = y[0], x[0]
        syy = np.sum((y - y0) ** 2)
        u_xx = sxx - 2 * x0 * sx + n * x0**2
        u_xy = sxy - x0 * cy[n] - y0 * sx + n * x0 * y0
        beta = u_xy / u_xx
        alpha = y0 - beta * x0
        ssr = syy - beta * u_xy
    else:
        sy, syy = cy[n], np.sum(y * y)
        vxx = sxx - sx**2 / n
        vxy = sxy - sx * sy / n
        beta = vxy / vxx
        alpha = (sy - beta * sx) / n
        ssr = (syy - sy**2 / n) - beta * vxy
    return ssr, alpha, beta


def acsr_fit(acf: AcfCurve, log_scale: bool = True, fixed_alpha: bool = False) -> AcsrFit:
    """Fit a sloped-then-flat two-segment model to an autocorrelation curve.

    The regressor is ``ln(tau)`` (or ``tau`` when ``log_scale`` is False). Every
    integer breakpoint leaving at least two lags on each side is tried; the
    one with the smallest residual sum of squares wins (first on ties). With
    ``fixed_alpha`` the intercept is pinned so the fit passes through the
    lag-1 autocorrelation.
    """
    lags = np.asarray(acf.lags)
    y = np.asarray(acf.rho, dtype=float)
    n = y.size
    if n < 4:
        raise InputError("ACSR needs at least 4 autocorrelation lags")
    if not np.array_equal(lags, np.arange(1, n + 1)):
        raise InputError("ACSR expects contiguous lags 1..max_lag")
    x = np.log(lags.astype(float)) if log_scale else lags.astype(float)
    candidates = np.arange(3, n)
    ssr, alpha, beta = _ssr_by_breakpoint(x, y, candidates, fixed_alpha)
    best = int(np.argmin(ssr))
    c = int(candidates[best])
    # refit the winner directly for an accurate residual
    xc = np.minimum(x, x[c - 1])
    if fixed_alpha:
        b = np.dot(xc - x[0], y - y[0]) / np.dot(xc - x[0], xc - x[0])
        a = y[0] - b * x[0]
    else:
        design = np.column_stack([np.ones(n), xc])
        (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (a + b * xc)
    return AcsrFit(alpha=float(a), beta=float(b), tau_star=c, ssr=float(resid @ resid),
                   max_lag=n, log_scale=log_scale)


def estimate_tau_star(returns, max_lag: int | None = None, cap_fraction: float = 0.2,
                      **kwargs) -> AcsrFit:
    """ACSR on the absolute returns; ``max_lag`` defaults to ``floor(n * cap_fraction)``."""
    r = np.asarray(returns, dtype=float)
    if max_lag is None:
        max_lag = int(math.floor((r.size + 1) * cap_fraction))
    covariance = kwargs.pop("covariance", False)
    return acsr_fit(autocorrelation(np.abs(r), max_lag, covariance=covariance), **kwargs)


def bootstrap_mean_ci(values, n_resamples: int = 200_000, level: float = 0.95,
                      seed: int = 0, chunk: int = 20_000) -> tuple[float, float, float]:
    """Mean and percentile bootstrap confidence interval of the mean."""
    v = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    means = np.empty(n_resamples)
    for start in range(0, n_resamples, chunk):
        stop = min(n_resamples, start + chunk)
        idx = rng.integers(0, v.size, size=(stop - start, v.size))
        means[start:stop] = v[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(v.mean()), float(lo), float(hi)
