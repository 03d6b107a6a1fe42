"""Scaling-exponent estimators on a :class:`StructureTensor`.

Four estimators share one output type:

* ``fit_ghe`` -- classic GHE, log-log OLS of ``Xi`` with a free intercept.
* ``fit_nsghe_linear`` / ``fit_nsghe_nonlinear`` -- regressions of the
  normalized and standardized moments ``xi_norm ~ tau**H_q`` (zero intercept).
* ``fit_rnsghe_linear`` / ``fit_rnsghe_nonlinear`` -- regressions of the
  consecutive-moment ratios ``rel[:, i] ~ tau**H(q_i, q_i+1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InputError, NumericalError
from .series import MomentGrid, StructureTensor


@dataclass(frozen=True)
class ScalingSpectrum:
    """Generalized Hurst exponents and their consecutive-moment increments.

    ``increments[0]`` is ``H(0, q_1) = H_{q_1}``; ``increments[i]`` for
    ``i >= 1`` is ``H_{q_{i+1}} - H_{q_i}``. ``rss_full`` and
    ``rss_restricted`` are log-coordinate residual sums for the full spectrum
    and for the uniscaling model ``H_q = H_{q_1}``.
    """

    method: str
    mode: str
    q: np.ndarray
    h_q: np.ndarray
    increments: np.ndarray
    se_increments: np.ndarray
    rss_full: float
    rss_restricted: float
    n_tau: int
    rss_per_curve: np.ndarray = field(default=None, repr=False)
    info: dict = field(default_factory=dict)

    @property
    def dof(self) -> int:
        return self.n_tau - 1 if self.method != "ghe" else self.n_tau - 2

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "mode": self.mode,
            "q": self.q.tolist(),
            "H_q": self.h_q.tolist(),
            "increments": self.increments.tolist(),
            "se_increments": self.se_increments.tolist(),
            "rss_full": self.rss_full,
            "rss_restricted": self.rss_restricted,
            "n_tau": self.n_tau,
        }


@dataclass(frozen=True)
class QuadraticFit:
    """``H_q = A + B q`` plus the intercept-only fit ``H_q = H``."""

    a: float
    b: float
    se_a: float
    se_b: float
    h_hat: float
    se_h: float
    r_squared: float
    n_q: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("a", "b", "se_a", "se_b", "h_hat", "se_h", "r_squared", "n_q")}


@dataclass(frozen=True)
class FitDiagnostics:
    rss_original_scale: dict
    rss_log_scale: dict
    preferred: str


# -- least-squares helpers ------------------------------------------------------


def _check_tensor(tensor: StructureTensor) -> np.ndarray:
    if tensor.tau.size < 3:
        raise InputError("scaling fits need at least 3 lags")
    x = tensor.log_tau
    if np.ptp(x) == 0:
        raise NumericalError("singular design: all lags equal")
    return x


def _origin_ols(x: np.ndarray, Y: np.ndarray):
    """Column-wise zero-intercept OLS of ``Y`` on ``x``; dof ``n - 1``."""
    sxx = x @ x
    slope = (x @ Y) / sxx
    resid = Y - np.outer(x, slope)
    rss = np.sum(resid**2, axis=0)
    se = np.sqrt(rss / (x.size - 1) / sxx)
    return slope, se, rss


def _intercept_ols(x: np.ndarray, Y: np.ndarray):
    """Column-wise OLS with intercept; dof ``n - 2``."""
    xc = x - x.mean()
    sxx = xc @ xc
    slope = (xc @ Y) / sxx
    intercept = Y.mean(axis=0) - slope * x.mean()
    resid = Y - intercept - np.outer(x, slope)
    rss = np.sum(resid**2, axis=0)
    se = np.sqrt(rss / (x.size - 2) / sxx)
    return slope, intercept, se, rss


def fit_power_curves(tau: np.ndarray, Y: np.ndarray, h0: np.ndarray,
                     gtol: float = 1e-10, max_iter: int = 500):
    """Least squares of every column ``Y[:, j] ~ tau**h[j]`` in original units.

    The stacked curves are solved jointly by a damped Newton iteration. Each
    curve depends on its own exponent only, so the Hessian is diagonal and is
    kept as a vector; its exact value is used where positive, the
    Gauss-Newton term ``J'J`` elsewhere.

    Returns ``h, se, rss_per_curve, info``; ``se`` comes from the linearized
    model with per-curve residual variance on ``n_tau - 1`` degrees of freedom.
    """
    x = np.log(np.asarray(tau, dtype=float))
    h = np.asarray(h0, dtype=float).copy()
    n = x.size

    def parts(h):
        pred = np.exp(np.outer(x, h))
        resid = Y - pred
        jac = x[:, None] * pred  # d pred / d h
        return resid, jac

    resid, jac = parts(h)
    cost = 0.5 * np.sum(resid**2, axis=0)
    grad = -np.sum(jac * resid, axis=0)
    eps = np.finfo(float).eps
    mu = np.full(h.size, 1e-3)
    rejected = np.zeros(h.size, dtype=int)
    done = np.zeros(h.size, dtype=bool)
    it = 0
    while it < max_iter:
        jtj = np.sum(jac**2, axis=0)
        hess = jtj - np.sum(resid * x[:, None] * jac, axis=0)
        curv = np.where(hess > 0, hess, jtj)
        newton = -grad / curv
        # a curve is finished once its gradient is within the rounding error
        # of the residuals, or its step is below the resolution of h
        pred = Y - resid
        g_floor = 4 * eps * np.sum(np.abs(jac) * (np.abs(Y) + np.abs(pred)), axis=0)
        done = (np.abs(newton) <= 4 * eps * np.abs(h)) | (np.abs(grad) <= g_floor)
        if np.linalg.norm(grad) <= gtol or done.all():
            break
        it += 1
        h_new = np.where(done, h, h + newton / (1.0 + mu))
        resid_new, jac_new = parts(h_new)
        cost_new = 0.5 * np.sum(resid_new**2, axis=0)
        grad_new = -np.sum(jac_new * resid_new, axis=0)
        # rounding noise of the cost from the cancellation in Y - pred
        noise = 4 * eps * np.sum(np.abs(resid) * (np.abs(Y) + np.abs(pred)), axis=0)
        flat = np.abs(cost_new - cost) <= noise + 8 * eps * cost
        accept = np.isfinite(cost_new) & ~done & (
            (cost_new < cost) | (flat & (np.abs(grad_new) < np.abs(grad))))
        h = np.where(accept, h_new, h)
        resid = np.where(accept, resid_new, resid)
        jac = np.where(accept, jac_new, jac)
        cost = np.where(accept, cost_new, cost)
        grad = np.where(accept, grad_new, grad)
        mu = np.where(accept, np.maximum(mu / 3.0, 1e-12), mu * 4.0)
        rejected = np.where(accept, 0, rejected + ~done)
        if np.any(rejected > 60):
            raise ConvergenceError("power-law fit stalled", float(np.linalg.norm(grad)), it)
    gnorm = float(np.linalg.norm(grad))
    if gnorm > gtol and not done.all():
        raise ConvergenceError("power-law fit did not converge", gnorm, it)
    status = "gtol" if gnorm <= gtol else "step_resolution"
    jtj = np.sum(jac**2, axis=0)
    if np.any(jtj <= 0) or not np.all(np.isfinite(jtj)):
        raise NumericalError("ill-conditioned Jacobian in power-law fit")
    rss = np.sum(resid**2, axis=0)
    se = np.sqrt(rss / (n - 1) / jtj)
    return h, se, rss, {"iterations": it, "grad_norm": gnorm, "status": status}


def _log_rss(x: np.ndarray, Y_log: np.ndarray, slopes: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Full and restricted (only the first curve sloped) residual sums."""
    per_curve = np.sum((Y_log - np.outer(x, slopes)) ** 2, axis=0)
    full = float(per_curve.sum())
    restricted = float(per_curve[0] + np.sum(Y_log[:, 1:] ** 2))
    return full, restricted, per_curve


# -- estimators ----------------------------------------------------------------


def fit_ghe(tensor: StructureTensor) -> ScalingSpectrum:
    """Baseline GHE: ``ln Xi(tau, q) = q H_q ln tau + ln K_q`` with free intercept."""
    x = _check_tensor(tensor)
    Y = np.log(tensor.xi) / tensor.q  # slope is H_q directly
    h_q, _, _, rss_q = _intercept_ols(x, Y)
    D = Y.copy()
    D[:, 1:] = Y[:, 1:] - Y[:, :-1]
    inc, _, se_inc, rss = _intercept_ols(x, D)
    # restricted: every curve shares the first exponent, intercepts free
    Yr = Y - np.outer(x, np.full(Y.shape[1], h_q[0]))
    rss_r = float(np.sum((Yr - Yr.mean(axis=0)) ** 2))
    return ScalingSpectrum(
        method="ghe", mode="linear", q=tensor.q.copy(), h_q=h_q, increments=inc,
        se_increments=se_inc, rss_full=float(rss_q.sum()), rss_restricted=rss_r,
        n_tau=x.size, rss_per_curve=rss_q,
    )


def fit_nsghe_linear(tensor: StructureTensor) -> ScalingSpectrum:
    """Zero-intercept log-log OLS of each normalized moment ``xi_norm``."""
    x = _check_tensor(tensor)
    Y = np.log(tensor.xi_norm)
    h_q, _, rss_q = _origin_ols(x, Y)
    D = Y.copy()
    D[:, 1:] = Y[:, 1:] - Y[:, :-1]
    inc, se_inc, _ = _origin_ols(x, D)
    rss_r = float(np.sum((Y - np.outer(x, np.full(Y.shape[1], h_q[0]))) ** 2))
    return ScalingSpectrum(
        method="nsghe", mode="linear", q=tensor.q.copy(), h_q=h_q, increments=inc,
        se_increments=se_inc, rss_full=float(rss_q.sum()), rss_restricted=rss_r,
        n_tau=x.size, rss_per_curve=rss_q,
    )


def fit_nsghe_nonlinear(tensor: StructureTensor, **solver) -> ScalingSpectrum:
    """``xi_norm(tau, q) ~ tau**H_q`` fitted in original coordinates.

    Increment standard errors combine the per-moment errors as if independent.
    """
    x = _check_tensor(tensor)
    start = fit_nsghe_linear(tensor)
    h_q, se_h, _, info = fit_power_curves(tensor.tau, tensor.xi_norm, start.h_q, **solver)
    inc = np.concatenate([[h_q[0]], np.diff(h_q)])
    se_inc = np.concatenate([[se_h[0]], np.sqrt(se_h[1:] ** 2 + se_h[:-1] ** 2)])
    Y = np.log(tensor.xi_norm)
    per_curve = np.sum((Y - np.outer(x, h_q)) ** 2, axis=0)
    rss_r = float(np.sum((Y - np.outer(x, np.full(h_q.size, h_q[0]))) ** 2))
    return ScalingSpectrum(
        method="nsghe", mode="nonlinear", q=tensor.q.copy(), h_q=h_q, increments=inc,
        se_increments=se_inc, rss_full=float(per_curve.sum()), rss_restricted=rss_r,
        n_tau=x.size, rss_per_curve=per_curve, info=info,
    )


def fit_rnsghe_linear(tensor: StructureTensor) -> ScalingSpectrum:
    """Zero-intercept log-log OLS of every relative moment curve.

    The slope of ``ln rel[:, i]`` on ``ln tau`` estimates the increment
    ``H(q_i, q_{i+1})``; the running sum gives ``H_q``.
    """
    x = _check_tensor(tensor)
    Y = np.log(tensor.rel)
    inc, se, _ = _origin_ols(x, Y)
    full, restricted, per_curve = _log_rss(x, Y, inc)
    return ScalingSpectrum(
        method="rnsghe", mode="linear", q=tensor.q.copy(), h_q=np.cumsum(inc),
        increments=inc, se_increments=se, rss_full=full, rss_restricted=restricted,
        n_tau=x.size, rss_per_curve=per_curve,
    )


def fit_rnsghe_nonlinear(tensor: StructureTensor, start: ScalingSpectrum | None = None,
                         **solver) -> ScalingSpectrum:
    """Stacked nonlinear least squares ``rel[:, i] ~ tau**H(q_i, q_{i+1})``.

    Starts from the linear solution. The residual sums used by the F-test
    are taken on the log of the fitted curves.
    """
    x = _check_tensor(tensor)
    if start is None:
        start = fit_rnsghe_linear(tensor)
    inc, se, _, info = fit_power_curves(tensor.tau, tensor.rel, start.increments, **solver)
    full, restricted, per_curve = _log_rss(x, np.log(tensor.rel), inc)
    return ScalingSpectrum(
        method="rnsghe", mode="nonlinear", q=tensor.q.copy(), h_q=np.cumsum(inc),
        increments=inc, se_increments=se, rss_full=full, rss_restricted=restricted,
        n_tau=x.size, rss_per_curve=per_curve, info=info,
    )


ESTIMATORS = {
    "GHE": fit_ghe,
    "NSGHE_L": fit_nsghe_linear,
    "NSGHE_NL": fit_nsghe_nonlinear,
    "RNSGHE_L": fit_rnsghe_linear,
    "RNSGHE_NL": fit_rnsghe_nonlinear,
}


# -- spectrum summaries ----------------------------------------------------------


def fit_quadratic(spectrum: ScalingSpectrum | np.ndarray, q: MomentGrid | np.ndarray | None = None) -> QuadraticFit:
    """OLS of ``H_q = A + B q`` with homoskedastic errors, and ``H_q = H``.

    ``spectrum`` may be a :class:`ScalingSpectrum` or a plain array of
    ``H_q`` values (then ``q`` is required).
    """
    if isinstance(spectrum, ScalingSpectrum):
        h = spectrum.h_q
        qs = spectrum.q if q is None else (q.q_values if isinstance(q, MomentGrid) else np.asarray(q, float))
    else:
        h = np.asarray(spectrum, dtype=float)
        if q is None:
            raise InputError("moment grid required with a bare H_q array")
        qs = q.q_values if isinstance(q, MomentGrid) else np.asarray(q, float)
    m = qs.size
    if m != h.size:
        raise InputError("H_q and q differ in length")
    if np.unique(qs).size < 3:
        raise InputError("quadratic fit needs at least 3 distinct moments")
    qc = qs - qs.mean()
    sqq = qc @ qc
    b = float(qc @ h / sqq)
    a = float(h.mean() - b * qs.mean())
    resid = h - a - b * qs
    s2 = float(resid @ resid) / (m - 2)
    se_b = np.sqrt(s2 / sqq)
    se_a = np.sqrt(s2 * (1.0 / m + qs.mean() ** 2 / sqq))
    h_hat = float(h.mean())
    tss = float(np.sum((h - h_hat) ** 2))
    se_h = np.sqrt(tss / (m - 1) / m)
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 1.0
    return QuadraticFit(a=a, b=b, se_a=float(se_a), se_b=float(se_b), h_hat=h_hat,
                        se_h=float(se_h), r_squared=r2, n_q=m)


def compare_fits(linear: ScalingSpectrum, nonlinear: ScalingSpectrum,
                 tensor: StructureTensor) -> FitDiagnostics:
    """Residual sums of both fits against the observed relative moments.

    The fit with the smaller original-coordinate RSS is preferred; ties go
    to the linear fit.
    """
    if linear.n_tau != tensor.tau.size or nonlinear.n_tau != tensor.tau.size:
        raise InputError("fits and tensor use different lag grids")
    if linear.q.size != tensor.q.size or nonlinear.q.size != tensor.q.size:
        raise InputError("fits and tensor use different moment grids")
    x = tensor.log_tau
    orig, logs = {}, {}
    for name, spec in (("linear", linear), ("nonlinear", nonlinear)):
        pred = np.exp(np.outer(x, spec.increments))
        orig[name] = float(np.sum((tensor.rel - pred) ** 2))
        logs[name] = float(np.sum((np.log(tensor.rel) - np.log(pred)) ** 2))
    preferred = "nonlinear" if orig["nonlinear"] < orig["linear"] else "linear"
    return FitDiagnostics(rss_original_scale=orig, rss_log_scale=logs, preferred=preferred)
