"""Synthetic paths with known scaling: multifractal random walk, fractional
Brownian motion, and anomaly injection."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .series import MomentGrid, ReturnPanel

log = logging.getLogger(__name__)


def path_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for path ``index`` of an ensemble seeded by ``seed``.

    Streams depend only on ``(seed, index)``, so ensembles can be built in any
    order or in parallel and still reproduce.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


# -- stationary Gaussian sampling ------------------------------------------------


def circulant_eigenvalues(cov: np.ndarray) -> tuple[np.ndarray, int]:
    """Eigenvalues of the minimal circulant matrix embedding ``cov[0..n-1]``."""
    row = np.concatenate([cov, cov[-2:0:-1]])
    return np.fft.rfft(row).real, row.size


def stationary_gaussian(cov: np.ndarray, rng: np.random.Generator, size: int | None = None,
                        tol: float = 1e-10) -> np.ndarray:
    """Exact sample of a zero-mean stationary Gaussian sequence.

    ``cov[k]`` is the autocovariance at lag ``k``; ``len(cov)`` samples are
    returned (or ``size`` rows of them). Uses circulant embedding and falls back
    to an eigendecomposition of the dense Toeplitz matrix when the embedding is
    not nonnegative definite.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.size
    shape = (n,) if size is None else (size, n)
    if n == 1:
        return math.sqrt(max(cov[0], 0.0)) * rng.standard_normal(shape)
    eig, m = circulant_eigenvalues(cov)
    scale = max(abs(cov[0]), 1e-300)
    if eig.min() < -tol * scale * m:
        warnings.warn("circulant embedding is not nonnegative definite; "
                      "using dense factorization", RuntimeWarning, stacklevel=2)
        return _dense_gaussian(cov, rng, shape)
    eig = np.clip(eig, 0.0, None)
    # complex Gaussian on the rfft half-spectrum; real part of the full ifft
    k = eig.size
    z = rng.standard_normal(shape[:-1] + (k,)) + 1j * rng.standard_normal(shape[:-1] + (k,))
    z[..., 0] = z[..., 0].real * math.sqrt(2.0)
    if m % 2 == 0:
        z[..., -1] = z[..., -1].real * math.sqrt(2.0)
    w = np.sqrt(eig / (2.0 * m)) * z
    x = np.fft.irfft(w, n=m) * m
    return x[..., :n]


def _dense_gaussian(cov, rng, shape):
    from scipy.linalg import toeplitz

    n = cov.size
    vals, vecs = np.linalg.eigh(toeplitz(cov))
    if vals.min() < -1e-8 * max(abs(cov[0]), 1e-300) * n:
        raise NumericalError("covariance sequence is not positive semidefinite")
    factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
    z = rng.standard_normal(shape)
    return z @ factor.T


# -- multifractal random walk ---------------------------------------------------


@dataclass(frozen=True)
class MrwParams:
    lam: float
    L: float = 250.0
    sigma: float = 1.0
    T: int = 10000
    delta_t: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise InputError("intermittency lambda must be >= 0")
        if self.L < 1:
            raise InputError("autocorrelation length L must be >= 1")
        if self.sigma <= 0:
            raise InputError("sigma must be positive")
        if self.T < 2:
            raise InputError("path length T must be >= 2")
        if self.delta_t <= 0:
            raise InputError("delta_t must be positive")
        if self.T <= self.L / self.delta_t:
            log.info("MRW path length T=%d does not exceed L/dt=%g", self.T, self.L / self.delta_t)

    @property
    def omega_mean(self) -> float:
        return -self.lam**2 * math.log(self.L / self.delta_t)

    @property
    def omega_var(self) -> float:
        return self.lam**2 * math.log(self.L / self.delta_t)


def mrw_omega_covariance(lam: float, L: float, n: int, delta_t: float = 1.0) -> np.ndarray:
    """``lam**2 * ln(L / ((k + 1) dt))`` for ``k < L/dt``, zero beyond."""
    k = np.arange(n, dtype=float)
    rho = np.ones(n)
    inside = k < L / delta_t
    rho[inside] = L / ((k[inside] + 1.0) * delta_t)
    return lam**2 * np.log(rho)


def mrw_increments(params: MrwParams, rng: np.random.Generator, n_paths: int | None = None) -> np.ndarray:
    """Daily MRW increments ``eps_k * exp(omega_k)``.

    The log-volatility field is embedded on at least ``L/dt`` lags so that its
    covariance has reached zero inside the circulant block.
    """
    n = params.T
    n_embed = max(n, int(math.ceil(params.L / params.delta_t)) + 1)
    cov = mrw_omega_covariance(params.lam, params.L, n_embed, params.delta_t)
    if params.lam == 0:
        shape = (n,) if n_paths is None else (n_paths, n)
        omega = np.zeros(shape)
    else:
        omega = stationary_gaussian(cov, rng, size=n_paths)[..., :n]
    omega = omega + params.omega_mean
    eps = rng.standard_normal(omega.shape) * (params.sigma * math.sqrt(params.delta_t))
    return eps * np.exp(omega)


def simulate_mrw(params: MrwParams, seed: int, index: int = 0) -> ReturnPanel:
    """One MRW path: ``T`` increments, ``T + 1`` log-prices starting at 0."""
    rng = path_rng(seed, index)
    return ReturnPanel.from_returns(mrw_increments(params, rng))


def theoretical_spectrum(lam: float, q: MomentGrid | np.ndarray | float) -> dict:
    """Continuous-limit MRW scaling: ``zeta(q) = (lam^2 + 1/2) q - lam^2 q^2 / 2``."""
    if lam < 0:
        raise InputError("lambda must be >= 0")
    qs = q.q_values if isinstance(q, MomentGrid) else np.asarray(q, dtype=float)
    a = lam**2 + 0.5
    b = -(lam**2) / 2.0
    zeta = a * qs + b * qs**2
    return {"zeta_q": zeta, "H_q": a + b * qs, "A": a, "B": b}


# -- fractional Brownian motion -------------------------------------------------


@dataclass(frozen=True)
class FbmParams:
    h: float
    T: int = 1000
    sigma: float = 1.0

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise InputError("Hurst exponent must lie in (0, 1)")
        if self.T < 2:
            raise InputError("length T must be >= 2")
        if self.sigma <= 0:
            raise InputError("sigma must be positive")


def fgn_autocovariance(h: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=float)
    return 0.5 * (np.abs(k + 1) ** (2 * h) - 2 * k ** (2 * h) + np.abs(k - 1) ** (2 * h))


def simulate_fbm(params: FbmParams, seed: int, index: int = 0) -> ReturnPanel:
    """Fractional Brownian motion with exact fGn increments (Davies-Harte)."""
    rng = path_rng(seed, index)
    fgn = stationary_gaussian(fgn_autocovariance(params.h, params.T), rng)
    return ReturnPanel.from_returns(params.sigma * fgn)


# -- anomalies ------------------------------------------------------------------


@dataclass(frozen=True)
class AnomalySpec:
    """An exogenous anomaly to add to a log-price path.

    ``magnitude`` is in units of the standard deviation of daily returns.
    ``position`` is a log-price index or ``"random"`` (drawn away from the
    edges with ``seed``).
    """

    kind: str
    position: int | str = "random"
    magnitude: float = 10.0
    seed: int = 0
    width: int = 1
    target_kurtosis: float = 1000.0

    def __post_init__(self):
        if self.kind not in ("spike", "jump", "contamination"):
            raise InputError(f"unknown anomaly kind {self.kind!r}")
        if not math.isfinite(self.magnitude):
            raise InputError("anomaly magnitude must be finite")
        if self.width < 1:
            raise InputError("spike width must be >= 1")


def resolve_position(spec: AnomalySpec, T: int) -> int:
    if spec.position == "random":
        margin = max(2, T // 20)
        return int(path_rng(spec.seed, 0).integers(margin, T - margin))
    pos = int(spec.position)
    if not 1 <= pos <= T - 1:
        raise InputError(f"anomaly position {pos} outside [1, {T - 1}]")
    return pos


def inject_anomaly(panel: ReturnPanel, spec: AnomalySpec) -> ReturnPanel:
    """Return a copy of ``panel`` with the anomaly added to its log-prices.

    spike
        ``width`` log-prices displaced by ``magnitude`` daily std devs, then
        reverted.
    jump
        permanent level shift of every log-price from ``position`` on.
    contamination
        additive sparse heavy-tailed noise; its scale is the daily std times
        ``magnitude`` and its sample kurtosis exceeds ``target_kurtosis``.
    """
    p = panel.log_prices.copy()
    T = p.size
    sd = float(np.std(np.diff(p), ddof=1)) if T > 2 else 1.0
    size = spec.magnitude * sd
    if spec.kind == "contamination":
        return ReturnPanel(p + _contamination_noise(T, size, spec))
    pos = resolve_position(spec, T)
    if spec.kind == "spike":
        p[pos:min(T, pos + spec.width)] += size
    else:
        p[pos:] += size
    return ReturnPanel(p)


def _contamination_noise(T: int, scale: float, spec: AnomalySpec) -> np.ndarray:
    # Student-t(1.5) draws on a sparse random subset; resampled until the
    # kurtosis target is met
    rng = path_rng(spec.seed, 1)
    rate = 0.01
    for _ in range(100):
        noise = np.zeros(T)
        hits = rng.random(T) < rate
        hits[rng.integers(0, T)] = True
        noise[hits] = rng.standard_t(1.5, size=hits.sum())
        dev = noise - noise.mean()
        m2 = np.mean(dev**2)
        if m2 > 0 and np.mean(dev**4) / m2**2 > spec.target_kurtosis:
            return scale * noise / np.std(noise)
        rate = max(rate * 0.7, 1.0 / T)
    raise NumericalError("could not reach the contamination kurtosis target; increase T")
