"""Price ingestion, log-returns and the structure-function tensor."""
from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _backend
from .errors import InputError, NumericalError


@dataclass(frozen=True)
class PriceSeries:
    """Close prices indexed by trading date."""

    timestamps: tuple[dt.date, ...]
    prices: np.ndarray
    ticker: str = ""

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 1 or prices.size < 2:
            raise InputError("a price series needs at least 2 observations")
        if len(self.timestamps) != prices.size:
            raise InputError("timestamps and prices differ in length")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise InputError("prices must be finite and strictly positive")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise InputError("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return self.prices.size

    def panel(self) -> ReturnPanel:
        return ReturnPanel(np.log(self.prices))


@dataclass(frozen=True)
class ReturnPanel:
    """Log-prices ``p_t`` with access to returns at any aggregation."""

    log_prices: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.log_prices, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise InputError("a return panel needs at least 2 log-prices")
        if not np.all(np.isfinite(p)):
            raise InputError("log-prices must be finite")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "log_prices", p)

    @classmethod
    def from_returns(cls, returns, start: float = 0.0) -> ReturnPanel:
        r = np.asarray(returns, dtype=float)
        return cls(np.concatenate([[start], start + np.cumsum(r)]))

    @property
    def T(self) -> int:
        return self.log_prices.size

    @property
    def base_returns(self) -> np.ndarray:
        return np.diff(self.log_prices)

    def log_returns(self, tau: int = 1) -> np.ndarray:
        return log_returns(self, tau)


def log_returns(panel: ReturnPanel, tau: int = 1) -> np.ndarray:
    """Overlapping ``tau``-day log-returns ``p[t+tau] - p[t]`` (length ``T - tau``)."""
    tau = int(tau)
    if tau < 1 or tau > panel.T - 1:
        raise InputError(f"tau={tau} out of range [1, {panel.T - 1}]")
    p = panel.log_prices
    return p[tau:] - p[:-tau]


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip()[:10])


def load_csv(
    path: str | Path,
    date_column: str = "date",
    price_column: str = "close",
    ticker_column: str | None = "ticker",
) -> PriceSeries:
    """Read a ``date,close[,ticker]`` CSV into a :class:`PriceSeries`.

    Rows are sorted by date. Errors carry the 1-based line number of the
    offending row (the header is line 1).
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    rows: list[tuple[dt.date, float, int]] = []
    ticker = ""
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file")
        names = {n.strip().lower(): n for n in reader.fieldnames}
        for col in (date_column, price_column):
            if col.lower() not in names:
                raise InputError(f"{path}: missing column {col!r}")
        dcol, pcol = names[date_column.lower()], names[price_column.lower()]
        tcol = names.get(ticker_column.lower()) if ticker_column else None
        for line_no, row in enumerate(reader, start=2):
            try:
                date = _parse_date(row[dcol])
                price = float(row[pcol])
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}: unparseable row at line {line_no}: {exc}") from None
            if not math.isfinite(price) or price <= 0:
                raise InputError(f"{path}: non-positive price {price} at line {line_no}")
            if tcol and row.get(tcol):
                ticker = row[tcol].strip()
            rows.append((date, price, line_no))
    rows.sort(key=lambda r: r[0])
    for a, b in zip(rows, rows[1:]):
        if a[0] == b[0]:
            raise InputError(f"{path}: duplicate date {b[0]} at line {b[2]}")
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 rows, got {len(rows)}")
    return PriceSeries(
        timestamps=tuple(r[0] for r in rows),
        prices=np.array([r[1] for r in rows]),
        ticker=ticker or path.stem,
    )


def summary_stats(returns) -> dict[str, float]:
    """Moment statistics of a return sample; kurtosis is the raw fourth
    standardized moment (3 for a Gaussian)."""
    r = np.asarray(returns, dtype=float)
    if r.size < 4:
        raise InputError("summary statistics need at least 4 observations")
    mean = r.mean()
    dev = r - mean
    m2 = np.mean(dev**2)
    if m2 <= 0 or m2 < (np.finfo(float).eps * max(1.0, abs(mean))) ** 2:
        raise NumericalError("zero-variance input")
    return {
        "mean": float(mean),
        "std": float(r.std(ddof=1)),
        "skewness": float(np.mean(dev**3) / m2**1.5),
        "kurtosis": float(np.mean(dev**4) / m2**2),
        "min": float(r.min()),
        "max": float(r.max()),
        "n": int(r.size),
    }


@dataclass(frozen=True)
class MomentGrid:
    q_values: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_values, dtype=float)
        if q.ndim != 1 or q.size < 1:
            raise InputError("moment grid is empty")
        if q[0] <= 0 or np.any(np.diff(q) <= 0):
            raise InputError("moments must be positive and strictly increasing")
        object.__setattr__(self, "q_values", q)

    @classmethod
    def uniform(cls, q_min: float = 0.02, q_max: float = 1.0, step: float = 0.02) -> MomentGrid:
        m = int(round((q_max - q_min) / step)) + 1
        return cls(q_min + step * np.arange(m))

    @property
    def step(self) -> float:
        return float(np.diff(self.q_values).mean()) if self.q_values.size > 1 else 0.0

    def __len__(self) -> int:
        return self.q_values.size


@dataclass(frozen=True)
class LagGrid:
    tau_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tau_values)
        if t.ndim != 1 or t.size < 1:
            raise InputError("lag grid is empty")
        if not np.all(t == np.round(t)) or t[0] < 1 or np.any(np.diff(t) <= 0):
            raise InputError("lags must be increasing positive integers")
        object.__setattr__(self, "tau_values", t.astype(np.int64))

    @classmethod
    def up_to(cls, tau_max: int) -> LagGrid:
        return cls(np.arange(1, int(tau_max) + 1))

    @property
    def tau_max(self) -> int:
        return int(self.tau_values[-1])

    def __len__(self) -> int:
        return self.tau_values.size


def default_tau_cap(T: int, fraction: float = 0.2) -> int:
    return max(2, int(math.floor(T * fraction)))


@dataclass(frozen=True)
class StructureTensor:
    """Structure functions over a (tau, q) grid.

    ``rel[:, 0]`` is ``xi_norm[:, 0]`` itself: the q=0 reference moment is
    taken as identically 1.
    """

    tau: np.ndarray
    q: np.ndarray
    xi: np.ndarray
    k_q: np.ndarray
    xi_std: np.ndarray
    xi_norm: np.ndarray
    rel: np.ndarray
    overlapping: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def log_tau(self) -> np.ndarray:
        return np.log(self.tau.astype(float))

    def to_dict(self) -> dict:
        return {
            "tau": self.tau.tolist(),
            "q": self.q.tolist(),
            "xi": self.xi.tolist(),
            "xi_std": self.xi_std.tolist(),
            "xi_norm": self.xi_norm.tolist(),
            "rel": self.rel.tolist(),
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_csv(self, path: str | Path, quantity: str = "xi") -> None:
        """Write one quantity as a tau-by-q table."""
        values = getattr(self, quantity)
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau"] + [f"{q:.10g}" for q in self.q])
            for tau, row in zip(self.tau, values):
                w.writerow([int(tau)] + [repr(float(v)) for v in row])


def structure_tensor(
    panel: ReturnPanel,
    q: MomentGrid | Sequence[float],
    tau: LagGrid | Sequence[int],
    overlapping: bool = True,
    backend: str | None = None,
) -> StructureTensor:
    """Compute ``Xi``, its standardized and normalized forms and the
    consecutive-moment ratios.

    Parameters
    ----------
    panel : ReturnPanel
    q : MomentGrid or sequence of float
        Positive, increasing moment orders.
    tau : LagGrid or sequence of int
        Aggregation lags in days; ``K_q`` is always evaluated at lag 1,
        whether or not 1 belongs to the grid.
    overlapping : bool
        Average over all ``T - tau`` overlapping windows (default) or over
        disjoint windows.
    backend : {"cython", "python"}, optional
        Force a kernel implementation.
    """
    q = q if isinstance(q, MomentGrid) else MomentGrid(np.asarray(q, dtype=float))
    tau = tau if isinstance(tau, LagGrid) else LagGrid(np.asarray(tau))
    if tau.tau_max > panel.T - 1:
        raise InputError(f"tau_max={tau.tau_max} must be below T={panel.T}")
    qs, taus = q.q_values, tau.tau_values
    xi = _backend.structure_function(panel.log_prices, taus, qs, overlapping, backend)
    if taus[0] == 1:
        k_q = xi[0].copy()
    else:
        k_q = _backend.structure_function(panel.log_prices, np.array([1]), qs, True, backend)[0]
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(k_q))):
        raise NumericalError("non-finite structure function entries")
    if np.any(xi <= 0) or np.any(k_q <= 0):
        raise NumericalError("structure function has zero entries (all returns zero at some lag)")
    xi_std = xi / k_q
    xi_norm = xi_std ** (1.0 / qs)
    rel = np.empty_like(xi_norm)
    rel[:, 0] = xi_norm[:, 0]
    rel[:, 1:] = xi_norm[:, 1:] / xi_norm[:, :-1]
    if not np.all(np.isfinite(xi_norm)) or not np.all(np.isfinite(rel)):
        raise NumericalError("non-finite normalized structure function")
    return StructureTensor(
        tau=taus.copy(),
        q=qs.copy(),
        xi=xi,
        k_q=k_q,
        xi_std=xi_std,
        xi_norm=xi_norm,
        rel=rel,
        overlapping=overlapping,
    )
