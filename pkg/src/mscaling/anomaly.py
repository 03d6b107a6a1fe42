"""Exogenous anomaly detection from the gap between cumulative variance and
cumulative auto-covariance of returns, and repair by imputation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .series import ReturnPanel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CumulativeDiagnostics:
    """``cv[t] = sum_{i<=t} r_i^2``, ``cav[t] = sum_{i<=t} |r_{i+1}| |r_i|`` and
    ``d = cv - cav`` on the common length ``n - 1``."""

    cv: np.ndarray
    cav: np.ndarray
    d: np.ndarray


@dataclass(frozen=True)
class ChangePointSet:
    """Detected anomalies.

    ``indices`` are log-price positions, ``d_indices`` the first index of the
    new segment in ``D``; ``kinds`` says whether a spike or a jump explains
    the break better.
    """

    indices: tuple[int, ...]
    penalty: float
    cost_reduction: tuple[float, ...]
    d_indices: tuple[int, ...] = ()
    kinds: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.indices)

    def to_dict(self, dates=None) -> dict:
        points = []
        for i, (idx, red) in enumerate(zip(self.indices, self.cost_reduction)):
            points.append({
                "index": int(idx),
                "date": None if dates is None else str(dates[idx]),
                "cost_reduction": float(red),
                "kind": self.kinds[i] if self.kinds else None,
            })
        return {"changepoints": points, "penalty": float(self.penalty)}


def cumulative_diagnostics(returns) -> CumulativeDiagnostics:
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or r.size < 3:
        raise InputError("cumulative diagnostics need at least 3 returns")
    a = np.abs(r)
    cv = np.cumsum(r * r)
    cav = np.cumsum(a[1:] * a[:-1])
    return CumulativeDiagnostics(cv=cv, cav=cav, d=cv[:-1] - cav)


class _LinearCost:
    """Least-squares cost of ``y ~ a + b t`` on any slice, from prefix sums."""

    def __init__(self, y: np.ndarray):
        y = y - y.mean()  # centring limits cancellation in syy
        t = np.arange(y.size, dtype=float)
        z = np.zeros(1)
        self.s1 = np.arange(y.size + 1, dtype=float)
        self.st = np.concatenate([z, np.cumsum(t)])
        self.stt = np.concatenate([z, np.cumsum(t * t)])
        self.sy = np.concatenate([z, np.cumsum(y)])
        self.sty = np.concatenate([z, np.cumsum(t * y)])
        self.syy = np.concatenate([z, np.cumsum(y * y)])

    def __call__(self, a, b):
        """SSR of the segments ``[a, b)``; arrays broadcast."""
        n = self.s1[b] - self.s1[a]
        st = self.st[b] - self.st[a]
        stt = self.stt[b] - self.stt[a]
        sy = self.sy[b] - self.sy[a]
        sty = self.sty[b] - self.sty[a]
        syy = self.syy[b] - self.syy[a]
        vtt = stt - st * st / n
        vty = sty - st * sy / n
        vyy = syy - sy * sy / n
        with np.errstate(invalid="ignore", divide="ignore"):
            ssr = vyy - np.where(vtt > 0, vty * vty / vtt, 0.0)
        return np.maximum(ssr, 0.0)


def default_penalty(d) -> float:
    """``0.5 * ||D - mean(D)||_2``."""
    d = np.asarray(d, dtype=float)
    return 0.5 * float(np.linalg.norm(d - d.mean()))


def binary_segmentation(y, penalty: float, min_size: int = 3,
                        max_points: int | None = None) -> list[tuple[int, float]]:
    """Breakpoints of a piecewise-linear fit to ``y``.

    A segment is split at its best point while the drop in residual sum of
    squares exceeds ``penalty``. Returns ``(start of right segment, drop)``
    pairs sorted by position.
    """
    y = np.asarray(y, dtype=float)
    cost = _LinearCost(y)
    found: list[tuple[int, float]] = []
    stack = [(0, y.size)]
    while stack:
        a, b = stack.pop()
        if b - a < 2 * min_size:
            continue
        k = np.arange(a + min_size, b - min_size + 1)
        split = cost(a, k) + cost(k, b)
        j = int(np.argmin(split))
        drop = float(cost(a, b) - split[j])
        if drop <= penalty:
            continue
        found.append((int(k[j]), drop))
        if max_points is not None and len(found) >= max_points:
            break
        stack.extend([(a, int(k[j])), (int(k[j]), b)])
    return sorted(found)


def _locate(returns: np.ndarray, t: int, radius: int = 2) -> tuple[int, str]:
    """Pin the price index and kind of the anomaly behind a break of ``D`` at ``t``.

    A spike at price ``k`` displaces ``r[k-1]`` and ``r[k]`` in opposite
    directions; a jump at ``k`` only ``r[k-1]``. Each hypothesis is scored by
    the squared-return mass it removes, over ``k`` within ``radius`` of
    ``t + 1``.
    """
    n = returns.size
    best = (t + 1, "jump", -np.inf)
    for k in range(max(1, t + 1 - radius), min(n, t + 2 + radius)):
        jump = returns[k - 1] ** 2
        if jump > best[2]:
            best = (k, "jump", jump)
        if k < n:
            spike = 0.5 * (returns[k - 1] - returns[k]) ** 2
            if spike > best[2]:
                best = (k, "spike", spike)
    return best[0], best[1]


def detect_changepoints(diag: CumulativeDiagnostics, penalty: float | None = None,
                        min_size: int = 3, max_points: int | None = None,
                        returns=None) -> ChangePointSet:
    """Change points in intercept and slope of ``D(t)``.

    Binary segmentation with a linear-segment cost; the default penalty is
    ``0.5 * ||D - mean(D)||_2``. A break whose new segment starts at ``t``
    maps to log-price index ``t + 1``; when ``returns`` are passed the index
    is refined locally and labelled spike or jump.
    """
    d = np.asarray(diag.d, dtype=float)
    if d.size < 10:
        raise InputError("change-point detection needs D of length >= 10")
    pen = default_penalty(d) if penalty is None else float(penalty)
    found = binary_segmentation(d, pen, min_size, max_points)
    d_idx = tuple(t for t, _ in found)
    drops = tuple(v for _, v in found)
    if returns is None:
        return ChangePointSet(indices=tuple(t + 1 for t in d_idx), penalty=pen,
                              cost_reduction=drops, d_indices=d_idx)
    r = np.asarray(returns, dtype=float)
    located = [_locate(r, t) for t in d_idx]
    # two breaks can resolve to one anomaly; keep the larger drop
    merged: dict[int, tuple[str, float, int]] = {}
    for (k, kind), drop, t in zip(located, drops, d_idx):
        if k not in merged or drop > merged[k][1]:
            merged[k] = (kind, drop, t)
    keys = sorted(merged)
    return ChangePointSet(
        indices=tuple(keys), penalty=pen,
        cost_reduction=tuple(merged[k][1] for k in keys),
        d_indices=tuple(merged[k][2] for k in keys),
        kinds=tuple(merged[k][0] for k in keys),
    )


def scan(panel: ReturnPanel, penalty: float | None = None, **kwargs) -> tuple[CumulativeDiagnostics, ChangePointSet]:
    """Diagnostics and located change points of a log-price panel."""
    r = panel.base_returns
    diag = cumulative_diagnostics(r)
    return diag, detect_changepoints(diag, penalty=penalty, returns=r, **kwargs)


def _runs(idx: list[int]) -> list[tuple[int, int]]:
    runs = []
    for i in idx:
        if runs and i == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], i)
        else:
            runs.append((i, i))
    return runs


def impute(panel: ReturnPanel, points: ChangePointSet | list[int], mode: str = "auto") -> ReturnPanel:
    """Repair flagged log-prices.

    ``mode="price"`` replaces each flagged log-price with the mean of its
    neighbours (linear interpolation across runs of flagged points, the
    nearest value at the series ends). ``mode="return"`` replaces the return
    into each flagged index with the mean of the adjacent returns and
    re-cumulates, which removes a permanent jump. ``"auto"`` uses the kind
    recorded on a :class:`ChangePointSet` (price for spikes, return for jumps).
    """
    if mode not in ("auto", "price", "return"):
        raise InputError(f"unknown impute mode {mode!r}")
    if isinstance(points, ChangePointSet):
        idx, kinds = list(points.indices), list(points.kinds) or ["spike"] * len(points)
    else:
        idx = [int(i) for i in points]
        kinds = ["spike"] * len(idx)
    if not idx:
        return panel
    if mode != "auto":
        kinds = ["spike" if mode == "price" else "jump"] * len(idx)
    T = panel.T
    if len(set(idx)) != len(idx) or any(not 0 <= i < T for i in idx):
        raise InputError(f"flagged indices must be distinct and within [0, {T - 1}]")
    order = np.argsort(idx)
    idx = [idx[i] for i in order]
    kinds = [kinds[i] for i in order]

    # return-mode repairs first, on the returns; price repairs after
    jumps = [i for i, k in zip(idx, kinds) if k == "jump"]
    p = panel.log_prices.copy()
    if jumps:
        r = np.diff(p)
        flagged = {i - 1 for i in jumps if i >= 1}
        orig = r.copy()
        for j in sorted(flagged):
            nb = [orig[m] for m in (j - 1, j + 1) if 0 <= m < r.size and m not in flagged]
            r[j] = np.mean(nb) if nb else 0.0
        p = np.concatenate([[p[0]], p[0] + np.cumsum(r)])

    spikes = [i for i, k in zip(idx, kinds) if k == "spike"]
    runs = _runs(spikes)
    if any(lo != hi for lo, hi in runs):
        log.info("adjacent flagged points interpolated jointly: %s",
                 [(lo, hi) for lo, hi in runs if lo != hi])
    for lo, hi in runs:
        left, right = lo - 1, hi + 1
        if left < 0 and right >= T:
            raise InputError("every log-price is flagged")
        if left < 0:
            p[lo:hi + 1] = p[right]
        elif right >= T:
            p[lo:hi + 1] = p[left]
        else:
            w = (np.arange(lo, hi + 1) - left) / (right - left)
            p[lo:hi + 1] = p[left] + w * (p[right] - p[left])
    return ReturnPanel(p)
