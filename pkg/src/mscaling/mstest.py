"""Multiscaling test procedure: increment t-tests, spectrum F-test, random-walk
test, confirmation test, and the resulting classification."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InputError, NumericalError
from .scaling import QuadraticFit, ScalingSpectrum
from .series import StructureTensor

log = logging.getLogger(__name__)

STRONG = "strong multiscaling"
WEAK = "weak multiscaling"
NON_STABLE = "non-stable multiscaling"
UNISCALING = "uniscaling"
INCONCLUSIVE = "inconclusive"

# ordering used by the monotonicity guarantee: a stricter level never moves
# the decision-table verdict up this scale. "inconclusive" is a conflict flag
# rather than a strength and is left off the scale.
STRENGTH = {STRONG: 2, WEAK: 1, NON_STABLE: 1, UNISCALING: 0}


@dataclass(frozen=True)
class TestOutcome:
    """One hypothesis test. ``p_value`` is NaN when the statistic is undefined."""

    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    dof: int | tuple[int, int]
    label: str = ""

    @property
    def reject_at_5pct(self) -> bool:
        return self.reject(0.05)

    @property
    def reject_at_1pct(self) -> bool:
        return self.reject(0.01)

    def reject(self, level: float) -> bool:
        return bool(self.p_value < level)  # NaN never rejects

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "statistic": _json_float(self.statistic),
            "p_value": _json_float(self.p_value),
            "dof": list(self.dof) if isinstance(self.dof, tuple) else self.dof,
            "reject_at_5pct": self.reject_at_5pct,
            "reject_at_1pct": self.reject_at_1pct,
        }


def _json_float(v: float) -> float | None:
    return float(v) if math.isfinite(v) else None


def _t_outcome(estimate: float, null: float, se: float, dof: int, label: str) -> TestOutcome:
    """Two-sided t-test of ``estimate == null``.

    A zero standard error is only accepted together with an exact null
    (statistic 0, p-value 1); otherwise the statistic is infinite and an
    error is raised.
    """
    if dof < 1:
        raise InputError(f"{label}: no residual degrees of freedom")
    diff = estimate - null
    if not math.isfinite(se) or se < 0:
        raise NumericalError(f"{label}: invalid standard error {se}")
    if se == 0:
        if diff == 0:
            return TestOutcome(0.0, 1.0, dof, label)
        raise NumericalError(f"{label}: zero standard error with a nonzero effect")
    t = diff / se
    return TestOutcome(float(t), float(2.0 * stats.t.sf(abs(t), dof)), dof, label)


def t_test_increments(spectrum: ScalingSpectrum) -> list[TestOutcome]:
    """Two-sided t-tests of ``H(q_i, q_{i+1}) = 0`` for every increment except
    the first, ``H(0, q_1)``."""
    if spectrum.increments.size < 2:
        raise InputError("increment t-tests need at least two moments")
    dof = spectrum.dof
    q = spectrum.q
    return [
        _t_outcome(float(spectrum.increments[i]), 0.0, float(spectrum.se_increments[i]), dof,
                   f"H({q[i - 1]:.4g},{q[i]:.4g})")
        for i in range(1, spectrum.increments.size)
    ]


def f_test_spectrum(spectrum: ScalingSpectrum, tensor: StructureTensor | None = None,
                    denominator_dof: int | None = None) -> TestOutcome:
    """F-test of the full spectrum against "only ``H(0, q_1)`` nonzero".

    ``F = [(RSS_r - RSS_u)/(M - 1)] / [RSS_u/(n - M)]`` with ``M`` increments
    and ``n = M * N_tau`` stacked observations treated as independent. The
    residual sums are in log coordinates for both fit modes. Pass
    ``denominator_dof`` to override ``n - M``.
    """
    m = int(spectrum.increments.size)
    if m < 2:
        raise InputError("F-test undefined: the restricted and full models coincide (one moment)")
    if tensor is not None and (tensor.tau.size != spectrum.n_tau or tensor.q.size != m):
        raise InputError("spectrum and tensor grids differ")
    n = m * spectrum.n_tau
    d1 = m - 1
    d2 = n - m if denominator_dof is None else int(denominator_dof)
    if d2 < 1:
        raise InputError("F-test has no denominator degrees of freedom")
    rss_u, rss_r = float(spectrum.rss_full), float(spectrum.rss_restricted)
    if rss_u <= 0:
        log.warning("F-test: unrestricted RSS is zero (perfect fit); p-value undefined")
        return TestOutcome(math.inf if rss_r > 0 else math.nan, math.nan, (d1, d2), "F")
    num = rss_r - rss_u
    if num < 0:
        # possible for nonlinear fits, whose RSS is minimised on another scale
        log.info("F-test: restricted log-RSS below the full one (%.3g); F clipped to 0", num)
        num = 0.0
    f = (num / d1) / (rss_u / d2)
    return TestOutcome(float(f), float(stats.f.sf(f, d1, d2)), (d1, d2), "F")


def rw_test(quad: QuadraticFit) -> TestOutcome:
    """t-test of ``H = 0.5`` in the intercept-only fit ``H_q = H``."""
    return _t_outcome(quad.h_hat, 0.5, quad.se_h, quad.n_q - 1, "H=0.5")


def confirmation_test(quad: QuadraticFit) -> tuple[TestOutcome, TestOutcome]:
    """Separate t-tests of ``A = 0.5`` and ``B = 0`` in ``H_q = A + B q``."""
    dof = quad.n_q - 2
    return (_t_outcome(quad.a, 0.5, quad.se_a, dof, "A=0.5"),
            _t_outcome(quad.b, 0.0, quad.se_b, dof, "B=0"))


def classify(t_tests: list[TestOutcome], f_test: TestOutcome,
             confirmation: tuple[TestOutcome, TestOutcome] | None = None,
             level: float = 0.05) -> str:
    """Combine the test outcomes into a classification.

    ============================  ===========  =====================
    increment t-tests             F rejects    F does not reject
    ============================  ===========  =====================
    all reject                    strong       weak
    some fail                     non-stable   uniscaling
    ============================  ===========  =====================

    With ``confirmation`` given, a strong or non-stable verdict whose
    ``B = 0`` test does not reject, or a uniscaling verdict whose ``B = 0``
    test rejects, becomes inconclusive. Weak multiscaling asserts a single
    exponent suffices, so it does not conflict with either outcome.
    """
    if not 0 < level < 1:
        raise InputError("level must lie in (0, 1)")
    all_t = all(t.reject(level) for t in t_tests)
    f_rej = f_test.reject(level)
    if all_t:
        verdict = STRONG if f_rej else WEAK
    else:
        verdict = NON_STABLE if f_rej else UNISCALING
    if confirmation is not None:
        b_rej = confirmation[1].reject(level)
        if (verdict in (STRONG, NON_STABLE) and not b_rej) or (verdict == UNISCALING and b_rej):
            verdict = INCONCLUSIVE
    return verdict


@dataclass(frozen=True)
class MultiscalingReport:
    t_tests: list[TestOutcome]
    f_test: TestOutcome
    rw_test: TestOutcome
    confirmation: tuple[TestOutcome, TestOutcome]
    classification: str
    h_hat: float
    a_hat: float
    b_hat: float
    level: float = 0.05
    classification_1pct: str = ""
    table_verdict: str = ""
    table_verdict_1pct: str = ""
    tau_star: int | None = None
    q_grid: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "t_tests": [t.to_dict() for t in self.t_tests],
            "f_test": self.f_test.to_dict(),
            "rw_test": self.rw_test.to_dict(),
            "confirmation": {"A": self.confirmation[0].to_dict(), "B": self.confirmation[1].to_dict()},
            "classification": self.classification,
            "classification_1pct": self.classification_1pct,
            "table_verdict": self.table_verdict,
            "table_verdict_1pct": self.table_verdict_1pct,
            "level": self.level,
            "H_hat": self.h_hat,
            "A_hat": self.a_hat,
            "B_hat": self.b_hat,
            "tau_star": self.tau_star,
            "q_grid": None if self.q_grid is None else [float(v) for v in self.q_grid],
        }


def multiscaling_test(spectrum: ScalingSpectrum, quad: QuadraticFit,
                      tensor: StructureTensor | None = None, level: float = 0.05,
                      tau_star: int | None = None,
                      denominator_dof: int | None = None) -> MultiscalingReport:
    """Run all four steps and classify at ``level`` and at 1%."""
    t_tests = t_test_increments(spectrum)
    f = f_test_spectrum(spectrum, tensor, denominator_dof)
    rw = rw_test(quad)
    conf = confirmation_test(quad)
    return MultiscalingReport(
        t_tests=t_tests, f_test=f, rw_test=rw, confirmation=conf,
        classification=classify(t_tests, f, conf, level),
        classification_1pct=classify(t_tests, f, conf, 0.01),
        table_verdict=classify(t_tests, f, level=level),
        table_verdict_1pct=classify(t_tests, f, level=0.01),
        h_hat=quad.h_hat, a_hat=quad.a, b_hat=quad.b, level=level,
        tau_star=tau_star, q_grid=spectrum.q.copy(),
    )
