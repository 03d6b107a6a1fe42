from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import exact_tensor
from mscaling.errors import InputError, NumericalError
from mscaling.mstest import (INCONCLUSIVE, NON_STABLE, STRENGTH, STRONG, UNISCALING, WEAK, TestOutcome,
                             _t_outcome, classify, confirmation_test, f_test_spectrum, multiscaling_test,
                             rw_test, t_test_increments)
from mscaling.scaling import ScalingSpectrum, fit_quadratic, fit_rnsghe_linear


def _spectrum(m, n_tau, rss_full, rss_restricted, inc=None, se=None):
    inc = np.full(m, 0.1) if inc is None else np.asarray(inc, float)
    se = np.full(m, 0.01) if se is None else np.asarray(se, float)
    return ScalingSpectrum(method="rnsghe", mode="linear", q=np.linspace(0.02, 0.02 * m, m),
                           h_q=np.cumsum(inc), increments=inc, se_increments=se, rss_full=rss_full,
                           rss_restricted=rss_restricted, n_tau=n_tau)


class TestPValues:
    @pytest.mark.parametrize("t,dof,p", oracles.T_PVALUES)
    def test_t_oracle(self, t, dof, p):
        out = _t_outcome(t, 0.0, 1.0, dof, "x")
        assert out.p_value == pytest.approx(p, abs=1e-10)

    @pytest.mark.parametrize("f,d1,d2,p", oracles.F_PVALUES)
    def test_f_oracle(self, f, d1, d2, p):
        m = d1 + 1
        n_tau = d2 // m + 1
        assert m * n_tau - m == d2
        out = f_test_spectrum(_spectrum(m, n_tau, float(d2), float(d2) + f * d1))
        assert out.dof == (d1, d2)
        assert out.statistic == pytest.approx(f, rel=1e-12)
        assert out.p_value == pytest.approx(p, abs=1e-10)

    def test_denominator_override(self):
        out = f_test_spectrum(_spectrum(4, 11, 40.0, 47.5), denominator_dof=400)
        assert out.dof == (3, 400)

    def test_flags_follow_p(self):
        out = TestOutcome(2.0, 0.03, 10)
        assert out.reject_at_5pct and not out.reject_at_1pct
        assert not TestOutcome(math.nan, math.nan, 10).reject(0.5)


class TestZeroSe:
    def test_zero_effect(self):
        out = _t_outcome(0.5, 0.5, 0.0, 10, "x")
        assert (out.statistic, out.p_value) == (0.0, 1.0)

    def test_nonzero_effect_raises(self):
        with pytest.raises(NumericalError):
            _t_outcome(0.6, 0.5, 0.0, 10, "x")

    def test_exact_uniscaling_tensor(self):
        spec = fit_rnsghe_linear(exact_tensor(0.5, 0.0))
        spec = _spectrum(spec.q.size, spec.n_tau, 1.0, 1.0, spec.increments.round(12), np.zeros(spec.q.size))
        for out in t_test_increments(spec):
            assert (out.statistic, out.p_value) == (0.0, 1.0)

    def test_rw_on_flat_half(self):
        quad = fit_quadratic(np.full(50, 0.5), np.linspace(0.02, 1, 50))
        out = rw_test(quad)
        assert out.statistic == 0.0 and not out.reject_at_5pct


class TestFTest:
    def test_single_moment(self):
        with pytest.raises(InputError):
            f_test_spectrum(_spectrum(1, 20, 1.0, 2.0))

    def test_perfect_fit_gives_nan(self, caplog):
        with caplog.at_level(logging.WARNING):
            out = f_test_spectrum(_spectrum(5, 20, 0.0, 1.0))
        assert math.isnan(out.p_value) and "RSS" in caplog.text

    def test_nonnegative(self):
        out = f_test_spectrum(_spectrum(5, 20, 2.0, 1.9))
        assert out.statistic == 0.0 and out.p_value == 1.0

    def test_t_tests_exclude_first(self):
        spec = _spectrum(6, 20, 1.0, 2.0)
        outs = t_test_increments(spec)
        assert len(outs) == 5 and all(o.dof == 19 for o in outs)


class TestConfirmation:
    def test_mrw_spectrum_rejects_both(self):
        q = np.linspace(0.02, 1, 50)
        h = 0.59 - 0.045 * q + np.random.default_rng(0).normal(0, 1e-4, 50)
        a, b = confirmation_test(fit_quadratic(h, q))
        assert a.reject_at_1pct and b.reject_at_1pct and a.dof == 48


def _outcome(p):
    return TestOutcome(0.0, p, 10)


pvals = st.floats(0.0, 1.0)


class TestClassify:
    @pytest.mark.parametrize("t_p,f_p,expected", [
        ([0.001, 0.002], 0.001, STRONG),
        ([0.001, 0.002], 0.3, WEAK),
        ([0.001, 0.2], 0.001, NON_STABLE),
        ([0.3, 0.2], 0.4, UNISCALING),
    ])
    def test_table(self, t_p, f_p, expected):
        assert classify([_outcome(p) for p in t_p], _outcome(f_p)) == expected

    def test_conflicts(self):
        ts, f_rej, f_acc = [_outcome(0.001)], _outcome(0.001), _outcome(0.5)
        b_acc = (_outcome(0.001), _outcome(0.5))
        b_rej = (_outcome(0.001), _outcome(0.001))
        assert classify(ts, f_rej, b_acc) == INCONCLUSIVE
        assert classify(ts, f_rej, b_rej) == STRONG
        assert classify([_outcome(0.5)], f_acc, b_rej) == INCONCLUSIVE
        assert classify(ts, f_acc, b_acc) == WEAK

    @given(st.lists(pvals, min_size=1, max_size=6), pvals, pvals)
    def test_total(self, t_p, f_p, b_p):
        out = classify([_outcome(p) for p in t_p], _outcome(f_p), (_outcome(0.5), _outcome(b_p)))
        assert out in (STRONG, WEAK, NON_STABLE, UNISCALING, INCONCLUSIVE)

    @given(st.lists(pvals, min_size=1, max_size=6), pvals, pvals)
    def test_stricter_level_never_stronger(self, t_p, f_p, b_p):
        ts, f = [_outcome(p) for p in t_p], _outcome(f_p)
        assert STRENGTH[classify(ts, f, level=0.01)] <= STRENGTH[classify(ts, f, level=0.05)]
        conf = (_outcome(0.5), _outcome(b_p))
        hi, lo = classify(ts, f, conf, 0.05), classify(ts, f, conf, 0.01)
        if INCONCLUSIVE not in (hi, lo):
            assert STRENGTH[lo] <= STRENGTH[hi]

    def test_level_validation(self):
        with pytest.raises(InputError):
            classify([_outcome(0.1)], _outcome(0.1), level=1.5)


def test_report_roundtrip(mrw_path):
    from mscaling.series import LagGrid, MomentGrid, structure_tensor
    ten = structure_tensor(mrw_path, MomentGrid.uniform(), LagGrid.up_to(100))
    spec = fit_rnsghe_linear(ten)
    rep = multiscaling_test(spec, fit_quadratic(spec), ten, tau_star=100)
    d = rep.to_dict()
    assert len(d["t_tests"]) == 49 and d["tau_star"] == 100
    assert set(d["confirmation"]) == {"A", "B"}
    assert d["classification"] in (STRONG, WEAK, NON_STABLE, UNISCALING, INCONCLUSIVE)
    assert STRENGTH[rep.table_verdict_1pct] <= STRENGTH[rep.table_verdict]
