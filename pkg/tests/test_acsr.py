from __future__ import annotations

import numpy as np
import pytest

from mscaling.acsr import AcfCurve, _ssr_by_breakpoint, acsr_fit, autocorrelation, bootstrap_mean_ci, estimate_tau_star
from mscaling.errors import InputError, NumericalError


def _broken_line(c=40, n=200, a=0.3, b=-0.05, log_scale=True):
    lags = np.arange(1, n + 1)
    x = np.log(lags) if log_scale else lags.astype(float)
    return AcfCurve(lags, a + b * np.minimum(x, x[c - 1]))


class TestAcsrFit:
    def test_exact_breakpoint_log(self):
        fit = acsr_fit(_broken_line())
        assert fit.tau_star == 40
        assert fit.alpha == pytest.approx(0.3) and fit.beta == pytest.approx(-0.05)
        assert fit.ssr == pytest.approx(0.0, abs=1e-20)

    def test_exact_breakpoint_linear_lag(self):
        fit = acsr_fit(_broken_line(c=25, log_scale=False), log_scale=False)
        assert fit.tau_star == 25

    def test_fixed_alpha_passes_through_lag_one(self):
        curve = _broken_line()
        noisy = AcfCurve(curve.lags, curve.rho + np.random.default_rng(0).normal(0, 1e-3, curve.rho.size))
        fit = acsr_fit(noisy, fixed_alpha=True)
        assert fit.alpha + fit.beta * 0.0 == pytest.approx(noisy.rho[0])

    def test_prefix_sums_match_direct(self):
        rng = np.random.default_rng(1)
        x = np.log(np.arange(1, 61))
        y = rng.normal(size=60)
        cands = np.arange(3, 60)
        for fixed in (False, True):
            ssr, _, _ = _ssr_by_breakpoint(x, y, cands, fixed)
            for c, s in zip(cands[::7], ssr[::7]):
                xc = np.minimum(x, x[c - 1])
                if fixed:
                    b = np.dot(xc - x[0], y - y[0]) / np.dot(xc - x[0], xc - x[0])
                    resid = y - (y[0] + b * (xc - x[0]))
                else:
                    A = np.column_stack([np.ones(60), xc])
                    resid = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
                assert s == pytest.approx(resid @ resid, rel=1e-9, abs=1e-12)

    def test_boundary_flag(self):
        fit = acsr_fit(_broken_line(c=199))
        assert fit.boundary_hit

    def test_too_short(self):
        with pytest.raises(InputError):
            acsr_fit(AcfCurve(np.arange(1, 4), np.zeros(3)))


class TestAutocorrelation:
    def test_matches_direct_sum(self):
        x = np.random.default_rng(2).standard_normal(500)
        acf = autocorrelation(x, 10)
        d = x - x.mean()
        direct = [np.sum(d[k:] * d[:-k]) / np.sum(d * d) for k in range(1, 11)]
        np.testing.assert_allclose(acf.rho, direct, atol=1e-12)

    def test_zero_variance(self):
        with pytest.raises(NumericalError):
            autocorrelation(np.ones(50), 5)

    def test_bad_lag(self):
        with pytest.raises(InputError):
            autocorrelation(np.arange(10.0), 10)


def test_estimate_on_mrw(mrw_path):
    fit = estimate_tau_star(mrw_path.base_returns)
    assert 3 <= fit.tau_star <= fit.max_lag - 1
    assert fit.max_lag == 800


def test_bootstrap_ci():
    v = np.random.default_rng(4).normal(250, 50, 100)
    m, lo, hi = bootstrap_mean_ci(v, n_resamples=20_000, seed=1)
    assert lo < m < hi
    assert hi - lo == pytest.approx(2 * 1.96 * v.std() / 10, rel=0.1)
    assert bootstrap_mean_ci(v, n_resamples=5000, seed=1) == bootstrap_mean_ci(v, n_resamples=5000, seed=1)
