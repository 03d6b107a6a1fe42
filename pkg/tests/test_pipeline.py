from __future__ import annotations

import numpy as np
import pytest

from mscaling.errors import InputError
from mscaling.generators import MrwParams, simulate_mrw
from mscaling.mstest import STRONG
from mscaling.pipeline import analyze
from mscaling.series import MomentGrid


@pytest.fixture(scope="module")
def result(mrw_path):
    return analyze(mrw_path)


def test_strong_on_intermittent_mrw(result):
    assert result.report.classification == STRONG
    assert result.quad.b < 0


def test_steps_recorded(result):
    assert result.acsr is not None and result.tau_max == result.acsr.tau_star
    assert result.tensor.tau[-1] == result.tau_max
    assert result.nonlinear is not None and result.diagnostics is not None
    assert result.chosen.mode == result.diagnostics.preferred
    d = result.to_dict()
    assert {"fit_comparison", "quadratic", "acsr", "classification_1pct", "notes"} <= set(d)


def test_fixed_tau_skips_breakpoint(mrw_path):
    res = analyze(mrw_path, tau_max=50, mode="linear")
    assert res.acsr is None and res.tau_max == 50 and res.nonlinear is None
    assert res.chosen.mode == "linear"


def test_brownian_curvature_small():
    # the classification itself over-rejects on Brownian paths; see the ledger
    b = [analyze(simulate_mrw(MrwParams(0.0, T=5000), seed=31, index=i), q=MomentGrid.uniform(),
                 tau_max=100).quad.b for i in range(4)]
    assert abs(np.mean(b)) < 0.01


def test_bad_mode(mrw_path):
    with pytest.raises(InputError):
        analyze(mrw_path, mode="cubic")
