from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from mscaling.series import MomentGrid, ReturnPanel, StructureTensor

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def exact_tensor(a: float, b: float, tau_max: int = 60, q=None, k_scale: float = 1.3) -> StructureTensor:
    """Tensor whose structure functions follow ``K_q tau^{q (a + b q)}`` exactly."""
    q = MomentGrid.uniform().q_values if q is None else np.asarray(q, float)
    tau = np.arange(1, tau_max + 1)
    hq = a + b * q
    k_q = k_scale**q
    xi = k_q * tau[:, None].astype(float) ** (q * hq)
    xi_std = xi / k_q
    xi_norm = xi_std ** (1 / q)
    rel = xi_norm.copy()
    rel[:, 1:] = xi_norm[:, 1:] / xi_norm[:, :-1]
    return StructureTensor(tau=tau, q=q, xi=xi, k_q=k_q, xi_std=xi_std, xi_norm=xi_norm, rel=rel)


@pytest.fixture
def toy_panel() -> ReturnPanel:
    return ReturnPanel(np.array([0.0, 1.0, 3.0, 6.0]))


@pytest.fixture(scope="session")
def mrw_path():
    from mscaling.generators import MrwParams, simulate_mrw
    return simulate_mrw(MrwParams(0.3, T=4000), seed=11)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
