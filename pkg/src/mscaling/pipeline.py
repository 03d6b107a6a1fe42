"""The estimation procedure end to end: breakpoint selection, structure
functions, linear and nonlinear fits, fit choice, spectrum fit and tests."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .acsr import AcsrFit, estimate_tau_star
from .errors import ConvergenceError, InputError
from .mstest import MultiscalingReport, multiscaling_test
from .scaling import (FitDiagnostics, QuadraticFit, ScalingSpectrum, compare_fits, fit_quadratic,
                      fit_rnsghe_linear, fit_rnsghe_nonlinear)
from .series import LagGrid, MomentGrid, ReturnPanel, StructureTensor, default_tau_cap, structure_tensor

log = logging.getLogger(__name__)

MODES = ("auto", "linear", "nonlinear")


@dataclass(frozen=True)
class PipelineResult:
    acsr: AcsrFit | None
    tau_max: int
    tensor: StructureTensor
    linear: ScalingSpectrum
    nonlinear: ScalingSpectrum | None
    diagnostics: FitDiagnostics | None
    chosen: ScalingSpectrum
    quad: QuadraticFit
    report: MultiscalingReport
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = self.report.to_dict()
        out["tau_star"] = self.tau_max
        out["fit_mode"] = self.chosen.mode
        out["acsr"] = None if self.acsr is None else self.acsr.to_dict()
        out["quadratic"] = self.quad.to_dict()
        if self.diagnostics is not None:
            out["fit_comparison"] = {
                "rss_original_scale": self.diagnostics.rss_original_scale,
                "rss_log_scale": self.diagnostics.rss_log_scale,
                "preferred": self.diagnostics.preferred,
            }
        out["notes"] = list(self.notes)
        return out


def analyze(panel: ReturnPanel, q: MomentGrid | None = None, cap_fraction: float = 0.2,
            mode: str = "auto", level: float = 0.05, tau_max: int | None = None,
            overlapping: bool = True, backend: str | None = None,
            denominator_dof: int | None = None) -> PipelineResult:
    """Estimate and test the scaling spectrum of one series.

    Parameters
    ----------
    panel : ReturnPanel
    q : MomentGrid, optional
        Defaults to ``0.02, 0.04, ..., 1``.
    cap_fraction : float
        The breakpoint search runs up to ``floor(T * cap_fraction)`` lags.
    mode : {"auto", "linear", "nonlinear"}
        ``auto`` fits both and keeps the one with the smaller residual sum in
        original coordinates.
    tau_max : int, optional
        Skip the breakpoint search and use this largest lag.
    """
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}")
    q = MomentGrid.uniform() if q is None else q
    notes: list[str] = []
    acsr = None
    if tau_max is None:
        cap = default_tau_cap(panel.T, cap_fraction)
        acsr = estimate_tau_star(panel.base_returns, max_lag=min(cap, panel.T - 3))
        tau_max = acsr.tau_star
        if acsr.boundary_hit:
            notes.append(f"breakpoint at the search boundary ({tau_max})")
    tensor = structure_tensor(panel, q, LagGrid.up_to(tau_max), overlapping, backend)
    linear = fit_rnsghe_linear(tensor)
    nonlinear = diagnostics = None
    chosen = linear
    if mode != "linear":
        try:
            nonlinear = fit_rnsghe_nonlinear(tensor, start=linear)
        except ConvergenceError as exc:
            if mode == "nonlinear":
                raise
            notes.append(f"nonlinear fit failed ({exc}); linear fit used")
        else:
            if mode == "nonlinear":
                chosen = nonlinear
            else:
                diagnostics = compare_fits(linear, nonlinear, tensor)
                chosen = nonlinear if diagnostics.preferred == "nonlinear" else linear
    quad = fit_quadratic(chosen)
    report = multiscaling_test(chosen, quad, tensor, level, tau_max, denominator_dof)
    return PipelineResult(acsr, tau_max, tensor, linear, nonlinear, diagnostics, chosen, quad,
                          report, notes)
