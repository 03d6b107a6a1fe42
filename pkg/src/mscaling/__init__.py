"""Robust estimation and testing of multiscaling in financial time series,
anomaly screening, and scaling-aware Value at Risk."""
from __future__ import annotations

__version__ = "0.1.0"

from ._backend import BACKEND
from .acsr import AcfCurve, AcsrFit, acsr_fit, autocorrelation, bootstrap_mean_ci, estimate_tau_star
from .anomaly import (ChangePointSet, CumulativeDiagnostics, cumulative_diagnostics, detect_changepoints,
                      impute, scan)
from .errors import CalibrationError, ConvergenceError, InputError, MscalingError, NumericalError
from .generators import (AnomalySpec, FbmParams, MrwParams, inject_anomaly, simulate_fbm, simulate_mrw,
                         theoretical_spectrum)
from .mstest import (MultiscalingReport, TestOutcome, classify, confirmation_test, f_test_spectrum,
                     multiscaling_test, rw_test, t_test_increments)
from .pipeline import PipelineResult, analyze
from .scaling import (ESTIMATORS, FitDiagnostics, QuadraticFit, ScalingSpectrum, compare_fits, fit_ghe,
                      fit_nsghe_linear, fit_nsghe_nonlinear, fit_quadratic, fit_rnsghe_linear,
                      fit_rnsghe_nonlinear)
from .series import (LagGrid, MomentGrid, PriceSeries, ReturnPanel, StructureTensor, load_csv, log_returns,
                     structure_tensor, summary_stats)
from .var import (CalibratedMrw, MsVarReport, VarEstimate, annual_var_direct, calibrate_mrw, gaussian_var,
                  historical_var, msvar, relative_error, scale_var, var_report)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
