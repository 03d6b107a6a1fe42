"""Command-line front end.

Every subcommand writes one JSON document carrying ``schema_version``.
Exit status: 0 success, 1 input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .acsr import autocorrelation, acsr_fit
from .anomaly import impute, scan
from .errors import InputError, NumericalError
from .experiments import acsr_table, fbm_bias, format_table, ftest_table, rmse_experiment, run_ensembles
from .generators import AnomalySpec, FbmParams, MrwParams, inject_anomaly, simulate_fbm, simulate_mrw
from .pipeline import MODES, analyze
from .series import MomentGrid, PriceSeries, ReturnPanel, default_tau_cap, load_csv
from .var import CalibratedMrw, msvar, quantile_se, simulate_annual_returns, var_report

log = logging.getLogger("mscaling")

SCHEMA_VERSION = "1.0"
SEED_ENV = "MSCALING_SEED"
EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2


@dataclass
class RunConfig:
    q_min: float = 0.02
    q_max: float = 1.0
    q_step: float = 0.02
    tau_cap_fraction: float = 0.2
    tau_max: int | None = None
    level: float = 0.05
    confidence: float = 0.95
    seed: int = 0
    paths: int = 100_000
    horizon: int = 250
    mode: str = "auto"
    date_column: str = "date"
    price_column: str = "close"
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}")
        if not 0 < self.tau_cap_fraction < 1:
            raise InputError("tau_cap_fraction must lie in (0, 1)")
        if not 0 < self.level < 1 or not 0 < self.confidence < 1:
            raise InputError("level and confidence must lie in (0, 1)")
        if self.paths < 1 or self.jobs < 1:
            raise InputError("paths and jobs must be positive")

    @property
    def moments(self) -> MomentGrid:
        return MomentGrid.uniform(self.q_min, self.q_max, self.q_step)


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values: dict = {"seed": default_seed()}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise InputError(f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise InputError(f"{path}: config must be a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        values.update(data)
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise InputError(f"bad configuration: {exc}") from None


# -- output --------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def emit(command: str, payload: dict, config: RunConfig | None, out: str | None) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__}
    if config is not None:
        doc["config"] = asdict(config)
    doc.update(payload)
    text = json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def _dump_dir(args) -> Path | None:
    if not getattr(args, "dump_dir", None):
        return None
    d = Path(args.dump_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _load(path: str, config: RunConfig) -> PriceSeries:
    return load_csv(path, date_column=config.date_column, price_column=config.price_column)


def _for_each(func, items, config: RunConfig):
    """Apply ``func`` per input, in parallel when ``jobs > 1``; order is kept."""
    if config.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


# -- subcommands ---------------------------------------------------------------


def _estimate_one(task):
    path, config, dump = task
    series = _load(path, config)
    try:
        res = analyze(series.panel(), config.moments, config.tau_cap_fraction, config.mode,
                      config.level, config.tau_max)
    except (InputError, NumericalError) as exc:
        kind = InputError if isinstance(exc, InputError) else NumericalError
        raise kind(f"{series.ticker}: {exc}") from exc
    if dump is not None:
        stem = Path(dump) / series.ticker
        res.tensor.to_json(f"{stem}_tensor.json")
        _write_json(Path(f"{stem}_linear.json"), res.linear.to_dict())
        if res.nonlinear is not None:
            _write_json(Path(f"{stem}_nonlinear.json"), res.nonlinear.to_dict())
        if res.acsr is not None:
            _write_json(Path(f"{stem}_acsr.json"), res.acsr.to_dict())
    out = res.to_dict()
    out.update({"series": series.ticker, "n_prices": len(series),
                "start": str(series.timestamps[0]), "end": str(series.timestamps[-1])})
    out["spectrum"] = res.chosen.to_dict()
    return out


def cmd_estimate(args, config):
    dump = _dump_dir(args)
    tasks = [(p, config, None if dump is None else str(dump)) for p in args.inputs]
    return {"results": _for_each(_estimate_one, tasks, config)}


def cmd_test(args, config):
    results = cmd_estimate(args, config)["results"]
    keep = ("series", "t_tests", "f_test", "rw_test", "confirmation", "classification",
            "classification_1pct", "table_verdict", "table_verdict_1pct", "level", "H_hat", "A_hat", "B_hat", "tau_star", "q_grid")
    return {"results": [{k: r[k] for k in keep} for r in results]}


def cmd_acsr(args, config):
    results = []
    for path in args.inputs:
        series = _load(path, config)
        r = np.diff(np.log(series.prices))
        max_lag = args.max_lag or default_tau_cap(len(series), config.tau_cap_fraction)
        acf = autocorrelation(np.abs(r), max_lag)
        fit = acsr_fit(acf, log_scale=not args.linear_lag, fixed_alpha=args.fixed_alpha)
        results.append({"series": series.ticker, "max_lag": max_lag, **fit.to_dict(),
                        "acf": acf.rho if args.with_acf else None})
    return {"results": results}


def cmd_anomaly(args, config):
    dump = _dump_dir(args)
    results = []
    for path in args.inputs:
        series = _load(path, config)
        panel = series.panel()
        diag, cps = scan(panel, penalty=args.penalty)
        item = {"series": series.ticker, **cps.to_dict(series.timestamps), "d_series_path": None}
        if dump is not None:
            dpath = dump / f"{series.ticker}_D.csv"
            with dpath.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["index", "date", "cv", "cav", "d"])
                for t in range(diag.d.size):
                    w.writerow([t, series.timestamps[t + 1], repr(float(diag.cv[t])),
                                repr(float(diag.cav[t])), repr(float(diag.d[t]))])
            item["d_series_path"] = str(dpath)
        if args.clean_out and len(cps):
            cleaned = impute(panel, cps, mode=args.impute)
            out = Path(args.clean_out)
            out.mkdir(parents=True, exist_ok=True)
            cpath = out / f"{series.ticker}_clean.csv"
            _write_prices(cpath, series.timestamps, cleaned)
            item["cleaned_path"] = str(cpath)
        results.append(item)
    return {"results": results}


def _write_prices(path: Path, dates, panel: ReturnPanel) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "close"])
        for d, p in zip(dates, panel.log_prices):
            w.writerow([d, repr(float(np.exp(p)))])


def cmd_simulate(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(args.n):
        if args.model == "mrw":
            params = MrwParams(lam=args.lam, L=args.L, sigma=args.sigma, T=args.T)
            panel = simulate_mrw(params, config.seed, i)
        else:
            params = FbmParams(h=args.hurst, T=args.T, sigma=args.sigma)
            panel = simulate_fbm(params, config.seed, i)
        meta = {"model": args.model, "params": asdict(params), "seed": config.seed, "index": i}
        if args.anomaly:
            spec = AnomalySpec(args.anomaly, position=args.position if args.position is not None else "random",
                               magnitude=args.magnitude, seed=config.seed * 100_003 + i)
            panel = inject_anomaly(panel, spec)
            meta["anomaly"] = asdict(spec)
        path = out / f"{args.model}_{i:04d}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "log_price"])
            for t, p in enumerate(panel.log_prices):
                w.writerow([t, repr(float(p))])
        _write_json(path.with_suffix(".json"), {"schema_version": SCHEMA_VERSION, **meta})
        files.append(str(path))
    return {"files": files}


def _var_one(task):
    path, config = task
    series = _load(path, config)
    res = analyze(series.panel(), config.moments, config.tau_cap_fraction, config.mode,
                  config.level, config.tau_max)
    rep = var_report(series.panel(), res.quad, res.tau_max, config.confidence, config.paths,
                     config.seed, config.horizon)
    return {"series": series.ticker, "classification": res.report.classification, **rep.to_dict()}


def cmd_var(args, config):
    results = _for_each(_var_one, [(p, config) for p in args.inputs], config)
    if args.csv:
        with Path(args.csv).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["series", "quantity", "value"])
            for r in results:
                for key in ("hvar_1d", "gvar_1d", "hvar_250d_direct", "msvar_lambdaA", "msvar_lambdaB",
                            "lambda_a", "lambda_b", "sigma2", "L", "H_hat"):
                    w.writerow([r["series"], key, r[key]])
                for group in ("scaled_sqrt", "scaled_H", "re_sqrt", "re_H"):
                    for k, v in r[group].items():
                        w.writerow([r["series"], f"{group}.{k}", v])
    return {"results": results}


def cmd_msvar(args, config):
    lam_b = args.lam if args.lam_b is None else args.lam_b
    calib = CalibratedMrw(sigma2=args.sigma2, L=args.L, lambda_a=args.lam, lambda_b=lam_b)
    out = {"calibration": calib.to_dict()}
    for which in ("a", "b"):
        est = msvar(calib, config.horizon, config.paths, config.confidence, config.seed, which)
        out[f"msvar_lambda{which.upper()}"] = est.value
    if args.with_se:
        sample = simulate_annual_returns(calib.lambda_a, calib.L, math.sqrt(calib.sigma2),
                                         config.paths, config.seed, config.horizon)
        out["bootstrap_se_lambdaA"] = quantile_se(sample, 1 - config.confidence, seed=config.seed)
    return out


def cmd_repro(args, config):
    n = 100 if args.full_scale else args.n
    if args.table == "fbm_bias":
        rows = fbm_bias(n if args.n_set or args.full_scale else 100, seed=config.seed, magnitude=args.magnitude)
    else:
        ens = run_ensembles(n_paths=n, master_seed=config.seed)
        rows = {"acsr": acsr_table, "rmse": rmse_experiment, "ftest": ftest_table}[args.table](ens)
    if args.table_format == "text":
        sys.stderr.write(format_table(rows) + "\n")
    return {"table": args.table, "paths": n, "rows": rows}


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of RunConfig fields; flags override it")
    common.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    common.add_argument("-o", "--output", help="write the JSON result here instead of stdout")
    common.add_argument("--log-level", default="WARNING")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--q-min", dest="q_min", type=float)
    grid.add_argument("--q-max", dest="q_max", type=float)
    grid.add_argument("--q-step", dest="q_step", type=float)
    grid.add_argument("--tau-cap-fraction", dest="tau_cap_fraction", type=float)
    grid.add_argument("--tau-max", dest="tau_max", type=int, help="skip the breakpoint search")
    grid.add_argument("--mode", choices=MODES)
    grid.add_argument("--level", type=float, help="test level (default 0.05; 0.01 is always reported)")
    grid.add_argument("--jobs", type=int, help="parallel worker processes across series")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("inputs", nargs="+", help="CSV files with date and close columns")
    data.add_argument("--date-column", dest="date_column")
    data.add_argument("--price-column", dest="price_column")

    p = _Parser(prog="mscaling", description="Multiscaling estimation, testing and risk.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("estimate", parents=[common, grid, data], help="estimate and test the spectrum")
    s.add_argument("--dump-dir", help="write intermediate tensors and fits here")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("test", parents=[common, grid, data], help="multiscaling test report only")
    s.add_argument("--dump-dir")
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("acsr", parents=[common, data], help="autocorrelation breakpoint")
    s.add_argument("--tau-cap-fraction", dest="tau_cap_fraction", type=float)
    s.add_argument("--max-lag", type=int)
    s.add_argument("--fixed-alpha", action="store_true", help="pin the intercept at the lag-1 value")
    s.add_argument("--linear-lag", action="store_true", help="regress on tau instead of ln tau")
    s.add_argument("--with-acf", action="store_true")
    s.set_defaults(func=cmd_acsr)

    s = sub.add_parser("anomaly", parents=[common, data], help="detect and repair spikes and jumps")
    s.add_argument("--penalty", type=float, help="override 0.5*||D - mean(D)||")
    s.add_argument("--impute", choices=("auto", "price", "return"), default="auto")
    s.add_argument("--clean-out", help="directory for repaired CSV files")
    s.add_argument("--dump-dir", help="write CV, CAV and D series here")
    s.set_defaults(func=cmd_anomaly)

    s = sub.add_parser("simulate", parents=[common], help="generate MRW or fBm paths")
    s.add_argument("model", choices=("mrw", "fbm"))
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("-n", type=int, default=1, help="number of paths")
    s.add_argument("--lambda", dest="lam", type=float, default=0.3)
    s.add_argument("--L", type=float, default=250.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--T", type=int, default=10_000)
    s.add_argument("--hurst", type=float, default=0.47)
    s.add_argument("--anomaly", choices=("spike", "jump", "contamination"))
    s.add_argument("--position", type=int)
    s.add_argument("--magnitude", type=float, default=10.0)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("var", parents=[common, grid, data], help="VaR, scaled VaR and MSVaR")
    s.add_argument("--confidence", type=float)
    s.add_argument("--paths", type=int)
    s.add_argument("--horizon", type=int)
    s.add_argument("--csv", help="tidy per-series CSV")
    s.set_defaults(func=cmd_var)

    s = sub.add_parser("msvar", parents=[common], help="Monte Carlo VaR from MRW parameters")
    s.add_argument("--sigma2", type=float, required=True)
    s.add_argument("--L", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--lambda-b", dest="lam_b", type=float)
    s.add_argument("--confidence", type=float)
    s.add_argument("--paths", type=int)
    s.add_argument("--horizon", type=int)
    s.add_argument("--with-se", action="store_true", help="bootstrap SE of the quantile")
    s.set_defaults(func=cmd_msvar)

    s = sub.add_parser("repro", parents=[common], help="regenerate the simulation tables")
    s.add_argument("table", choices=("acsr", "rmse", "ftest", "fbm_bias"))
    s.add_argument("-n", type=int, default=None, help="paths per ensemble (default 20; fbm 100)")
    s.add_argument("--full-scale", action="store_true", help="100 paths per ensemble")
    s.add_argument("--magnitude", type=float, default=10.0, help="fBm anomaly size in daily std devs")
    s.add_argument("--format", dest="table_format", choices=("json", "text"), default="json",
                   help="text also prints the table to stderr")
    s.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "repro":
        args.n_set = args.n is not None
        args.n = 20 if args.n is None else args.n
    try:
        config = build_config(args)
        payload = args.func(args, config)
        emit(args.command, payload, config, args.output)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
