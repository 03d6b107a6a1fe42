from __future__ import annotations

import datetime as dt
import json

import numpy as np
import pytest

from mscaling import cli
from mscaling.generators import AnomalySpec, MrwParams, inject_anomaly, simulate_mrw


def _csv(path, log_prices, ticker=None):
    d0 = dt.date(2000, 1, 3)
    head = "date,close" + (",ticker" if ticker else "")
    rows = [f"{d0 + dt.timedelta(days=i)},{float(np.exp(p))!r}" + (f",{ticker}" if ticker else "")
            for i, p in enumerate(log_prices)]
    path.write_text("\n".join([head, *rows]) + "\n")
    return str(path)


@pytest.fixture(scope="module")
def mrw_csv(tmp_path_factory):
    panel = simulate_mrw(MrwParams(0.3, sigma=0.01, T=3000), seed=13)
    return _csv(tmp_path_factory.mktemp("data") / "MRW.csv", panel.log_prices)


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


class TestExitCodes:
    def test_missing_file(self, capsys):
        assert _run(["estimate", "/nonexistent.csv"], capsys)[0] == 1

    def test_bad_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["estimate", "--bogus"])
        assert exc.value.code == 1

    def test_numerical_failure(self, tmp_path, capsys):
        path = _csv(tmp_path / "flat.csv", np.zeros(400))
        assert _run(["estimate", path, "--tau-max", "10"], capsys)[0] == 2

    def test_bad_seed_env(self, monkeypatch, mrw_csv, capsys):
        monkeypatch.setenv("MSCALING_SEED", "abc")
        assert _run(["acsr", mrw_csv], capsys)[0] == 1

    def test_unknown_config_key(self, tmp_path, mrw_csv, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"q_mix": 0.1}')
        assert _run(["acsr", mrw_csv, "--config", str(cfg)], capsys)[0] == 1


class TestEstimate:
    def test_report(self, mrw_csv, capsys, tmp_path):
        code, doc = _run(["estimate", mrw_csv, "--dump-dir", str(tmp_path)], capsys)
        assert code == 0 and doc["schema_version"] == cli.SCHEMA_VERSION
        r = doc["results"][0]
        assert r["series"] == "MRW" and r["classification"]
        assert len(r["t_tests"]) == 49 and len(r["spectrum"]["H_q"]) == 50
        assert {p.name for p in tmp_path.iterdir()} >= {"MRW_tensor.json", "MRW_linear.json", "MRW_acsr.json"}

    def test_test_subcommand_and_flag_precedence(self, mrw_csv, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"q_max": 0.5, "level": 0.01, "tau_max": 40}))
        code, doc = _run(["test", mrw_csv, "--config", str(cfg), "--level", "0.1"], capsys)
        assert code == 0
        assert doc["config"]["level"] == 0.1 and doc["config"]["q_max"] == 0.5
        assert len(doc["results"][0]["q_grid"]) == 25 and doc["results"][0]["tau_star"] == 40

    def test_parallel_matches_serial(self, mrw_csv, tmp_path, capsys):
        other = _csv(tmp_path / "B.csv", simulate_mrw(MrwParams(0.1, sigma=0.01, T=2000), seed=2).log_prices)
        args = ["estimate", mrw_csv, other, "--tau-max", "60", "--mode", "linear"]
        serial = _run(args, capsys)[1]["results"]
        par = _run([*args, "--jobs", "2"], capsys)[1]["results"]
        assert serial == par


class TestOtherCommands:
    def test_acsr(self, mrw_csv, capsys):
        code, doc = _run(["acsr", mrw_csv, "--with-acf"], capsys)
        r = doc["results"][0]
        assert code == 0 and r["max_lag"] == 600 and len(r["acf"]) == 600

    def test_anomaly_repair(self, tmp_path, capsys):
        panel = simulate_mrw(MrwParams(0.22, sigma=0.02, T=2000), seed=3)
        dirty = inject_anomaly(panel, AnomalySpec("spike", position=1500, magnitude=40))
        path = _csv(tmp_path / "X.csv", dirty.log_prices)
        code, doc = _run(["anomaly", path, "--clean-out", str(tmp_path / "clean"),
                          "--dump-dir", str(tmp_path / "d")], capsys)
        r = doc["results"][0]
        assert code == 0 and any(abs(c["index"] - 1500) <= 2 for c in r["changepoints"])
        assert r["changepoints"][0]["date"].startswith("200")
        assert (tmp_path / "clean" / "X_clean.csv").exists()
        assert (tmp_path / "d" / "X_D.csv").read_text().startswith("index,date,cv,cav,d")

    def test_simulate_deterministic(self, tmp_path, capsys):
        outs = []
        for run in ("a", "b"):
            code, _ = _run(["simulate", "mrw", "--lambda", "0", "--seed", "7", "--T", "500", "-n", "2",
                            "--out", str(tmp_path / run)], capsys)
            assert code == 0
            outs.append([(tmp_path / run / f"mrw_000{i}.csv").read_bytes() for i in range(2)])
        assert outs[0] == outs[1] and outs[0][0] != outs[0][1]

    def test_seed_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("MSCALING_SEED", "7")
        _run(["simulate", "fbm", "--T", "300", "--out", str(tmp_path / "env")], capsys)
        _run(["simulate", "fbm", "--T", "300", "--seed", "7", "--out", str(tmp_path / "flag")], capsys)
        assert (tmp_path / "env" / "fbm_0000.csv").read_bytes() == (tmp_path / "flag" / "fbm_0000.csv").read_bytes()

    def test_var(self, mrw_csv, tmp_path, capsys):
        code, doc = _run(["var", mrw_csv, "--paths", "2000", "--csv", str(tmp_path / "v.csv")], capsys)
        assert code == 0 and doc["results"][0]["hvar_1d"] < 0
        assert (tmp_path / "v.csv").read_text().startswith("series,quantity,value")

    def test_msvar_byte_identical(self, tmp_path, capsys):
        args = ["msvar", "--sigma2", "4e-4", "--L", "250", "--lambda", "0.2", "--paths", "3000", "--seed", "5"]
        a = _run([*args, "-o", str(tmp_path / "a.json")], capsys)
        b = _run([*args, "-o", str(tmp_path / "b.json")], capsys)
        assert a[0] == b[0] == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        doc = json.loads((tmp_path / "a.json").read_text())
        assert doc["msvar_lambdaA"] == doc["msvar_lambdaB"]

    def test_repro_fbm(self, capsys):
        code, doc = _run(["repro", "fbm_bias", "-n", "8", "--seed", "1"], capsys)
        assert code == 0 and doc["table"] == "fbm_bias" and doc["rows"]
