import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sntail import cli
from sntail.errors import ConvergenceError
from sntail.verify import SUITES


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "sntail", *args], capture_output=True,
                          text=False, check=False)
    return proc.returncode, proc.stdout.decode(), proc.stderr.decode()


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def call(argv, capsys):
    status = cli.main(argv)
    return status, capsys.readouterr().out


TABLE = ["taildep-table", "--theta", "-1", "--rho", "0.5", "--log10u-min", "-12",
         "--log10u-max", "-4", "--steps", "5"]


class TestTable:
    def test_rows_and_trend(self, capsys):
        status, out = call(TABLE, capsys)
        assert status == 0
        rows = parse_csv(out)
        assert list(rows[0]) == ["u", "x_u", "lambda_l_exact", "lambda_l_asym", "ratio", "branch"]
        assert len(rows) == 5
        err = [abs(float(r["ratio"]) - 1) for r in rows]
        assert all(b < a for a, b in zip(err, err[1:]))
        assert [float(r["u"]) for r in rows] == [1e-4, 1e-6, 1e-8, 1e-10, 1e-12]

    def test_ratio_roundtrip(self, capsys):
        _, out = call(TABLE, capsys)
        for r in parse_csv(out):
            recomputed = float(r["lambda_l_exact"]) / float(r["lambda_l_asym"])
            assert abs(recomputed / float(r["ratio"]) - 1) <= 1e-12

    def test_seventeen_digits(self, capsys):
        _, out = call(TABLE, capsys)
        row = parse_csv(out)[0]
        assert row["x_u"] == "%.17g" % float(row["x_u"])
        assert out.endswith("\r\n")

    def test_json_matches_csv(self, capsys):
        _, text_csv = call(TABLE, capsys)
        _, text_json = call(TABLE + ["--format", "json"], capsys)
        rows_csv = parse_csv(text_csv)
        rows_json = json.loads(text_json)
        assert [list(r) for r in rows_json] == [list(r) for r in rows_csv]
        for a, b in zip(rows_csv, rows_json):
            assert float(a["ratio"]) == b["ratio"]
            assert a["branch"] == b["branch"]

    def test_upper_tail(self, capsys):
        status, out = call(["taildep-table", "--theta", "1", "--rho", "0.5", "--steps", "2",
                            "--tail", "upper"], capsys)
        rows = parse_csv(out)
        assert status == 0 and rows[0]["branch"] == "b" and "lambda_u_exact" in rows[0]

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "t.csv"
        status, out = call(TABLE + ["--out", str(path)], capsys)
        assert status == 0 and out == ""
        assert len(parse_csv(path.read_text())) == 5


class TestQuantile:
    def test_both(self, capsys):
        status, out = call(["quantile", "--lambda", "1", "--log10u", "-10", "--method", "both"],
                           capsys)
        row = parse_csv(out)[0]
        assert status == 0
        assert float(row["asymptotic"]) == pytest.approx(-4.2585, abs=1e-4)
        assert abs(float(row["exact"]) / float(row["asymptotic"]) - 1) < 0.05

    def test_margin_from_bivariate(self, capsys):
        _, out = call(["quantile", "--theta", "1", "--rho", "0", "--log10u", "-3",
                       "--method", "exact"], capsys)
        row = parse_csv(out)[0]
        assert float(row["lambda"]) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
        assert list(row) == ["lambda", "log10u", "exact"]


class TestSample:
    def test_byte_identical(self):
        args = ["sample", "--theta", "1", "--rho", "0", "--n", "3", "--seed", "7"]
        a, b = run_cli(*args), run_cli(*args)
        assert a[0] == 0 and a[1] == b[1]
        rows = parse_csv(a[1])
        assert len(rows) == 3 and list(rows[0]) == ["x1", "x2"]

    def test_start_offset(self, capsys):
        _, whole = call(["sample", "--theta", "1", "--rho", "0", "--n", "4", "--seed", "7"], capsys)
        _, tail = call(["sample", "--theta", "1", "--rho", "0", "--n", "2", "--seed", "7",
                        "--start", "2"], capsys)
        assert parse_csv(whole)[2:] == parse_csv(tail)


class TestEval:
    @pytest.mark.parametrize("args,key,expected", [
        (["--op", "owen-t", "--h", "0", "--a", "1"], "value", 0.125),
        (["--op", "lambert-w", "--x", "2.718281828459045"], "value", 1.0),
        (["--op", "sn-cdf", "--lambda", "1", "--x", "0"], "value", 0.25),
        (["--op", "joint-log-cdf", "--theta", "0", "--rho", "0", "--x", "0"], "value",
         math.log(0.25)),
        (["--op", "lambda-l", "--theta", "0", "--rho", "0", "--log10u", "-2"], "value", 0.01),
    ])
    def test_ops(self, capsys, args, key, expected):
        status, out = call(["eval", *args], capsys)
        assert status == 0
        assert float(parse_csv(out)[0][key]) == pytest.approx(expected, rel=1e-12)

    def test_capitanio_columns(self, capsys):
        _, out = call(["eval", "--op", "capitanio", "--lambda", "2", "--x", "-6"], capsys)
        row = parse_csv(out)[0]
        assert float(row["log_lower"]) < float(row["value"]) < float(row["log_upper"])

    def test_de_haan(self, capsys):
        _, out = call(["eval", "--op", "de-haan", "--theta", "-1", "--rho", "0",
                       "--log10u", "-8"], capsys)
        assert float(parse_csv(out)[0]["gap"]) < 0.01


class TestTailOrder:
    def test_fit(self, capsys):
        status, out = call(["tail-order", "--theta", "-1", "--rho", "0.5"], capsys)
        row = parse_csv(out)[0]
        assert status == 0
        assert abs(float(row["rel_gap"])) < 0.03
        assert int(row["points"]) == 5


class TestVerify:
    def test_every_suite_reported(self, capsys):
        status, out = call(["verify", "--suite", "owen-t-symmetry", "--suite",
                            "lambert-w-roundtrip"], capsys)
        rows = parse_csv(out)
        assert status == 0
        assert [r["suite"] for r in rows] == ["owen-t-symmetry", "lambert-w-roundtrip"]
        assert all(r["status"] == "pass" for r in rows)

    def test_registry_covers_modules(self):
        modules = {m for m, _ in SUITES.values()}
        assert modules == {"specfun", "sn-univariate", "sn-bivariate", "taildep"}

    def test_failing_suite_sets_status(self, capsys, monkeypatch):
        monkeypatch.setitem(SUITES, "lambert-w-roundtrip",
                            ("specfun", lambda: (1.0, 0.5, "forced")))
        status, out = call(["verify", "--suite", "lambert-w-roundtrip"], capsys)
        assert status == 1 and parse_csv(out)[0]["status"] == "fail"

    def test_unknown_suite_is_reported_not_dropped(self):
        from sntail.verify import run_suites

        res = run_suites(["no-such-suite"])
        assert res[0].status == "skipped" and res[0].detail


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ["taildep-table", "--theta", "1", "--rho", "0", "--steps", "0"],
        ["taildep-table", "--theta", "1", "--rho", "0", "--log10u-max", "1"],
        ["quantile", "--lambda", "1", "--log10u", "2"],
        ["sample", "--theta", "1", "--rho", "2", "--n", "3"],
        ["taildep-table", "--rho", "0"],
        ["bogus"],
        ["eval", "--op", "sn-cdf", "--x", "1"],
        ["taildep-table", "--theta", "1", "--rho", "0", "--max-nodes", "10"],
    ])
    def test_usage_status(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2

    def test_nonconvergence_row(self, capsys, monkeypatch):
        def boom(law, lu):
            raise ConvergenceError("forced failure", {"nodes": 4096})

        monkeypatch.setattr(cli, "lambda_l_exact", boom)
        status, out = call(["taildep-table", "--theta", "1", "--rho", "0", "--steps", "2"], capsys)
        row = parse_csv(out)[0]
        assert status == 1
        assert row["error"] == "ConvergenceError"
        assert json.loads(row["diagnostics"]) == {"nodes": 4096}

    def test_tiny_budget_reports_diagnostics(self, capsys):
        status, out = call(["eval", "--op", "joint-log-cdf", "--theta", "2", "--rho", "-0.3",
                            "--x", "-6", "--max-nodes", "64"], capsys)
        assert status == 1
        assert parse_csv(out)[0]["error"] == "ConvergenceError"
