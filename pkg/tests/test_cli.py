import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from qfrac import cli
from qfrac.schema import OUTPUT_SCHEMA, validate_record

SQUARES = "x*x mod 16 == 1"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--format", "json")
    assert code == 0, err
    record = json.loads(out)
    validate_record(record)
    return record


def test_run_json(capsys):
    rec = run_json(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--shots", "10000",
                   "--seed", "42", "--verify")
    assert rec["schema_version"] == "1" and rec["command"] == "run"
    assert abs(rec["result"]["f_hat"] - 0.25) <= 0.03
    assert rec["result"]["exact_f"] == "1/4"
    assert rec["config"]["seed"] == 42 and rec["config"]["k"] == 4
    assert set(rec["timing"]) >= {"parse", "oracle", "sampling"}


def test_run_all_true(capsys):
    rec = run_json(capsys, "run", "--predicate", "0 == 0", "--qubits", "3", "--shots", "16")
    assert rec["result"]["f_hat"] == 1.0


def test_run_epsilon_delta(capsys):
    rec = run_json(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--epsilon", "0.1",
                   "--delta", "0.05", "--mode", "analytic", "--ci", "clopper-pearson")
    assert rec["config"]["shots"] == 185
    assert rec["result"]["ci_method"] == "clopper_pearson"


def test_run_syntax_error_exit_2(capsys):
    code, out, err = run_cli(capsys, "run", "--predicate", "x ==", "--qubits", "4", "--shots", "1")
    assert code == 2 and out == ""
    assert "offset 2" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["run", "--qubits", "4", "--shots", "5"],
        ["run", "--predicate", SQUARES, "--shots", "5"],
        ["run", "--predicate", SQUARES, "--qubits", "4"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--epsilon", "0.1"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5", "--epsilon", "0.1", "--delta", "0.1"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "0"],
        ["run", "--predicate", SQUARES, "--qubits", "25", "--shots", "5"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5", "--seed", "-3"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5", "--format", "xml"],
        ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5", "--alpha", "1.5"],
        ["run", "--predicate", "x + (x == 1)", "--qubits", "4", "--shots", "5"],
        ["compare", "--predicate", "x == (", "--qubits", "4", "--shots", "5"],
        ["count", "--predicate", "y", "--qubits", "4"],
        ["plan", "--epsilon", "0", "--delta", "0.5"],
        ["plan", "--epsilon", "0.5", "--delta", "1"],
        ["sweep", "--fraction-family", "quarter", "--qubits-list", "", "--shots", "5"],
        ["sweep", "--fraction-family", "x < {n}", "--qubits-list", "4", "--shots", "5"],
        ["sweep", "--fraction-family", "x < 5", "--qubits-list", "4,8", "--shots", "5"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_bad_thread_env_exit_2(capsys, monkeypatch):
    monkeypatch.setenv("QFRAC_THREADS", "zero")
    code, _, err = run_cli(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5")
    assert code == 2 and "QFRAC_THREADS" in err


def test_runtime_error_exit_1(capsys, monkeypatch):
    def boom(config):
        raise MemoryError("no room for the statevector")

    monkeypatch.setattr(cli, "quantum_sampler", boom)
    code, out, err = run_cli(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--shots", "5")
    assert code == 1 and out == "" and "no room" in err


@pytest.mark.parametrize(
    "text,k,s,f",
    [(SQUARES, "4", 4, "1/4"), ("0 == 1", "10", 0, "0"), ("x < 512", "10", 512, "1/2")],
)
def test_count(capsys, text, k, s, f):
    rec = run_json(capsys, "count", "--predicate", text, "--qubits", k)
    assert rec["result"]["solution_count"] == s
    assert rec["result"]["exact_f"] == f
    code, out, _ = run_cli(capsys, "count", "--predicate", text, "--qubits", k)
    assert code == 0 and f"S = {s}" in out and f"f = {f}" in out


@pytest.mark.parametrize("eps,delta,p", [("0.01", "0.05", 18445), ("0.1", "0.05", 185), ("0.999", "0.999", 1)])
def test_plan(capsys, eps, delta, p):
    rec = run_json(capsys, "plan", "--epsilon", eps, "--delta", delta)
    assert rec["result"]["shots"] == p
    code, out, _ = run_cli(capsys, "plan", "--epsilon", eps, "--delta", delta)
    assert code == 0 and out.startswith(f"P = {p}\n")


def test_compare(capsys):
    rec = run_json(capsys, "compare", "--predicate", "x < 4", "--qubits", "4", "--shots", "10000")
    res = rec["result"]
    assert abs(res["quantum"]["f_hat"] - 0.25) <= 0.03
    assert abs(res["classical"]["f_hat"] - 0.25) <= 0.03
    assert res["ci_overlap"] is True
    rec = run_json(capsys, "compare", "--predicate", "0 == 0", "--qubits", "4", "--shots", "100")
    assert rec["result"]["abs_difference"] == 0


def test_sweep(capsys):
    rec = run_json(capsys, "sweep", "--fraction-family", "quarter", "--qubits-list", "4,8,12,16",
                   "--shots", "4096", "--mode", "analytic")
    rows = rec["result"]["rows"]
    assert [r["k"] for r in rows] == [4, 8, 12, 16]
    assert len({r["hoeffding_bound"] for r in rows}) == 1
    assert all(r["exact_f"] == "1/4" for r in rows)

    code, out, _ = run_cli(capsys, "sweep", "--fraction-family", "quarter", "--qubits-list", "4,8",
                           "--shots", "100", "--mode", "analytic")
    assert code == 0
    table = list(csv.DictReader(io.StringIO(out)))
    assert [r["k"] for r in table] == ["4", "8"]
    assert set(table[0]) >= {"k", "f_hat", "exact_f", "abs_error", "hoeffding_bound", "wall_clock_s"}


def test_sweep_single_width_matches_run(capsys):
    sweep = run_json(capsys, "sweep", "--fraction-family", "x < {k}", "--qubits-list", "4",
                     "--shots", "500", "--seed", "3")
    run = run_json(capsys, "run", "--predicate", "x < 4", "--qubits", "4", "--shots", "500",
                   "--seed", "3", "--verify")
    (row,) = sweep["result"]["rows"]
    for key in ("f_hat", "ones", "ci_low", "ci_high", "exact_f", "abs_error"):
        assert row[key] == run["result"][key]


def test_random_seed_is_echoed(capsys):
    rec = run_json(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--shots", "10",
                   "--seed", "random")
    assert rec["config"]["seed"] == rec["result"]["seed"]
    assert 0 <= rec["config"]["seed"] < 2**64


def test_json_round_trips(capsys):
    code, out, _ = run_cli(capsys, "compare", "--predicate", SQUARES, "--qubits", "4", "--shots", "200",
                           "--verify", "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert json.loads(cli.to_json(record)) == record
    assert cli.to_json(record) + "\n" == out


def _sig12(v):
    return float(f"{float(v):.12g}")


def test_csv_and_json_agree(capsys):
    argv = ["run", "--predicate", SQUARES, "--qubits", "4", "--shots", "777", "--seed", "5", "--verify"]
    rec = run_json(capsys, *argv)
    code, out, _ = run_cli(capsys, *argv, "--format", "csv")
    (row,) = list(csv.DictReader(io.StringIO(out)))
    for key in ("ones", "shots", "f_hat", "ci_low", "ci_high", "alpha", "abs_error", "seed"):
        assert _sig12(row[key]) == _sig12(rec["result"][key])
    assert row["exact_f"] == rec["result"]["exact_f"]

    argv = ["compare", "--predicate", "x < 4", "--qubits", "4", "--shots", "300"]
    rec = run_json(capsys, *argv)
    _, out, _ = run_cli(capsys, *argv, "--format", "csv")
    rows = {r["path"]: r for r in csv.DictReader(io.StringIO(out))}
    for path in ("quantum", "classical"):
        for key in ("f_hat", "ci_low", "ci_high", "seed"):
            assert _sig12(rows[path][key]) == _sig12(rec["result"][path][key])


def test_text_output(capsys):
    code, out, _ = run_cli(capsys, "run", "--predicate", SQUARES, "--qubits", "4", "--shots", "100",
                           "--verify", "--format", "text")
    assert code == 0 and "f_hat" in out and "exact f = 1/4" in out
    code, out, _ = run_cli(capsys, "compare", "--predicate", SQUARES, "--qubits", "4", "--shots", "100",
                           "--format", "text")
    assert code == 0 and "classical:" in out


def test_schema_rejects_malformed_records():
    good = {
        "schema_version": "1", "command": "plan", "config": {}, "timing": {},
        "result": {"shots": 3, "epsilon": 0.5, "delta": 0.5, "bound": "..."},
    }
    validate_record(good)
    for broken in (
        {**good, "schema_version": "2"},
        {**good, "result": {"shots": 0, "epsilon": 0.5, "delta": 0.5, "bound": ""}},
        {k: v for k, v in good.items() if k != "command"},
        {**good, "command": "run"},
    ):
        with pytest.raises(jsonschema.ValidationError):
            validate_record(broken)
    assert OUTPUT_SCHEMA["properties"]["schema_version"]["const"] == "1"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qfrac", "plan", "--epsilon", "0.1", "--delta", "0.05"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("P = 185")
    proc = subprocess.run([sys.executable, "-m", "qfrac", "plan"], capture_output=True, text=True, check=False)
    assert proc.returncode == 2
