import json
import math
import subprocess
import sys

import pytest

from weakloop.cli import EXIT_CAPPED, EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main
from weakloop.geometry import kappa_upper_bound
from weakloop.montecarlo import read_csv, read_json


def headers(path):
    out = {}
    for line in path.read_text().splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            out[key] = json.loads(val)
    return out


def test_run_weak_csv(tmp_path):
    out = tmp_path / "w.csv"
    code = main(["run", "--algo", "weak", "--rho", "1e-6", "--kappa", "auto",
                 "--trials", "200", "--seed", "42", "--out", str(out)])
    assert code == EXIT_OK
    h = headers(out)
    assert h["spec"]["rho"] == 1e-6 and h["spec"]["kappa"] == pytest.approx(1e-3)
    assert h["spec"]["seed"] == 42 and h["spec"]["algo"] == "weak"
    assert {"mean", "median", "p5", "p25", "p75", "p95", "variance"} <= set(h["summary"])
    s = read_csv(out)
    assert len(s) == 200 and s.meta.seed == 42


def test_run_is_byte_identical_and_thread_independent(tmp_path):
    args = ["run", "--rho", "1e-4", "--trials", "300", "--seed", "5"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv"), "--threads", "3"])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_json(tmp_path):
    out = tmp_path / "t.json"
    assert main(["run", "--algo", "test-restart", "--rho", "1e-4", "--trials", "50",
                 "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert {"spec", "samples", "summary", "meta"} <= set(doc)
    assert "threads" not in doc["spec"]
    assert len(read_json(out)) == 50


def test_run_stdout(capsys):
    assert main(["run", "--algo", "standard", "--rho", "0.01", "--trials", "3"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("# spec:") and "\niterations\n" in text


def test_run_statevector(tmp_path):
    out = tmp_path / "sv.json"
    code = main(["run", "--algo", "weak", "--rho", "0.25", "--backend", "statevector",
                 "--n", "4", "--marked", "3", "--trials", "100", "--format", "json",
                 "--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["meta"]["successes"] == 100
    assert doc["meta"]["extra"] == {"n": 4, "marked": [3]}


@pytest.mark.parametrize("argv", [
    ["run", "--rho", "1e-6", "--kappa", "0", "--strict", "--trials", "2"],
    ["run", "--rho", "0.01", "--kappa", "0.9", "--strict", "--trials", "2"],
    ["run", "--rho", "2", "--trials", "2"],
    ["run", "--trials", "2"],
    ["run", "--rho", "0.01", "--kappa", "1.5"],
    ["run", "--rho", "0.01", "--kappa", "abc"],
    ["run", "--rho", "0.01", "--trials", "0"],
    ["run", "--rho", "0.5", "--backend", "statevector", "--n", "4", "--marked", "3"],
    ["run", "--backend", "statevector", "--n", "4"],
])
def test_bad_input_exit_two(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_zero_kappa_without_strict_is_capped(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code = main(["run", "--rho", "1e-6", "--kappa", "0", "--trials", "3",
                 "--max-iterations", "100", "--out", str(out)])
    assert code == EXIT_CAPPED
    assert out.exists()  # partial output still written
    assert read_csv(out).meta.successes == 0


def test_figure2_tiny(tmp_path):
    for d in ("a", "b"):
        assert main(["figure", "2", "--rho", "1e-6", "--trials", "10", "--seed", "3",
                     "--out", str(tmp_path / d)]) == EXIT_OK
    a = (tmp_path / "a" / "fig2_histogram.csv").read_bytes()
    assert a == (tmp_path / "b" / "fig2_histogram.csv").read_bytes()
    lines = [l for l in a.decode().splitlines() if not l.startswith("#")]
    assert lines[0] == "bin_start,bin_end,count"
    assert sum(int(l.split(",")[2]) for l in lines[1:]) == 10


def test_figure3_rows(tmp_path):
    assert main(["figure", "3", "--rho", "0.01", "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "fig3_angles.csv"
    h = headers(path)
    assert h["segments"]["L_max"] == 8 and h["segments"]["ell_min"] == 8
    rows = [l.split(",") for l in path.read_text().splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 21 and rows[0][0] == "10" and rows[-1][0] == "30"
    for r in rows:
        m = float(r[1]) % math.pi
        assert (r[3] == "1") == (math.pi / 4 <= m <= 3 * math.pi / 4)


def test_figure4_rejects(tmp_path, capsys):
    assert main(["figure", "4", "--rho", "1e-6", "--kappa", "1e-3", "--trials", "10000",
                 "--seed", "7", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "fig4_tests.json").read_text())
    assert doc["ks"]["reject_at_1pct"] and doc["ad"]["reject_at_1pct"]
    for name in ("weak", "test_restart"):
        text = (tmp_path / f"fig4_ecdf_{name}.csv").read_text()
        assert "# spec:" in text and "iterations,ecdf" in text


@pytest.mark.parametrize("rho", ["1e-4", "1", "0.0625"])
def test_verify_passes(rho, capsys):
    assert main(["verify", "--rho", rho]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


def test_verify_fails_above_bound(tmp_path, capsys):
    rho = 1e-4
    kappa = 1.01 * kappa_upper_bound(rho)
    out = tmp_path / "v.json"
    assert main(["verify", "--rho", str(rho), "--kappa", repr(kappa),
                 "--out", str(out)]) == EXIT_VERIFY
    text = capsys.readouterr().out
    assert "FAIL  theta quadrant bounds" in text and "witness=" in text
    doc = json.loads(out.read_text())
    theta = next(c for c in doc["checks"] if c["name"] == "theta quadrant bounds")
    w = theta["witness"]
    assert abs(math.remainder(w["a"] - w["maximizer"], math.pi)) < 0.01


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "weakloop.cli", "verify", "--rho", "0.01"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("rho=0.01")
