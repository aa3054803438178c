import json
import subprocess
import sys

import numpy as np
import pytest

from regdigraph.cli import main, parse_complex


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_parse_complex():
    assert parse_complex("1,2") == 1 + 2j
    assert parse_complex("1+1j") == 1 + 1j
    assert parse_complex("0") == 0


def test_sample_enumerate(capsys):
    code, obj = run_json(capsys, ["sample", "--n", "4", "--d", "2", "--method", "enumerate"])
    assert code == 0 and obj["count"] == 90
    assert {"version", "config"} <= obj.keys()
    rows = obj["digraphs"][0]["out_adj"]
    assert all(1 <= j <= 4 for r in rows for j in r)


def test_missing_required_argument(capsys):
    assert main(["sample", "--n", "4"]) == 2
    assert main(["circlaw", "--n", "40"]) == 2
    assert main(["ssv", "--n", "40", "--d", "4"]) == 2


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["regularity", "--property", "codeg"]) == 2
    assert main(["factor", "--d", "2"]) == 2
    assert main(["sample", "--n", "4", "--d", "5"]) == 2
    assert main(["spectrum", "--in", str(tmp_path / "missing.csv")]) == 2


def test_sample_deterministic(tmp_path):
    outs = []
    p = tmp_path / "s.json"
    for _ in range(2):
        assert main(["sample", "--n", "30", "--d", "5", "--count", "2", "--seed", "7", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    p = tmp_path / "s2.json"
    main(["sample", "--n", "30", "--d", "5", "--count", "2", "--seed", "8", "--out", str(p)])
    assert json.loads(p.read_text())["digraphs"] != json.loads(outs[0])["digraphs"]


def test_sample_csv_and_spectrum(tmp_path, capsys):
    m = tmp_path / "a.csv"
    assert main(["sample", "--n", "12", "--d", "3", "--seed", "1", "--out", str(m)]) == 0
    M = np.loadtxt(m, delimiter=",")
    assert M.shape == (12, 12) and np.all(M.sum(0) == 3) and np.all(M.sum(1) == 3)
    outdir = tmp_path / "spec"
    assert main(["spectrum", "--in", str(m), "--ops", "eigs,svs,g,logpot", "--out", str(outdir)]) == 0
    obj = json.loads((outdir / "spectrum.json").read_text())
    assert obj["singular_values"][0] == pytest.approx(3.0)
    ev = np.loadtxt(outdir / "eigenvalues.csv", delimiter=",", skiprows=1)
    assert ev.shape == (12, 2) and np.max(np.hypot(ev[:, 0], ev[:, 1])) == pytest.approx(3.0)
    assert main(["spectrum", "--in", str(m), "--ops", "bogus"]) == 2


def test_regularity_and_netgeom(capsys):
    code, obj = run_json(capsys, ["regularity", "--n", "40", "--d", "10", "--property", "codeg"])
    assert code in (0, 1) and "report" in obj
    code, obj = run_json(capsys, ["netgeom", "--op", "q", "--n", "16", "--rho", "0.3"])
    assert code == 0 and 0 < obj["Q"] <= 1
    code, obj = run_json(capsys, ["netgeom", "--op", "net", "--n", "8", "--m", "1"])
    assert code == 0 and obj["cardinality"] <= obj["bound"]


def test_circlaw_outputs(tmp_path):
    out = tmp_path / "cl"
    code = main(["circlaw", "--n", "200", "--d", "40", "--samples", "2", "--tol", "0.2", "--out", str(out)])
    assert code == 0
    obj = json.loads((out / "circlaw.json").read_text())
    assert len(obj["samples"]) == 2 and obj["passed"]
    ev = np.loadtxt(out / "eigenvalues.csv", delimiter=",", skiprows=1)
    assert ev.shape == (2 * 199, 2)  # Perron eigenvalue excluded per sample
    assert (out / "eigenvalues.csv").read_text().startswith("re,im\n")


def test_factor_cli(tmp_path, capsys):
    B = tmp_path / "b.csv"
    B.write_text("1,1,0\n0,1,1\n1,0,1\n")
    code, obj = run_json(capsys, ["factor", "--in", str(B), "--d", "2"])
    assert code == 0 and obj["exists"] and obj["flow_value"] == 6
    B.write_text("1,1,1\n1,1,1\n0,0,0\n")
    code, obj = run_json(capsys, ["factor", "--in", str(B), "--d", "1"])
    assert not obj["exists"] and obj["deficit"] > 0 and all(t >= 1 for t in obj["certificate"])
    code, obj = run_json(capsys, ["factor", "--prob", "--n", "40", "--p", "0.5", "--delta", "0.5",
                                  "--samples", "3"])
    assert code == 0 and obj["d"] == 10


def test_accept_fast_subset(capsys):
    code = main(["accept", "--only", "1", "3"])
    cap = capsys.readouterr()
    obj = json.loads(cap.out)
    assert code == 0 and obj["passed"]
    assert [r["number"] for r in obj["results"]] == [1, 3]
    assert "criterion  1 PASS" in cap.err


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "regdigraph", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
