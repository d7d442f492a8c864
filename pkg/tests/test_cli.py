import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from kronnet.cli import main
from kronnet.io import parse_netlist, read_trace_csv

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", DATA / "y.json")
    assert code == 0
    assert json.loads(out) == {"valid": True, "problems": []}


def test_validate_reports_problems(tmp_path, capsys):
    doc = json.loads((DATA / "y.json").read_text())
    doc["edges"].append({"tail": 2, "head": 2, "element": {"kind": "R", "values": {"r": 1}}})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", path)
    assert code == 1
    assert "self-loop edge 4" in json.loads(out)["problems"]


def test_reduce_y_gives_delta(tmp_path, capsys):
    out_path = tmp_path / "delta.json"
    code, out, _ = run(capsys, "reduce", DATA / "y.json", "-o", out_path)
    assert code == 0
    report = json.loads(out)
    assert report["eliminated_vertices"] == 1
    assert report["edges_before"] == 3 and report["edges_after"] == 3
    np.testing.assert_allclose(report["reduced_weights"], [1 / 3] * 3, atol=1e-12)
    assert report["schur_residual"] <= 1e-12
    reduced = parse_netlist(out_path.read_text())
    assert reduced.graph.edges == ((1, 2), (1, 3), (2, 3))
    assert json.loads(out_path.read_text())["meta"]["vertex_ids"] == [1, 2, 3]


def test_reduce_example2_not_reducible(tmp_path, capsys):
    code, _, err = run(capsys, "reduce", DATA / "example2.json", "-o", tmp_path / "x.json")
    assert code == 2
    assert "rank 2" in err
    assert not (tmp_path / "x.json").exists()


def test_compare_ladder_passes(tmp_path, capsys):
    code, out, _ = run(capsys, "compare", DATA / "rl_ladder.json", DATA / "sine.json", "--tol", "1e-6", "--traces", tmp_path / "tr")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert report["max_abs_error"] <= 1e-6
    a = read_trace_csv(tmp_path / "tr_original.csv")
    b = read_trace_csv(tmp_path / "tr_reduced.csv")
    assert a.labels == b.labels == ("I0b_1", "I0b_2")


def test_compare_with_injections(capsys):
    code, out, _ = run(capsys, "compare", DATA / "rl_ladder.json", DATA / "ladder_injection.json")
    assert code == 0, out


def test_compare_mismatch_exit_code(capsys):
    # roundoff alone exceeds a 1e-300 tolerance
    code, out, _ = run(capsys, "compare", DATA / "rl_ladder.json", DATA / "sine.json", "--tol", "1e-300", "--skip", "0")
    report = json.loads(out)
    assert not report["passed"] and 0 < report["max_abs_error"] < 1e-12
    assert code == 5


def test_simulate_writes_csv(tmp_path, capsys):
    path = tmp_path / "y.csv"
    code, _, _ = run(capsys, "simulate", DATA / "y.json", DATA / "y_excitation.json", "-o", path)
    assert code == 0
    header = path.read_text().splitlines()[0]
    assert header == "t,I0b_1,I0b_2,I0b_3,psi0i_4"
    trace = read_trace_csv(path)
    # currents into the boundary sum to zero
    np.testing.assert_allclose(trace.samples[:, :3].sum(axis=1), 0.0, atol=1e-12)


def test_freqresp(capsys):
    code, out, _ = run(capsys, "freqresp", DATA / "rl_ladder.json", "--samples", "20", "--seed", "3")
    report = json.loads(out)
    assert code == 0
    assert report["max_relative_error"] <= 1e-10
    assert len(report["frequencies"]) == 20


@pytest.mark.parametrize("argv", [["validate", "missing.json"], ["reduce", "missing.json", "-o", "x.json"]])
def test_missing_file(capsys, argv, tmp_path):
    argv = [str(tmp_path / a) if a.endswith(".json") else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 3
    assert "cannot read" in err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{")
    code, _, _ = run(capsys, "reduce", path, "-o", tmp_path / "out.json")
    assert code == 3


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kronnet.cli", "validate", str(DATA / "example1.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valid"] is True
