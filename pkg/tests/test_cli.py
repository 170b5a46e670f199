import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from cycleagg.cli import main
from cycleagg.instances import Graph, render_graph
from cycleagg.proofkernel import motzkin_certificate

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--no-timestamp")
    assert code == 0, err
    return json.loads(out)


def test_verify_cert_accepts_shipped_file(capsys):
    rep = run_json(capsys, "verify-cert", DATA / "motzkin.json")
    assert rep["result"]["verdict"] == "Accept" and rep["result"]["residual"] == "0"


def test_verify_cert_builtin_and_numeric(capsys):
    rep = run_json(capsys, "verify-cert", "robinson", "--strategy", "numeric", "--samples", "200", "--seed", "3")
    assert rep["result"]["verdict"] == "Accept" and rep["result"]["samples"] == 200


def test_verify_cert_reports_reject(capsys, tmp_path):
    bad = motzkin_certificate().with_weight(4, Fraction(3, 4) + Fraction(1, 10))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad.to_json()))
    assert run_json(capsys, "verify-cert", path)["result"]["verdict"] == "Reject"


def test_verify_cert_malformed(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    assert run(capsys, "verify-cert", path)[0] == 2


def test_mis_potential_c5(capsys):
    rep = run_json(capsys, "mis-potential", DATA / "c5.dimacs", "--z", "1,0", "--w", "zero")
    ev = rep["result"]["evaluations"][0]
    assert ev["psi_sharp"]["re"] == pytest.approx(math.e) and abs(ev["psi_sharp"]["im"]) < 1e-12
    assert rep["version"] and rep["config"]["z"] == [{"re": 1.0, "im": 0.0}]


def test_mis_potential_derivatives_and_w_file(capsys, tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("0.1 -0.2 0.3 0.0 -0.5\n")
    rep = run_json(capsys, "mis-potential", DATA / "c5.dimacs", "--z", "0.5,1.3", "--z", "1", "--w", wfile,
                   "--hess")
    evs = rep["result"]["evaluations"]
    assert len(evs) == 2 and len(evs[0]["gradient"]) == 5 and len(evs[0]["hessian"]) == 5


def test_w_outside_cube_is_domain_error(capsys, tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("0.1 -0.2 1.5 0.0 -0.5\n")
    assert run(capsys, "mis-potential", DATA / "c5.dimacs", "--z", "1", "--w", wfile)[0] == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_output_is_error(capsys, tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("0.9 0.9 0.9 0.9 0.9\n")
    code, out, err = run(capsys, "mis-potential", DATA / "c5.dimacs", "--z", "1e6", "--w", wfile)
    assert code == 1 and "non-finite" in err and out == ""


def test_approx_recip_csv(capsys):
    code, out, _ = run(capsys, "approx-recip", "--a", "0.5", "--m", "2", "--M", "60", "--out", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["s", "approx", "exact", "rel_err"] and len(rows) == 201
    assert float(rows[1][0]) == pytest.approx(math.exp(-30)) and float(rows[-1][0]) == pytest.approx(math.e)


def test_approx_recip_json_term_count(capsys):
    rep = run_json(capsys, "approx-recip", "--format", "json", "--sweep", "e2:e10", "--points", "20")
    assert rep["result"]["terms"] == 63 and len(rep["result"]["sweep"]) == 20


def test_sat_potential(capsys):
    rep = run_json(capsys, "sat-potential", DATA / "mobius2.cnf", "--z", "0.3,0.1")
    res = rep["result"]
    assert res["lp_sufficiency_flag"] is False and res["matrix_dim"] == 8
    assert abs(complex(res["evaluations"][0]["phi"]["re"], res["evaluations"][0]["phi"]["im"])) > 0


def test_classify_chain(capsys):
    res = run_json(capsys, "classify-chain", DATA / "mobius2.cnf")["result"]
    assert res["classification"] == "MobiusCycle"
    assert res["sharper"] == {"coeffs": {"1": 1.0, "2": 1.0, "4": 1.0}, "rhs": -1.0, "sense": ">="}


def test_lift_ineq(capsys):
    res = run_json(capsys, "lift-ineq", DATA / "triangle.dimacs", "--cycle", "1,2,3", "--subdivide", "1-2:3")
    res = res["result"]
    assert res["lifted"]["coeffs"] == {str(v): 1.0 for v in range(1, 6)} and res["lifted"]["rhs"] == -1.0
    assert res["graph"]["n"] == 5


def test_lift_even_path_is_validation_error(capsys):
    assert run(capsys, "lift-ineq", DATA / "triangle.dimacs", "--cycle", "1,2,3", "--subdivide", "1-2:2")[0] == 1


def test_oracle_subcommands(capsys, tmp_path):
    g = tmp_path / "p.dimacs"
    g.write_text(render_graph(Graph.petersen()))
    assert run_json(capsys, "oracle", "cycles", g, "--max-len", "5")["result"]["count"] == 12
    walks = run_json(capsys, "oracle", "walks", DATA / "triangle.dimacs", "--length", "3", "--closed")
    assert walks["result"]["count"] == 6
    mob = run_json(capsys, "oracle", "mobius", DATA / "mobius2.cnf", "--z", "0.3")["result"]
    assert set(mob) == {"printed", "distinct"}
    scan = run_json(capsys, "oracle", "assignments", DATA / "mobius2.cnf")["result"]
    assert scan["satisfiable"] and scan["min_f"] == 0
    pts = run_json(capsys, "oracle", "sphere", "--dim", "3", "--count", "4")["result"]["points"]
    assert len(pts) == 4


def test_reports_are_reproducible(capsys):
    argv = ["verify-cert", "motzkin", "--strategy", "numeric", "--samples", "50", "--no-timestamp"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    code, out, _ = run(capsys, "verify-cert", "motzkin")
    assert "timestamp" in json.loads(out)


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CYCLEAGG_SEED", "17")
    assert run_json(capsys, "oracle", "sphere", "--dim", "2")["config"]["seed"] == 17


def test_out_path(capsys, tmp_path):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify-cert", "motzkin", "--out", dest)
    assert code == 0 and out == "" and json.loads(dest.read_text())["result"]["verdict"] == "Accept"


def test_io_and_parse_errors(capsys, tmp_path):
    assert run(capsys, "mis-potential", tmp_path / "missing.dimacs", "--z", "1")[0] == 2
    bad = tmp_path / "bad.dimacs"
    bad.write_text("p edge 2 1\ne 1 3\n")
    code, _, err = run(capsys, "mis-potential", bad, "--z", "1")
    assert code == 2 and "line 2" in err


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify-cert", "motzkin", "--bogus"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cycleagg", "approx-recip", "--sweep", "e0:e1", "--points", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.count("\n") == 4
