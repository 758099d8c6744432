import json
import subprocess
import sys

import pytest

from centering_lab.cli import run
from centering_lab.serialize import validate


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(capsys, *argv):
    code, out, _ = _run(capsys, *argv)
    doc = json.loads(out)
    validate(doc, "output")
    return code, doc


def test_cp(capsys):
    code, doc = _json(capsys, "cp", "--p", "3")
    assert code == 0
    assert doc["result"]["value"] == pytest.approx(1.0957314337, abs=1e-10)
    assert doc["metadata"] == {"seed": 0, "starts": 64, "version": doc["metadata"]["version"], "p": "3.0"}


def test_cp_alpha_and_bad_alpha(capsys):
    code, doc = _json(capsys, "cp", "--p", "3", "--alpha", "0.3")
    assert doc["result"]["value"] == pytest.approx(1.03588946406, abs=1e-10)
    code, out, err = _run(capsys, "cp", "--p", "3", "--alpha", "1.5")
    assert code == 2 and "alpha" in err and out == ""


def test_gbeta_inf(capsys):
    code, doc = _json(capsys, "gbeta", "--p", "inf", "--beta", "0.3")
    assert code == 0 and doc["result"]["value"] == 1.4


def test_gbeta_grid_and_target(capsys):
    code, doc = _json(capsys, "gbeta", "--p", "3", "--beta", "0.3", "--cells", "10")
    g = doc["result"]["grid"]
    assert g["numeric_norm"] == pytest.approx(g["analytic_norm"], abs=1e-6)
    code, doc = _json(capsys, "gbeta", "--p", "3", "--target", "1.05")
    assert doc["result"]["value"] == pytest.approx(1.05, abs=1e-9)


def test_opnorm_two_atoms(capsys, tmp_path):
    path = tmp_path / "two.json"
    path.write_text('{"weights": [0.3, 0.7]}')
    code, doc = _json(capsys, "opnorm", "--space", str(path), "--p", "2", "--partition", "trivial")
    assert code == 0 and doc["result"]["value"] == 1.0


def test_opnorm_matrix_lower(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"rows": [[2, 0], [0, 3]]}')
    code, doc = _json(capsys, "opnorm", "--n", "2", "--matrix", str(path), "--p", "3", "--lower")
    assert doc["result"]["value"] == pytest.approx(2.0, abs=1e-9)


def test_csv_outputs(capsys):
    code, out, _ = _run(capsys, "cp-table", "--format", "csv")
    assert code == 0
    assert out.startswith("p,C_p,alpha_p,C_q,interpolation_bound\r\n")
    assert "inf,2,,2,2\r\n" in out
    code, out, _ = _run(capsys, "nu", "--p", "3", "--n", "2,4", "--format", "csv")
    assert out == "n,nu,converged\r\n2,1,True\r\n4,1.05260603679,True\r\n"


def test_mixture_dist(capsys, tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"atoms": [[-1, 0.625], [1, 0.25], [3, 0.125]]}')
    code, doc = _json(capsys, "mixture", "--dist", str(path))
    comps = doc["result"]["components"]
    assert len(comps) == 2 and all(c["weight"] == 0.5 for c in comps)


def test_bcap_and_gamma_exp(capsys, tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"functions": [{"cells": 20, "values": [(i + 0.5) / 20 for i in range(20)]}]}))
    code, doc = _json(capsys, "bcap", "--functions", str(path), "--p", "2", "--eps", "0.2")
    assert code == 0 and doc["result"]["per_function_error"][0] < 0.2
    code, out, _ = _run(capsys, "gamma-exp", "--family", "mean", "--p", "3", "--n", "8,16", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "n,lhs_norm,lower,nu,slack"
    code, doc = _json(capsys, "gamma-exp", "--family", "half-mean", "--p", "2", "--n", "8", "--eigen")
    assert doc["result"]["rows"][0]["min_slack"] == pytest.approx(0, abs=1e-12)


def test_oracle(capsys):
    code, doc = _json(capsys, "oracle", "--n", "10", "--p", "3")
    assert abs(doc["result"]["gap"]) <= 1e-9


@pytest.mark.parametrize("argv,code", [
    (["cp"], 1),
    (["opnorm", "--p", "2"], 1),
    (["opnorm", "--space", "/nonexistent.json", "--p", "2"], 1),
    (["cp", "--p", "0.5"], 1),
    (["nu", "--p", "3", "--n", "1"], 2),
    (["gamma-exp", "--p", "3"], 1),
])
def test_exit_codes(capsys, argv, code):
    assert run(argv) == code
    assert capsys.readouterr().err


def test_nonconvergence_exit_code(capsys, tmp_path, monkeypatch):
    import functools

    from centering_lab import cli
    from centering_lab.opnorm import OptimizerOptions

    # one ascent step cannot meet the stopping tolerance
    monkeypatch.setattr(cli, "OptimizerOptions", functools.partial(OptimizerOptions, max_iters=1))
    path = tmp_path / "m.json"
    rows = [[((i * 7 + j * 3) % 5) - 2.0 for j in range(6)] for i in range(6)]
    path.write_text(json.dumps({"rows": rows}))
    code = run(["opnorm", "--n", "6", "--matrix", str(path), "--p", "3.7", "--starts", "2"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 3
    assert doc["converged"] is False


def test_out_file_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["oracle", "--n", "9", "--p", "4", "--seed", "3", "--out", str(a)]) == 0
    assert run(["oracle", "--n", "9", "--p", "4", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "centering_lab", "cp", "--p", "inf", "--format", "csv"],
                       capture_output=True, check=True)
    assert r.stdout == b"p,alpha,value\r\ninf,,2\r\n"
