from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dnfrac.cli import main
from dnfrac.errors import QuadratureError
from dnfrac.special_functions import ml


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, cfg, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


CAPUTO = {"orders": [1.0, 0.5], "matrix": [[-1.0]], "initial": [[1.0]], "grid": {"N": 256, "l": 1.0}}


# -- ml ----------------------------------------------------------------------------


def test_ml_exponential(capsys):
    code, out, _ = run(["ml", "--alpha", 1, "--beta", 1, "--z", 1], capsys)
    assert code == 0
    assert out == "2.7182818284590451\n"
    assert float(out) == pytest.approx(2.718281828459045, rel=1e-15)


def test_ml_limit_value(capsys):
    code, out, _ = run(["ml", "--alpha", 0.5, "--beta", 0.5, "--z", 0], capsys)
    assert code == 0
    assert float(out) == pytest.approx(0.5641895835477563, rel=1e-15)


def test_ml_several_arguments_and_gamma(capsys):
    code, out, _ = run(["ml", "--alpha", 1, "--beta", 1, "--gamma", 2, "--z", 0, 1], capsys)
    assert code == 0
    assert [float(v) for v in out.split()] == pytest.approx([1.0, 2 * math.e], rel=1e-15)


def test_ml_matrix_file_nilpotent(tmp_path, capsys):
    mfile = tmp_path / "a.json"
    mfile.write_text("[[0, 1], [0, 0]]")
    code, out, _ = run(["ml", "--alpha", 0.8, "--beta", 1, "--z", 2, "--matrix-file", mfile], capsys)
    assert code == 0
    header, row = out.splitlines()
    assert header == "z,e_1_1,e_1_2,e_2_1,e_2_2"
    vals = [float(v) for v in row.split(",")]
    assert vals == pytest.approx([2.0, 1.0, 2.0 / math.gamma(1.8), 0.0, 1.0], rel=1e-15)


def test_ml_nonconvergence_exit(capsys):
    code, _, err = run(["ml", "--alpha", 0.1, "--beta", 1, "--z", -50], capsys)
    assert code == 3
    assert "error" in err


def test_ml_bad_parameters(tmp_path, capsys):
    assert run(["ml", "--alpha", 0, "--beta", 1, "--z", 1], capsys)[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["ml", "--alpha", "abc", "--beta", "1"])
    assert info.value.code == 2
    assert run(["ml", "--alpha", 1, "--beta", 1, "--matrix-file", tmp_path / "missing.json"], capsys)[0] == 2


def test_ml_output_file(tmp_path, capsys):
    code, out, _ = run(["--output-dir", tmp_path, "ml", "--alpha", 1, "--beta", 1, "--z", 0, "--output", "v.txt"], capsys)
    assert code == 0 and out == ""
    assert (tmp_path / "v.txt").read_text() == "1\n"


# -- solve --------------------------------------------------------------------------


def test_solve_caputo_fixture(tmp_path, capsys):
    cfg = write_config(tmp_path, CAPUTO)
    code, _, _ = run(["solve", cfg, "--output-dir", tmp_path], capsys)
    assert code == 0
    lines = (tmp_path / "solution.csv").read_text().splitlines()
    assert lines[0] == "x,u_1"
    assert len(lines) == 257
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    exact = np.array([ml(0.5, 1.0, -math.sqrt(x)) for x in data[:, 0]])
    assert np.max(np.abs(data[:, 1] - exact)) < 1e-8
    diag = (tmp_path / "diagnostics.txt").read_text()
    for section in ("[validation]", "[residual]", "[initial_conditions]", "[warnings]"):
        assert section in diag
    assert "solvability: pass" in diag


def test_solve_is_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(CAPUTO, forcing={"kind": "poly_f0", "coeffs": [1.0, 0.5]}))
    outputs = []
    for sub in ("a", "b"):
        assert run(["--output-dir", tmp_path / sub, "solve", cfg], capsys)[0] == 0
        outputs.append(((tmp_path / sub / "solution.csv").read_bytes(), (tmp_path / sub / "diagnostics.txt").read_bytes()))
    assert outputs[0] == outputs[1]


def test_solve_custom_output_names(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(CAPUTO, output={"solution": "u.csv", "diagnostics": "d.txt"}, certify=False))
    assert run(["solve", cfg, "--output-dir", tmp_path], capsys)[0] == 0
    assert (tmp_path / "u.csv").exists() and (tmp_path / "d.txt").exists()


def test_solve_grid_forcing_warning(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(CAPUTO, grid={"N": 64}, forcing={"kind": "grid_f", "values": [1.0] * 64}))
    assert run(["solve", cfg, "--output-dir", tmp_path], capsys)[0] == 0
    assert "grid derivative" in (tmp_path / "diagnostics.txt").read_text()


def test_solve_missing_initial(tmp_path, capsys):
    cfg = {k: v for k, v in CAPUTO.items() if k != "initial"}
    code, _, err = run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)
    assert code == 2
    assert "initial" in err


def test_solve_unknown_key(tmp_path, capsys):
    code, _, err = run(["solve", write_config(tmp_path, dict(CAPUTO, colour="red")), "--output-dir", tmp_path], capsys)
    assert code == 2
    assert "colour" in err


def test_solve_json_syntax_error_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "orders": [1.0, 0.5],\n  "matrix": [[-1.0]]\n  "initial": [[1.0]]\n}\n')
    code, _, err = run(["solve", path, "--output-dir", tmp_path], capsys)
    assert code == 2
    assert "line 4" in err


def test_solve_bad_field_path(tmp_path, capsys):
    cfg = dict(CAPUTO, grid={"N": 2})
    code, _, err = run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)
    assert code == 2
    assert "grid/N" in err


def test_solve_validation_failure(tmp_path, capsys):
    cfg = dict(CAPUTO, orders=[0.4, 0.5])
    code, _, err = run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)
    assert code == 4
    assert "solvability: FAIL" in err
    assert not (tmp_path / "solution.csv").exists()


def test_solve_override(tmp_path, capsys):
    cfg = dict(CAPUTO, orders=[0.6, 0.3, 0.3], initial=[[1.0], [0.0]], override_solvability=True, certify=False)
    assert run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)[0] == 0
    assert "existence hypotheses fail" in (tmp_path / "diagnostics.txt").read_text()


def test_solve_forcing_length_is_validation_failure(tmp_path, capsys):
    cfg = dict(CAPUTO, forcing={"kind": "grid_f", "values": [1.0] * 10})
    code, _, err = run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)
    assert code == 4
    assert "dimensions: FAIL" in err


def test_solve_solver_error(tmp_path, capsys, monkeypatch):
    import dnfrac.cli

    def broken(*args, **kwargs):
        raise QuadratureError("grid too coarse")

    monkeypatch.setattr(dnfrac.cli, "solve", broken)
    code, _, err = run(["solve", write_config(tmp_path, CAPUTO), "--output-dir", tmp_path], capsys)
    assert code == 5
    assert "solver error" in err


def test_solve_nonconvergence(tmp_path, capsys):
    cfg = dict(CAPUTO, tolerances={"max_terms": 3}, certify=False)
    assert run(["solve", write_config(tmp_path, cfg), "--output-dir", tmp_path], capsys)[0] == 3


# -- verify -----------------------------------------------------------------------------


def test_verify_identities(tmp_path, capsys):
    code, out, _ = run(["verify", "identities", "--seed", 0, "--output-dir", tmp_path], capsys)
    assert code == 0
    report = (tmp_path / "verify-identities.txt").read_bytes()
    assert report.decode() == out
    assert out.splitlines()[-1].endswith("failed=0")
    code, _, _ = run(["verify", "identities", "--seed", 0, "--output-dir", tmp_path, "--report", "again.txt"], capsys)
    assert code == 0
    assert (tmp_path / "again.txt").read_bytes() == report


def test_verify_unknown_suite(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["verify", "everything", "--output-dir", str(tmp_path)])
    assert info.value.code == 2


def test_verify_bad_config(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text("{}")
    assert run(["verify", "certificate", "--config", path, "--output-dir", tmp_path], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dnfrac", "ml", "--alpha", "2", "--beta", "1", "--z", "4"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(3.7621956910836315, rel=1e-15)  # cosh(2)
