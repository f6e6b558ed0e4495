import json
import subprocess
import sys

import pytest

from csskit.cli import (
    EXIT_BUDGET,
    EXIT_CAP,
    EXIT_CONSTRAINT,
    EXIT_OK,
    EXIT_UNKNOWN_MODEL,
    EXIT_USAGE,
    EXIT_VERIFY,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_homology_report(capsys):
    code, doc = run(capsys, "homology", "--model", "toric2d", "--L", "2")
    assert code == EXIT_OK
    assert doc["homology_dims"] == [1, 2, 1]
    assert doc["pass"] and doc["command"] == "homology"


def test_gsd_report(capsys):
    code, doc = run(capsys, "gsd", "--model", "cc:3,1", "--L", "2")
    assert code == EXIT_OK
    assert doc["reports"][0]["lhs"] == 10
    code, doc = run(capsys, "gsd", "--model", "xcube", "--L", "2")
    assert code == EXIT_OK


def test_build_chamon(capsys):
    code, doc = run(capsys, "build", "--model", "chamon", "--L", "2")
    assert code == EXIT_OK
    assert doc["chamon"]["cubes"] == 8


def test_uncorrected_duality_is_a_verification_failure(capsys):
    code, doc = run(capsys, "duality", "--model", "toric2d", "--L", "2", "--K", "0.3,0.7")
    assert code == EXIT_VERIFY
    assert not doc["pass"]


def test_usage_errors(capsys):
    code, doc = run(capsys, "strange", "--model", "chamon", "--L", "2")
    assert code == EXIT_USAGE and doc["error"] == "usage"
    code, _ = run(capsys, "kw-verify", "--model", "toric2d", "--cap-qubits", "2")
    assert code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == EXIT_USAGE


def test_unknown_model(capsys):
    code, doc = run(capsys, "homology", "--model", "foo")
    assert code == EXIT_UNKNOWN_MODEL
    assert doc["error"] == "unknown model"


def test_cap_exceeded(capsys):
    code, _ = run(capsys, "kw-verify", "--model", "toric2d", "--L", "3", "--cap-qubits", "10")
    assert code == EXIT_CAP
    code, _ = run(capsys, "duality", "--model", "toric2d", "--L", "4", "--cap-spins", "8")
    assert code == EXIT_CAP


def test_constraint_violation(capsys):
    code, doc = run(capsys, "gsd", "--model", "qc:4,1,0", "--L", "2")
    assert code == EXIT_CONSTRAINT
    assert doc["error"] == "constraint violation"


def test_budget_exceeded(capsys):
    code, doc = run(capsys, "gsd", "--model", "cc:6,2", "--L", "3")
    assert code == EXIT_BUDGET
    assert doc["error"] == "budget exceeded"


def test_reports_are_byte_identical(capsys):
    argv = ["gauge-protocol", "--model", "qpim2d", "--L", "2,2", "--runs", "5", "--seed", "11"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "qpim2d", "L": [2, 3]}))
    code, doc = run(capsys, "homology", "--config", str(cfg))
    assert code == EXIT_OK
    assert doc["config"]["model"] == "qpim2d" and doc["config"]["L"] == [2, 3]
    code, doc = run(capsys, "homology", "--config", str(cfg), "--L", "3,3")
    assert doc["config"]["L"] == [3, 3]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    code, _ = run(capsys, "homology", "--config", str(bad))
    assert code == EXIT_USAGE


def test_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["homology", "--model", "toric2d", "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    doc = json.loads(out.read_text())
    assert doc["homology_dims"] == [1, 2, 1]
    assert "out" not in doc["config"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "csskit", "gsd", "--model", "qc:3,1,0", "--L", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["reports"][0]["lhs"] == 3
