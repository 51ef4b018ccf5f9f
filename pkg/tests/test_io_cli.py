import json
import logging
import subprocess
import sys

import numpy as np
import pytest

from lie2orbits.cli import EXIT_FAILED, RunConfig, load_crossed_module, main, run
from lie2orbits.examples import builtin
from lie2orbits.io import (
    SchemaError,
    crossed_module_from_dict,
    crossed_module_to_dict,
    load_json,
    parse_point,
    save_json,
)


def _read_lines(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_round_trip(bundle, tmp_path):
    path = tmp_path / "cm.json"
    save_json(bundle.cm, path)
    back = load_json(path)
    assert back.name == bundle.cm.name
    assert back.h.basis_names == bundle.cm.h.basis_names
    assert np.array_equal(back.h.c, bundle.cm.h.c)
    assert np.array_equal(back.g.c, bundle.cm.g.c)
    assert np.array_equal(back.phi, bundle.cm.phi)
    assert np.array_equal(back.rho, bundle.cm.rho)


@pytest.mark.parametrize("doc", [
    [],
    {"h": {"basis": ["a"]}},
    {"h": {"basis": ["a"], "brackets": []}, "g": {"basis": ["x"], "brackets": [[0, 0, 0]]}},
    {"h": {"basis": ["a"], "brackets": []}, "g": {"basis": ["x"], "brackets": []},
     "phi": [[1.0, 2.0]]},
    {"h": {"basis": ["a"], "brackets": []}, "g": {"basis": ["x"], "brackets": []},
     "rho": [[0, 0, 5, 1.0]]},
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        crossed_module_from_dict(doc)


def test_parse_point():
    assert np.array_equal(parse_point("1, 2,3", 3), [1.0, 2.0, 3.0])
    with pytest.raises(SchemaError):
        parse_point("1,2", 3)
    with pytest.raises(SchemaError):
        parse_point("1,a,3", 3)


def test_load_builtin_alias():
    assert load_crossed_module("builtin:heisenberg") is builtin("heisenberg").cm


def _write(tmp_path, doc, name="cm.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_antisymmetrized_on_load(tmp_path, caplog):
    doc = crossed_module_to_dict(builtin("pair-so3").cm)
    doc["h"]["brackets"].append([1, 0, 2, 0.0])  # contradicts [e1, e2] = e3
    with caplog.at_level(logging.WARNING):
        cm = load_crossed_module(_write(tmp_path, doc), force=True)
    assert "antisymmetrized" in caplog.text
    assert cm.h.c[0, 1, 2] == 0.5


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "out.jsonl"
    assert main(["validate", "--input", "builtin:heisenberg", "--output", str(out)]) == 0
    records = _read_lines(out)
    checks = [r for r in records if r["type"] == "check"]
    assert len(checks) == 4 and all(r["residual"] == 0.0 for r in checks)
    assert records[-1]["type"] == "summary" and records[-1]["schema"] == 1
    assert records[-1]["basis"]["h"] == ["p", "q", "z"]

    assert main(["frobnicate", "--input", "builtin:heisenberg"]) == 1
    assert main(["validate", "--input", "builtin:nope"]) == 2
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["validate", "--input", str(bad_json)]) == 2
    assert main(["validate", "--input", str(tmp_path / "missing.json")]) == 4
    assert main(["check-mult", "--input", "builtin:pair-so3", "--point", "1,2"]) == 2
    assert main(["validate", "--input", "builtin:heisenberg", "--tol", "-1"]) == 2
    assert main(["validate", "--input", "builtin:heisenberg",
                 "--output", str(tmp_path / "no" / "dir.jsonl")]) == 4


def test_cli_peiffer_violation(tmp_path, capsys):
    doc = {"name": "bad",
           "h": {"basis": ["a", "b"], "brackets": []},
           "g": {"basis": ["x"], "brackets": []},
           "phi": [[1.0, 0.0]],
           "rho": [[0, 0, 1, 1.0]]}
    path = _write(tmp_path, doc)
    assert main(["validate", "--input", path]) == 3
    printed = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert any(r["name"] == "peiffer" and not r["pass"] for r in printed)
    # forced: the report is produced and the failing check gives exit 5
    assert main(["validate", "--input", path, "--force"]) == EXIT_FAILED


def test_cli_check_mult_pair(tmp_path):
    out = tmp_path / "m.jsonl"
    code = main(["check-mult", "--input", "builtin:pair-so3", "--point", "0,0,1",
                 "--samples", "30", "--output", str(out)])
    assert code == 0
    summary = _read_lines(out)[-1]
    assert summary["point"] == [0.0, 0.0, 1.0] and summary["pass"]


def test_cli_double_check_needs_group_model(tmp_path):
    doc = crossed_module_to_dict(builtin("pair-so3").cm)
    assert main(["double-check", "--input", _write(tmp_path, doc), "--samples", "5"]) == 3


def test_cli_orbit_and_kks(tmp_path):
    out = tmp_path / "o.jsonl"
    assert main(["orbit", "--input", "builtin:pair-so3", "--samples", "10",
                 "--output", str(out)]) == 0
    names = [r["name"] for r in _read_lines(out) if r["type"] == "check"]
    assert "orbit_rank_split" in names and "flow_exactness" in names
    assert main(["kks", "--input", "builtin:pair-so3", "--point", "0,0,1,0,0,0",
                 "--samples", "5", "--output", str(out)]) == 0


def test_report_all_zero_module_has_vacuous_record():
    code, lines = run(RunConfig("report-all", "builtin:zero-so3-r3", n_samples=20))
    assert code == 0
    records = [json.loads(x) for x in lines]
    assert any("coisotropy vacuous" in r.get("note", "") for r in records)


def test_exit_code_matches_records():
    code, lines = run(RunConfig("check-coiso", "builtin:heisenberg", n_samples=10))
    records = [json.loads(x) for x in lines if '"check"' in x]
    assert (code == 0) == all(r["pass"] for r in records)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lie2orbits", "validate", "--input",
                           "builtin:pair-so3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["type"] == "summary"
