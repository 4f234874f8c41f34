import json
import os
import subprocess
import sys

import pytest

from reinhardt import cli
from reinhardt.convexlog import model_from_json, model_to_json


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_classify_exit_codes(capsys):
    code, out = run(capsys, "classify", "coeure_loeb")
    assert code == cli.EXIT_NON_MEMBER and json.loads(out)["member"] is False
    code, out = run(capsys, "classify", "model4")
    assert code == cli.EXIT_OK and json.loads(out)["case_label"] == "T1Model4"


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = run(capsys, "classify", str(bad))
    assert code == cli.EXIT_ERROR and "error" in json.loads(out)
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"kind": "model4", "r": "2"}))
    code, out = run(capsys, "classify", str(wrong))
    assert code == cli.EXIT_ERROR


def test_schema_rejects_unknown_kind(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"kind": "torus"}))
    code, out = run(capsys, "cone", str(path))
    assert code == cli.EXIT_ERROR and json.loads(out)["error"] == "SchemaError"


@pytest.mark.parametrize("name", cli.bundled_names())
def test_bundled_round_trip(name):
    data = cli.read_json(name, "model")
    model = model_from_json(data)
    again = model_from_json(json.loads(cli.dumps(model_to_json(model))))
    assert model_to_json(again) == model_to_json(model)


def test_output_is_deterministic_and_atomic(tmp_path, capsys):
    target = tmp_path / "verdict.json"
    code, _ = run(capsys, "classify", "parabolic_k2", "-o", str(target))
    first = target.read_bytes()
    code2, _ = run(capsys, "classify", "parabolic_k2", "-o", str(target))
    assert code == code2 == cli.EXIT_OK
    assert target.read_bytes() == first
    assert [p.name for p in tmp_path.iterdir()] == ["verdict.json"]


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("REINHARDT_SEED", raising=False)
    assert cli.resolve_seed(None) == 0xC0EFFEE
    monkeypatch.setenv("REINHARDT_SEED", "0x10")
    assert cli.resolve_seed(None) == 16
    assert cli.resolve_seed("7") == 7


def test_env_seed_changes_report(monkeypatch, capsys):
    monkeypatch.setenv("REINHARDT_SEED", "1")
    _, a = run(capsys, "stehle", "model6", "--fn", "UTilde6", "--samples", "1000", "--n-auts", "2")
    monkeypatch.setenv("REINHARDT_SEED", "2")
    _, b = run(capsys, "stehle", "model6", "--fn", "UTilde6", "--samples", "1000", "--n-auts", "2")
    assert json.loads(a)["seed"] == 1 and json.loads(b)["seed"] == 2


def test_cone_and_aut(tmp_path, capsys):
    code, out = run(capsys, "cone", "model6")
    data = json.loads(out)
    assert code == 0 and data["axis_count"] == 1 and data["cone"]["kind"] == "wedge"
    aut = tmp_path / "aut.json"
    aut.write_text(json.dumps({"matrix": [[2, 1], [1, 1]], "btilde": ["0", "0"]}))
    code, out = run(capsys, "aut", "coeure_loeb", "--aut", str(aut))
    data = json.loads(out)
    assert code == 0 and data["preservation"]["preserved"] and data["structure"]["kind"] == "HyperbolicType"
    aut.write_text(json.dumps({"matrix": [[1, 1], [0, 1]], "btilde": ["0", "0"]}))
    code, _ = run(capsys, "aut", "coeure_loeb", "--aut", str(aut))
    assert code == cli.EXIT_CHECK_FAILED


def test_stehle_commands(tmp_path, capsys):
    code, out = run(capsys, "stehle", "model6", "--fn", "UTilde6")
    assert code == 0
    assert max(max(b["sups"]) for b in json.loads(out)["bounded_above"]) <= 1e-10
    auts = tmp_path / "rot.json"
    auts.write_text(json.dumps([{"family": "model4", "alpha": {"re": 0, "im": 1}, "beta": {"re": 0, "im": 0},
                                 "rot": {"re": 0, "im": -1}}]))
    code, out = run(capsys, "stehle", "model4", "--aut-file", str(auts))
    assert code == 0 and json.loads(out)["bounded_above"][0]["sups"] == [0.0, 0.0, 0.0]
    code, _ = run(capsys, "stehle", "model4", "--fn", "NegSquare")
    assert code == cli.EXIT_CHECK_FAILED


def test_counterexample_commands(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    svg_path = tmp_path / "b.svg"
    code, out = run(capsys, "counterexample", "coeure_loeb", "--R-list", "2,1.5", "--csv", str(csv_path),
                    "--svg", str(svg_path))
    summary = json.loads(out)
    assert code == 0 and len(summary["rows"]) == 2 and summary["monotone"]
    assert csv_path.read_text().startswith("R,theta") and svg_path.read_text().startswith("<svg")
    code, _ = run(capsys, "counterexample", "coeure_loeb", "--R-list", "2,1.5", "--sign", "-")
    assert code == 0
    code, out = run(capsys, "counterexample", "coeure_loeb", "--N", "64", "--R-list", "1.001")
    assert code == cli.EXIT_CHECK_FAILED and "ResolutionTooLow" in out


def test_selftest(capsys):
    code, out = run(capsys, "selftest")
    assert code == 0


def test_module_entry_point():
    env = dict(os.environ)
    env.pop("REINHARDT_SEED", None)
    proc = subprocess.run([sys.executable, "-m", "reinhardt", "classify", "bundled:model5", "--no-stehle"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["case_label"] == "T1Model5"
