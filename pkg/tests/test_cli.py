import json

import pytest

from qcausal.cli import run
from qcausal.formats import shipped_path


def _shipped(name):
    return str(shipped_path(name))


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


def test_validate_shipped_model(capsys):
    assert run(["validate", _shipped("front_door_quantum")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["valid"] and report["positive"]
    assert list(report["loci"]) == ["X", "Z", "Y"]


def test_validate_cycle(tmp_path, capsys):
    model = {
        "theory": "classical",
        "systems": {"A": 2},
        "boxes": {"f": {"inputs": ["A"], "outputs": ["A"], "kind": "matrix", "data": [[1, 0], [0, 1]]}},
        "loci": {"X": "A"},
        "wires": [{"from": "f.out[0]", "to": "X.arrive"}, {"from": "X.leave", "to": "f.in[0]"}],
    }
    path = tmp_path / "cycle.json"
    path.write_text(json.dumps(model))
    assert run(["validate", str(path)]) != 0
    assert _error(capsys)["error"] == "CycleDetected"


def test_syntax_error_reports_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "theory": quantum\n}')
    assert run(["validate", str(path)]) != 0
    err = _error(capsys)
    assert err["error"] == "SyntaxError"
    assert "bad.json" in err["message"] and "line 2" in err["message"]


def test_missing_file(capsys):
    assert run(["validate", "/nonexistent/model.json"]) != 0
    assert _error(capsys)["error"] == "FileNotFound"


@pytest.mark.parametrize(
    "name, shape, src, tgt",
    [
        ("front_door_quantum", "front-door", "X", "Y"),
        ("front_door_classical", "front-door", "X", "Y"),
        ("single_intervention_quantum", "single-intervention", "X", "C"),
        ("single_intervention_classical", "single-intervention", "X", "C"),
    ],
)
def test_identify_matches_ground_truth(tmp_path, capsys, name, shape, src, tgt):
    ident, truth = tmp_path / "id.json", tmp_path / "gt.json"
    assert run(["identify", _shipped(name), "--shape", shape, "--out", str(ident)]) == 0
    assert run(["ground-truth", _shipped(name), "--src", src, "--tgt", tgt, "--out", str(truth)]) == 0
    capsys.readouterr()
    assert run(["compare", str(ident), str(truth)]) == 0
    assert float(capsys.readouterr().out) <= 1e-8


def test_identify_from_tables_only(tmp_path, capsys):
    table, ident, truth = tmp_path / "t.json", tmp_path / "id.json", tmp_path / "gt.json"
    model = _shipped("single_intervention_quantum")
    assert run(["observe", model, "--plan", "auto", "--out", str(table)]) == 0
    assert run(["identify", str(table), "--shape", "single-intervention", "--out", str(ident)]) == 0
    assert run(["ground-truth", model, "--src", "X", "--tgt", "C", "--out", str(truth)]) == 0
    capsys.readouterr()
    assert run(["compare", str(ident), str(truth)]) == 0
    assert float(capsys.readouterr().out) <= 1e-8


def test_identify_with_roles(tmp_path, capsys):
    table = tmp_path / "t.json"
    assert run(["observe", _shipped("front_door_classical"), "--out", str(table)]) == 0
    assert run(["identify", str(table), "--shape", "front-door", "--roles", "X=X,Z=Z,Y=Y"]) == 0
    assert json.loads(capsys.readouterr().out)["format"] == "interventional-channel"
    assert run(["identify", str(table), "--shape", "front-door", "--roles", "X=Q"]) != 0
    assert _error(capsys)["error"] == "UnknownLocus"


def test_identify_rejects_wrong_shape(capsys):
    assert run(["identify", _shipped("counterexample_quantum"), "--shape", "front-door"]) != 0
    assert _error(capsys)["error"] == "TypeMismatch"


def test_observe_with_plan_file(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"X": ["trivial", "std"], "Z": ["trivial"], "Y": ["std"]}))
    assert run(["observe", _shipped("front_door_quantum"), "--plan", str(plan)]) == 0
    table = json.loads(capsys.readouterr().out)
    assert len(table["rows"]) == 2 * 2 + 2


def test_demo_counterexample(capsys):
    assert run(["demo-counterexample", "--lambda", "0.5"]) == 0
    lines = dict(line.split(": ") for line in capsys.readouterr().out.strip().splitlines())
    assert float(lines["observational residual"]) <= 1e-12
    assert float(lines["interventional gap"]) >= 0.2
    assert run(["demo-counterexample", "--lambda", "0"]) != 0
    assert _error(capsys)["error"] == "BadLambda"


def test_outputs_are_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        model = tmp_path / f"m{k}.json"
        ident = tmp_path / f"id{k}.json"
        assert run(["gen-random-model", "--shape", "single-intervention", "--out", str(model)]) == 0
        assert run(["identify", str(model), "--shape", "single-intervention", "--out", str(ident)]) == 0
        outs.append((model.read_bytes(), ident.read_bytes()))
    assert outs[0] == outs[1]
    assert run(["gen-random-model", "--seed", "0", "--shape", "single-intervention"]) == 0
    assert capsys.readouterr().out.encode() == outs[0][0]
    assert run(["gen-random-model", "--seed", "1", "--shape", "single-intervention"]) == 0
    assert capsys.readouterr().out.encode() != outs[0][0]


def test_usage_error_exit_code():
    assert run(["identify"]) != 0
    assert run(["no-such-command"]) != 0
