import json

import numpy as np
import pytest

from qcausal import theory as th
from qcausal.errors import ModelSyntaxError, NonCausalBox, UnknownSystem
from qcausal.formats import (
    dump_channel,
    dump_model,
    dump_table,
    dumps,
    load_shipped,
    parse_channel,
    parse_model,
    parse_plan,
    parse_table,
    shipped_names,
)
from qcausal.identify import ground_truth_channel
from qcausal.instruments import MeasurementPlan, observe
from qcausal.models import random_front_door_model, random_single_intervention_model
from qcausal.theory import Theory

C, Q = Theory.CLASSICAL, Theory.QUANTUM


@pytest.mark.parametrize("name", shipped_names())
def test_shipped_models_round_trip(name):
    m = load_shipped(name)
    again = parse_model(dump_model(m))
    assert list(again.loci) == list(m.loci)
    for box, f in m.interpretation.items():
        assert th.max_abs_diff(again.interpretation[box], f) < 1e-14


def test_classical_model_round_trip_is_exact():
    m = random_single_intervention_model(C, 3)
    again = parse_model(dump_model(m))
    for box, f in m.interpretation.items():
        assert np.array_equal(again.interpretation[box].data, f.data)


def test_table_round_trip_is_bit_exact():
    t = observe(random_front_door_model(Q, 1))
    text = dump_table(t)
    again = parse_table(text)
    assert again.plan == t.plan
    assert again.entries == t.entries
    assert dump_table(again) == text


def test_channel_round_trip_is_bit_exact():
    ch = ground_truth_channel(random_front_door_model(Q, 2), "X", "Y")
    again = parse_channel(dump_channel(ch))
    assert np.array_equal(again.comb.data, ch.comb.data)
    assert (again.source, again.target) == ("X", "Y")
    assert again.metadata == ch.metadata


def test_floats_use_17_digits():
    assert dumps([0.1]) == "[0.10000000000000001]\n"
    assert json.loads(dumps({"a": [1 / 3]}))["a"][0] == 1 / 3


def test_superop_kind():
    obj = json.loads(dump_model(load_shipped("counterexample_quantum")))
    f = load_shipped("counterexample_quantum").interpretation["y"]
    obj["boxes"]["y"]["kind"] = "superop"
    obj["boxes"]["y"]["data"] = [[[z.real, z.imag] for z in row] for row in f.data]
    m = parse_model(json.dumps(obj))
    assert th.max_abs_diff(m.interpretation["y"], f) < 1e-15


def test_syntax_error_position():
    with pytest.raises(ModelSyntaxError) as info:
        parse_model('{\n  "theory": "quantum",\n  "systems": {"Q": 2,}\n}')
    assert (info.value.line, info.value.column) == (3, 22)
    assert info.value.category == "SyntaxError"


def test_missing_keys_and_bad_theory():
    with pytest.raises(ModelSyntaxError):
        parse_model('{"theory": "quantum"}')
    with pytest.raises(ModelSyntaxError):
        parse_model('{"theory": "fuzzy", "systems": {}, "boxes": {}, "loci": {}, "wires": []}')


def test_semantic_errors_carry_line():
    text = dump_model(load_shipped("front_door_classical"))
    obj = json.loads(text)
    obj["boxes"]["z"]["data"] = [[0.5, 0.5], [0.4, 0.5]]
    text = dumps(obj)
    with pytest.raises(NonCausalBox) as info:
        parse_model(text)
    assert "line" in str(info.value)
    obj["loci"]["Z"] = "W"
    with pytest.raises(UnknownSystem):
        parse_model(dumps(obj))


def test_plan_specifications():
    m = random_front_door_model(Q, 0)
    loci = m.loci
    assert parse_plan("auto", loci, Q) == MeasurementPlan.auto(loci, Q)
    plan = parse_plan('{"X": ["trivial", "family"], "Z": ["std", "x01"], "Y": "trivial"}', loci, Q)
    assert [c.name for c in plan.choices["Z"]] == ["std", "x01"]
    assert plan.choices["Y"] == [None]
    hadamard = [[[2**-0.5, 0], [2**-0.5, 0]], [[2**-0.5, 0], [-(2**-0.5), 0]]]
    listed = [{"locus": "X", "bases": [{"name": "h", "vectors": hadamard}]}]
    plan = parse_plan(json.dumps(listed), loci, Q)
    assert plan.choices["X"][0].name == "h"
    assert np.abs(plan.choices["X"][0].vectors - np.array([[1, 1], [1, -1]]) / np.sqrt(2)).max() < 1e-15
    # loci not mentioned get the default (trivial plus family)
    assert len(plan.choices["Z"]) == 4
    with pytest.raises(ModelSyntaxError):
        parse_plan('{"X": ["nope"]}', loci, Q)
    with pytest.raises(ModelSyntaxError):
        parse_plan('{"W": ["std"]}', loci, Q)
