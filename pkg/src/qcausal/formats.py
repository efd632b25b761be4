"""JSON text formats for models, measurement plans, observation tables and channels.

All floats are written with 17 significant digits so that reading a file back
reproduces every number bit for bit.  Complex numbers are ``[re, im]`` pairs.

Model file::

    {
      "theory": "quantum",
      "systems": {"Q": 2},
      "boxes": {
        "u": {"inputs": [], "outputs": ["Q", "Q"], "kind": "kraus", "data": [...]},
        ...
      },
      "loci": {"X": "Q", "Z": "Q", "Y": "Q"},
      "wires": [{"from": "u.out[0]", "to": "y.in[0]"}, ...]
    }

``kind`` is ``matrix`` (classical, row-major ``outputs x inputs``), ``kraus``
(list of operators) or ``superop`` (column-stacking superoperator).  Optional
``inputs``/``outputs`` list open global ports, referenced as ``in[k]``/``out[k]``.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import theory as th
from .diagram import Model, build_diagram
from .errors import ModelSyntaxError, QCausalError, ShapeMismatch, UnknownSystem
from .identify import InterventionalChannel
from .instruments import TRIVIAL, Basis, MeasurementPlan, ObservationTable, basis_family, choice_name
from .theory import ProcessValue, SystemType, Theory

# writing


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    text = format(float(x), ".17g")
    # keep floats recognisable as floats so that -0.0 survives a round trip
    return text if any(c in text for c in ".en") else text + ".0"


def _depth(obj) -> int:
    if isinstance(obj, list):
        return 1 + max((_depth(o) for o in obj), default=0)
    if isinstance(obj, dict):
        return 99
    return 0


def _emit(obj, level: int = 0) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj.values()):
            return "{" + ", ".join(f"{json.dumps(str(k))}: {_emit(v)}" for k, v in obj.items()) + "}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        obj = list(obj)
        if _depth(obj) <= 3:
            return "[" + ", ".join(_emit(o, level + 1) for o in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(o, level + 1) for o in obj) + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    return _num(obj)


def dumps(obj) -> str:
    return _emit(obj) + "\n"


def _complex_list(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_complex_list(x) for x in a]


def _real_list(a: np.ndarray):
    return np.asarray(a, dtype=float).tolist()


# reading


def _load_json(text: str | bytes) -> Any:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(e.msg, e.lineno, e.colno) from None


def _locate(text: str, needle: str) -> tuple[int | None, int | None]:
    m = re.search(re.escape(json.dumps(needle)), text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def _with_location(err: QCausalError, text: str, needle: str) -> QCausalError:
    line, col = _locate(text, needle)
    if line is None:
        return err
    if isinstance(err, ModelSyntaxError):
        return err if err.line is not None else ModelSyntaxError(str(err), line, col)
    return type(err)(f"line {line}, column {col} ({needle}): {err}")


def _require(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise ModelSyntaxError(f"{where}: missing key {key!r}")
    return obj[key]


def _theory(value) -> Theory:
    try:
        return Theory(str(value).lower())
    except ValueError:
        raise ModelSyntaxError(f"unknown theory {value!r}; use 'classical' or 'quantum'") from None


def _to_complex(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.shape[-1:] != (2,):
        raise ModelSyntaxError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def _process_from_spec(spec: Mapping, ins, outs, theory: Theory, where: str) -> ProcessValue:
    kind = spec.get("kind", "matrix" if theory is Theory.CLASSICAL else "kraus")
    data = _require(spec, "data", where)
    try:
        if kind == "matrix":
            if theory is not Theory.CLASSICAL:
                raise ModelSyntaxError(f"{where}: kind 'matrix' is for classical models")
            arr = np.asarray(data, dtype=float)
            return ProcessValue(theory, ins, outs, arr.reshape(th.total_dim(outs), th.total_dim(ins)))
        if theory is not Theory.QUANTUM:
            raise ModelSyntaxError(f"{where}: kind {kind!r} is for quantum models")
        if kind == "kraus":
            ops = [_to_complex(k) for k in data]
            return th.from_kraus(ops, ins, outs)
        if kind == "superop":
            return ProcessValue(theory, ins, outs, _to_complex(data))
    except (ValueError, TypeError) as e:
        raise ShapeMismatch(f"{where}: {e}") from None
    raise ModelSyntaxError(f"{where}: unknown kind {kind!r}")


def model_from_obj(obj: Mapping, text: str = "") -> Model:
    theory = _theory(_require(obj, "theory", "model"))
    systems = _require(obj, "systems", "model")
    boxes = _require(obj, "boxes", "model")
    loci = _require(obj, "loci", "model")
    wires = _require(obj, "wires", "model")
    if not isinstance(systems, Mapping) or not isinstance(boxes, Mapping) or not isinstance(loci, Mapping):
        raise ModelSyntaxError("systems, boxes and loci must be JSON objects")
    box_ports = {}
    for name, spec in boxes.items():
        box_ports[name] = (list(spec.get("inputs", [])), list(spec.get("outputs", [])))
    wire_pairs = []
    for k, w in enumerate(wires):
        wire_pairs.append((_require(w, "from", f"wire {k}"), _require(w, "to", f"wire {k}")))
    try:
        diagram = build_diagram(
            systems, box_ports, loci, wire_pairs, obj.get("inputs", []), obj.get("outputs", [])
        )
    except ValueError as e:
        raise ModelSyntaxError(str(e)) from None
    except QCausalError as e:
        needle = _culprit(str(e), list(boxes) + list(loci) + [str(s) for s in systems])
        raise _with_location(e, text, needle) if needle else e
    interp = {}
    for name, spec in boxes.items():
        decl = diagram.boxes[name]
        try:
            interp[name] = _process_from_spec(spec, decl.inputs, decl.outputs, theory, f"box {name!r}")
        except QCausalError as e:
            raise _with_location(e, text, name)
        except ValueError as e:
            raise _with_location(ShapeMismatch(f"box {name!r}: {e}"), text, name)
    try:
        return Model(diagram, theory, interp)
    except QCausalError as e:
        needle = _culprit(str(e), list(boxes))
        raise _with_location(e, text, needle) if needle else e


def _culprit(message: str, names) -> str | None:
    for n in names:
        if f"'{n}'" in message or f"{n}." in message:
            return n
    return None


def parse_model(text: str | bytes) -> Model:
    """Parse and validate a model file (see module docstring for the schema)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return model_from_obj(_load_json(text), text)


def load_model(path) -> Model:
    return parse_model(Path(path).read_text())


def model_to_obj(model: Model) -> dict:
    d = model.diagram
    systems = {t.name: t.dim for t in d.signature.systems.values()}
    boxes = {}
    for name, decl in d.boxes.items():
        f = model.interpretation[name]
        spec = {"inputs": [t.name for t in decl.inputs], "outputs": [t.name for t in decl.outputs]}
        if model.theory is Theory.CLASSICAL:
            spec.update(kind="matrix", data=_real_list(f.data))
        else:
            spec.update(kind="kraus", data=[_complex_list(k) for k in th.superop_to_kraus(f)])
        boxes[name] = spec
    obj = {"theory": model.theory.value, "systems": systems}
    if d.inputs:
        obj["inputs"] = [t.name for t in d.inputs]
    if d.outputs:
        obj["outputs"] = [t.name for t in d.outputs]
    obj["boxes"] = boxes
    obj["loci"] = {x: t.name for x, t in d.loci.items()}
    obj["wires"] = [{"from": str(w.src), "to": str(w.dst)} for w in d.wires]
    return obj


def dump_model(model: Model) -> str:
    return dumps(model_to_obj(model))


# plans


def _basis_from_spec(spec, t: SystemType, theory: Theory) -> list[Basis | None]:
    family = basis_family(t.dim, theory)
    if isinstance(spec, str):
        if spec == TRIVIAL:
            return [None]
        if spec == "family":
            return family
        if spec == "standard":
            return [family[0]]
        for b in family:
            if b.name == spec:
                return [b]
        raise ModelSyntaxError(f"unknown basis name {spec!r} for a {t.dim}-dimensional locus")
    if isinstance(spec, Mapping):
        name = _require(spec, "name", "basis")
        if name == TRIVIAL:
            return [None]
        if "vectors" not in spec:
            return _basis_from_spec(name, t, theory)
        vectors = _to_complex(spec["vectors"])
        # file lists basis vectors one per row
        return [Basis(name, vectors.T)]
    raise ModelSyntaxError(f"bad basis specification {spec!r}")


def plan_from_obj(obj, loci: Mapping[str, SystemType], theory: Theory) -> MeasurementPlan:
    if obj == "auto" or obj is None:
        return MeasurementPlan.auto(loci, theory)
    if isinstance(obj, Mapping) and "plan" in obj:
        obj = obj["plan"]
    if obj == "auto":
        return MeasurementPlan.auto(loci, theory)
    if isinstance(obj, list):
        # list form: [{"locus": "X", "bases": [...]}, ...]
        try:
            obj = {_require(e, "locus", "plan entry"): _require(e, "bases", "plan entry") for e in obj}
        except TypeError:
            raise ModelSyntaxError("plan list entries must be objects with 'locus' and 'bases'") from None
    if not isinstance(obj, Mapping):
        raise ModelSyntaxError("a plan is 'auto' or an object mapping loci to basis lists")
    choices = {}
    for x, t in loci.items():
        specs = obj.get(x, [TRIVIAL, "family"])
        if isinstance(specs, (str, Mapping)):
            specs = [specs]
        cs = []
        for s in specs:
            for c in _basis_from_spec(s, t, theory):
                if choice_name(c) not in [choice_name(e) for e in cs]:
                    cs.append(c)
        choices[x] = cs
    unknown = set(obj) - set(loci)
    if unknown:
        raise ModelSyntaxError(f"plan mentions unknown loci {sorted(unknown)}")
    return MeasurementPlan(loci, choices, theory)


def parse_plan(text, loci, theory) -> MeasurementPlan:
    if isinstance(text, bytes):
        text = text.decode()
    if text.strip() == "auto":
        return MeasurementPlan.auto(loci, theory)
    return plan_from_obj(_load_json(text), loci, theory)


def _plan_to_obj(plan: MeasurementPlan) -> dict:
    out = {}
    for x, cs in plan.choices.items():
        items = []
        for c in cs:
            if c is None:
                items.append({"name": TRIVIAL})
            else:
                items.append({"name": c.name, "vectors": _complex_list(c.vectors.T)})
        out[x] = items
    return out


# tables


def table_to_obj(table: ObservationTable) -> dict:
    return {
        "format": "observation-table",
        "theory": table.theory.value,
        "loci": {x: {"system": t.name, "dim": t.dim} for x, t in table.loci.items()},
        "plan": _plan_to_obj(table.plan),
        "rows": [[list(names), list(outs), p] for names, outs, p in table.rows()],
    }


def dump_table(table: ObservationTable) -> str:
    return dumps(table_to_obj(table))


def table_from_obj(obj: Mapping) -> ObservationTable:
    if obj.get("format") != "observation-table":
        raise ModelSyntaxError("not an observation table (format != 'observation-table')")
    theory = _theory(_require(obj, "theory", "table"))
    loci = {x: SystemType(spec["system"], int(spec["dim"])) for x, spec in _require(obj, "loci", "table").items()}
    plan = plan_from_obj(_require(obj, "plan", "table"), loci, theory)
    entries = {}
    for row in _require(obj, "rows", "table"):
        names, outs, p = row
        entries[(tuple(names), tuple(int(o) for o in outs))] = float(p)
    return ObservationTable(plan, entries)


def parse_table(text) -> ObservationTable:
    return table_from_obj(_load_json(text))


def load_table(path) -> ObservationTable:
    return parse_table(Path(path).read_text())


# channels


def process_to_obj(f: ProcessValue) -> dict:
    systems = {}
    for t in f.inputs + f.outputs:
        if systems.setdefault(t.name, t.dim) != t.dim:
            raise UnknownSystem(f"system name {t.name!r} is used with two dimensions")
    obj = {
        "theory": f.theory.value,
        "systems": systems,
        "inputs": [t.name for t in f.inputs],
        "outputs": [t.name for t in f.outputs],
    }
    if f.theory is Theory.CLASSICAL:
        obj.update(kind="matrix", data=_real_list(f.data))
    else:
        obj.update(kind="superop", data=_complex_list(f.data))
    return obj


def process_from_obj(obj: Mapping) -> ProcessValue:
    theory = _theory(_require(obj, "theory", "process"))
    systems = {n: SystemType(n, int(d)) for n, d in _require(obj, "systems", "process").items()}
    try:
        ins = [systems[n] for n in obj.get("inputs", [])]
        outs = [systems[n] for n in obj.get("outputs", [])]
    except KeyError as e:
        raise UnknownSystem(f"undeclared system {e.args[0]!r}") from None
    return _process_from_spec(obj, ins, outs, theory, "process")


def channel_to_obj(ch: InterventionalChannel) -> dict:
    obj = {"format": "interventional-channel", "source": ch.source, "target": ch.target}
    obj.update(process_to_obj(ch.comb))
    obj["metadata"] = ch.metadata
    return obj


def dump_channel(ch: InterventionalChannel) -> str:
    return dumps(channel_to_obj(ch))


def channel_from_obj(obj: Mapping) -> InterventionalChannel:
    if obj.get("format") != "interventional-channel":
        raise ModelSyntaxError("not a channel file (format != 'interventional-channel')")
    comb = process_from_obj(obj)
    return InterventionalChannel(obj["source"], obj["target"], comb, dict(obj.get("metadata", {})))


def parse_channel(text) -> InterventionalChannel:
    return channel_from_obj(_load_json(text))


def load_channel(path) -> InterventionalChannel:
    return parse_channel(Path(path).read_text())


# example models shipped with the package


def shipped_names() -> list[str]:
    from importlib.resources import files

    return sorted(p.name[:-5] for p in files("qcausal").joinpath("data").iterdir() if p.name.endswith(".json"))


def shipped_path(name: str):
    from importlib.resources import files

    return files("qcausal").joinpath("data", f"{name}.json")


def load_shipped(name: str) -> Model:
    """Load one of the example models in ``qcausal/data`` (see :func:`shipped_names`)."""
    return parse_model(shipped_path(name).read_text())
