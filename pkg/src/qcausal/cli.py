"""Command line front end.

Every subcommand exits with status 0 on success.  On failure a one-line JSON
object ``{"error": <category>, "message": ...}`` goes to stderr and the exit
status is 2 (1 for unexpected internal errors).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import formats
from .errors import ModelSyntaxError, QCausalError
from .identify import (
    FrontDoorShape,
    SingleInterventionShape,
    build_counterexample_pair,
    channel_distance,
    ground_truth_channel,
    identify_front_door,
    identify_single_intervention,
    match_front_door,
    match_single_intervention,
)
from .instruments import MeasurementPlan, is_positive_model, observe
from .models import random_front_door_model, random_single_intervention_model
from .theory import Theory

SHAPES = ("front-door", "single-intervention")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FileNotFoundError(f"{path}: {e.strerror}") from None


def _load_model(path: str):
    try:
        return formats.parse_model(_read(path))
    except QCausalError as e:
        raise type(e)(f"{path}: {e}") if not isinstance(e, ModelSyntaxError) else ModelSyntaxError(f"{path}: {e}")


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _parse_roles(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    roles = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise ModelSyntaxError(f"--roles expects ROLE=LOCUS pairs, got {item!r}")
        roles[key.strip().upper()] = value.strip()
    return roles


def _shape(kind: str, roles: dict[str, str], diagram=None):
    if kind == "front-door":
        x, z, y = roles.get("X", "X"), roles.get("Z", "Z"), roles.get("Y", "Y")
        return match_front_door(diagram, x, z, y) if diagram is not None else FrontDoorShape(x, z, y)
    x, a, b, c = (roles.get(r, r) for r in "XABC")
    if diagram is not None:
        return match_single_intervention(diagram, x, a, b, c)
    return SingleInterventionShape(x, a, b, c)


# subcommands


def cmd_validate(args) -> int:
    model = _load_model(args.model)
    report = is_positive_model(model)
    d = model.diagram
    result = {
        "valid": True,
        "theory": model.theory.value,
        "boxes": list(d.boxes),
        "loci": {x: repr(t) for x, t in d.loci.items()},
        "positive": report.positive,
        "min_pairing": report.min_value,
    }
    print(formats.dumps(result), end="")
    return 0


def cmd_observe(args) -> int:
    model = _load_model(args.model)
    if args.plan == "auto":
        plan = MeasurementPlan.auto(model.loci, model.theory)
    else:
        plan = formats.parse_plan(_read(args.plan), model.loci, model.theory)
    _write(formats.dump_table(observe(model, plan)), args.out)
    return 0


def cmd_identify(args) -> int:
    roles = _parse_roles(args.roles)
    tables, model = [], None
    for path in args.inputs:
        obj = formats._load_json(_read(path))
        if isinstance(obj, dict) and obj.get("format") == "observation-table":
            tables.append(formats.table_from_obj(obj))
        elif model is None and not tables:
            model = formats.model_from_obj(obj, _read(path))
        else:
            raise ModelSyntaxError(f"{path}: give either one model file or observation tables only")
    if model is not None:
        if len(args.inputs) != 1:
            raise ModelSyntaxError("give either one model file or observation tables only")
        shape = _shape(args.shape, roles, model.diagram)
        # the identification below only sees the serialized table
        tables = [formats.parse_table(formats.dump_table(observe(model)))]
    else:
        shape = _shape(args.shape, roles)
    if args.shape == "front-door":
        ch = identify_front_door(tables, shape)
    else:
        ch = identify_single_intervention(tables, shape)
    _write(formats.dump_channel(ch), args.out)
    return 0


def cmd_ground_truth(args) -> int:
    model = _load_model(args.model)
    ch = ground_truth_channel(model, args.src, args.tgt)
    _write(formats.dump_channel(ch), args.out)
    return 0


def cmd_compare(args) -> int:
    a = formats.parse_channel(_read(args.a))
    b = formats.parse_channel(_read(args.b))
    print(format(channel_distance(a, b), ".17g"))
    return 0


def cmd_demo(args) -> int:
    m1, m2 = build_counterexample_pair(args.lam)
    t1, t2 = observe(m1), observe(m2)
    residual = max(abs(p - t2.entries[k]) for k, p in t1.entries.items())
    gap = channel_distance(ground_truth_channel(m1, "X", "Y"), ground_truth_channel(m2, "X", "Y"))
    print(f"lambda: {args.lam:.17g}")
    print(f"observational residual: {residual:.17g}")
    print(f"interventional gap: {gap:.17g}")
    return 0


def cmd_gen_random(args) -> int:
    theory = Theory(args.theory)
    make = random_front_door_model if args.shape == "front-door" else random_single_intervention_model
    _write(formats.dump_model(make(theory, np.random.default_rng(args.seed))), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcausal", description="Causal identification with circuits with holes.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("validate", help="parse a model, check it and report positivity")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("observe", help="write the observation table of a model")
    s.add_argument("model")
    s.add_argument("--plan", default="auto", help="plan file or 'auto' (default)")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_observe)

    s = sub.add_parser("identify", help="identify an interventional channel from observations")
    s.add_argument("inputs", nargs="+", help="one model file, or one or more table files")
    s.add_argument("--shape", choices=SHAPES, required=True)
    s.add_argument("--roles", default=None, help="locus names, e.g. X=X,Z=Z,Y=Y")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("ground-truth", help="interventional channel by direct contraction")
    s.add_argument("model")
    s.add_argument("--src", required=True)
    s.add_argument("--tgt", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_ground_truth)

    s = sub.add_parser("compare", help="max entry distance between two channel files")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("demo-counterexample", help="two models with equal observations but different channels")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.set_defaults(func=cmd_demo)

    s = sub.add_parser("gen-random-model", help=argparse.SUPPRESS)
    s.add_argument("--shape", choices=SHAPES, default="front-door")
    s.add_argument("--theory", choices=[t.value for t in Theory], default="quantum")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_gen_random)
    return p


def _fail(category: str, message: str, code: int) -> int:
    sys.stdout.flush()
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except QCausalError as e:
        return _fail(e.category, str(e), 2)
    except FileNotFoundError as e:
        return _fail("FileNotFound", str(e), 2)
    except (ValueError, KeyError) as e:
        return _fail("InvalidInput", str(e), 2)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
