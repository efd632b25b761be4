"""Interventional channels and their identification from observations.

An interventional channel from locus ``X`` to locus ``Y`` is stored as a
first-order comb with input ``[X leave]`` and outputs ``[X arrive, Y arrive]``.
Plugging a process ``f : X -> X`` into the hole (the X arrive output feeds
``f``, whose output feeds the X leave input) leaves the state arriving at Y.

Identification (front-door and its single-intervention generalisation) only
reads an :class:`~qcausal.instruments.ObservationTable`:

1. tomograph the mediator from ``p(inputs, output) / p(inputs)``;
2. adjust for the mediator: divide the joint probabilities by the mediator's
   matrix elements to get those of the remaining outer comb, and reconstruct it;
3. compose the two at the mediator's loci.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import theory as th
from ._network import contract
from .diagram import Diagram, Model, Port, as_comb, plug
from .errors import (
    BadLambda,
    DescendancyViolation,
    MissingTable,
    RankDeficientFrame,
    ShapeMismatch,
    TypeMismatch,
    UnknownLocus,
    ZeroDivisor,
)
from .instruments import Frame, MeasurementPlan, ObservationTable, choice_name, reconstruct
from .models import counterexample_diagram
from .theory import ProcessValue, SystemType, Theory

DIVISOR_FLOOR = 1e-12


@dataclass
class InterventionalChannel:
    source: str
    target: str
    comb: ProcessValue
    metadata: dict = field(default_factory=dict)

    @property
    def theory(self) -> Theory:
        return self.comb.theory

    def apply(self, f: ProcessValue) -> ProcessValue:
        """State arriving at the target when ``f`` fills the source."""
        return plug(self.comb, [f])

    def do(self, state: ProcessValue) -> ProcessValue:
        """Surgical intervention: discard what arrives at the source, emit ``state``."""
        src_t = self.comb.outputs[0]
        f = th.compose_seq(state, th.discard(src_t, self.theory))
        return self.apply(f)


def ground_truth_channel(
    model: Model, src: str, tgt: str, leave_state: ProcessValue | None = None
) -> InterventionalChannel:
    """Channel from ``src`` to ``tgt`` by direct contraction of the model.

    Other loci get identities.  The wire leaving ``tgt`` is fed ``leave_state``
    (maximally mixed by default); this is harmless because ``src`` must not be
    a descendant of ``tgt``.
    """
    d = model.diagram
    d._check_locus(src, tgt)
    if src == tgt:
        raise ValueError("source and target must differ")
    if d.is_descendant(tgt, src):
        raise DescendancyViolation(f"{src!r} is a descendant of {tgt!r}; no interventional channel from {src!r}")
    if d.inputs or d.outputs:
        raise ShapeMismatch("ground truth needs every global port closed (fed or discarded)")
    keep = [x for x in d.loci if x in (src, tgt)]
    comb = as_comb(model, keep)
    # as_comb lays out outputs as kept arrives, inputs as kept leaves, both in locus order
    i_src, i_tgt = keep.index(src), keep.index(tgt)
    comb = th.permute_ports(comb, [i_src, i_tgt], [i_tgt, i_src])
    if leave_state is None:
        leave_state = th.maximally_mixed(d.loci[tgt], model.theory)
    comb = th.compose_seq(comb, th.compose_par(leave_state, th.identity(comb.inputs[1:], model.theory)))
    return InterventionalChannel(src, tgt, comb, {"method": "ground-truth"})


def channel_distance(a: InterventionalChannel, b: InterventionalChannel) -> float:
    """Largest entrywise difference between the two comb matrices (not a diamond norm)."""
    if a.theory is not b.theory:
        raise ShapeMismatch("channels live in different theories")
    if [t.dim for t in a.comb.inputs] != [t.dim for t in b.comb.inputs] or [t.dim for t in a.comb.outputs] != [
        t.dim for t in b.comb.outputs
    ]:
        raise ShapeMismatch("channels have different port dimensions")
    return float(np.max(np.abs(a.comb.data - b.comb.data)))


# shapes


@dataclass(frozen=True)
class FrontDoorShape:
    x: str = "X"
    z: str = "Z"
    y: str = "Y"
    mediator: str | None = None

    @property
    def roles(self) -> dict[str, str]:
        return {"X": self.x, "Z": self.z, "Y": self.y}


@dataclass(frozen=True)
class SingleInterventionShape:
    x: str = "X"
    a: str = "A"
    b: str = "B"
    c: str = "C"
    mediator: str | None = None

    @property
    def roles(self) -> dict[str, str]:
        return {"X": self.x, "A": self.a, "B": self.b, "C": self.c}


def _mediator(d: Diagram, inputs_from: Sequence[str], output_to: str) -> str:
    """Name of the box fed exactly by the wires leaving ``inputs_from`` and feeding only ``output_to``."""
    owners = {d.wires[d.wire_at[Port("leave", x)]].dst for x in inputs_from}
    boxes = {p.name for p in owners if p.kind == "box_in"}
    if len(boxes) != 1 or len(owners) != len(inputs_from):
        raise TypeMismatch(f"wires leaving {list(inputs_from)} do not all enter one mediator box")
    (m,) = boxes
    decl = d.boxes[m]
    if len(decl.inputs) != len(inputs_from):
        raise TypeMismatch(f"mediator {m!r} has inputs besides {list(inputs_from)}")
    if len(decl.outputs) != 1 or d.wires[d.wire_at[Port("box_out", m, 0)]].dst != Port("arrive", output_to):
        raise TypeMismatch(f"mediator {m!r} must feed exactly the wire arriving at {output_to!r}")
    return m


def _check_order(d: Diagram, source: str, mediator_inputs: Sequence[str], mediator_out: str, target: str):
    if d.inputs or d.outputs:
        raise TypeMismatch("identification shapes need closed diagrams")
    for x in mediator_inputs:
        if d.is_descendant(mediator_out, x):
            raise TypeMismatch(f"{x!r} must not be a descendant of {mediator_out!r}")
    if d.is_descendant(target, source):
        raise TypeMismatch(f"{source!r} must not be a descendant of {target!r}")


def match_front_door(d: Diagram, x: str = "X", z: str = "Z", y: str = "Y") -> FrontDoorShape:
    """Check that the wire leaving X feeds a box whose only output arrives at Z."""
    d._check_locus(x, z, y)
    m = _mediator(d, [x], z)
    _check_order(d, x, [x], z, y)
    return FrontDoorShape(x, z, y, m)


def match_single_intervention(d: Diagram, x: str = "X", a: str = "A", b: str = "B", c: str = "C") -> SingleInterventionShape:
    d._check_locus(x, a, b, c)
    m = _mediator(d, [x, a], b)
    _check_order(d, x, [x, a], b, c)
    return SingleInterventionShape(x, a, b, c, m)


# identification engine


def frames_from_table(table: ObservationTable) -> dict[str, Frame]:
    """One frame per locus made of the projectors of every non-trivial basis in the plan."""
    frames = {}
    for x, t in table.loci.items():
        bases = [c for c in table.plan.choices[x] if c is not None]
        frames[x] = Frame(t, table.theory, bases)
    return frames


def _grid(table: ObservationTable, frames: Mapping[str, Frame], axes: Sequence[str], fixed=None) -> np.ndarray:
    """Probabilities over frame elements at ``axes``; other loci trivial unless ``fixed``."""
    shape = [len(frames[x]) for x in axes]
    out = np.empty(shape)
    fixed = dict(fixed or {})
    for idx in np.ndindex(*shape):
        event = dict(fixed)
        for x, k in zip(axes, idx):
            event[x] = frames[x].labels[k]
        out[idx] = table.prob(event)
    return out


def _check_divisors(values: np.ndarray, what: str):
    low = float(values.min())
    if low <= DIVISOR_FLOOR:
        raise ZeroDivisor(f"{what} has a divisor {low:.3g} <= {DIVISOR_FLOOR:g}; the model is not positive")


def _identify(
    tables,
    source: str,
    med_in: Sequence[str],
    med_out: str,
    target: str,
    frames: Mapping[str, Frame] | None,
) -> InterventionalChannel:
    table = _merge(tables)
    loci = table.loci
    for x in (source, *med_in, med_out, target):
        if x not in loci:
            raise UnknownLocus(f"observation table has no locus {x!r}")
    frames = dict(frames or frames_from_table(table))
    for x in {source, *med_in, med_out, target}:
        if x not in frames:
            raise RankDeficientFrame(f"no frame for locus {x!r}")
        frames[x].require_complete()
        _check_frame_in_plan(table, x, frames[x])
    theory = table.theory
    med_in = list(med_in)
    if med_in[0] != source:
        raise ValueError("the source locus must be the first mediator input")
    # the source is always the first mediator input
    outer_out = [source] + [x for x in med_in if x != source] + [target]

    # step 1: mediator elements (state = outcome at its inputs, effect = outcome at its output)
    joint_in_out = _grid(table, frames, med_in + [med_out])
    marg_in = _grid(table, frames, med_in)
    _check_divisors(marg_in, "mediator tomography")
    med_grid = joint_in_out / marg_in[..., None]
    mediator = reconstruct(med_grid, [frames[x] for x in med_in], [frames[med_out]], theory)

    # step 2: adjust for the mediator to get the outer comb med_out -> outer_out
    joint = _grid(table, frames, outer_out[:-1] + [med_out, target])
    # joint axes: [source, other med inputs..., med_out, target]; the divisor shares
    # the first len(med_in) axes (same order as med_in) and med_out
    divisor = med_grid.reshape(med_grid.shape + (1,))
    _check_divisors(med_grid, "adjustment")
    outer_elems = joint / divisor
    # reorder to reconstruct's layout: [inputs (med_out)..., outputs (outer_out)...]
    n = len(med_in)
    outer_elems = np.moveaxis(outer_elems, n, 0)
    outer = reconstruct(outer_elems, [frames[med_out]], [frames[x] for x in outer_out], theory)

    # step 3: compose at the mediator loci with identity fillings; the source
    # arrive stays open and the source leave feeds the mediator
    w = outer.tensor()  # legs: source, other med inputs..., target, med_out
    g = mediator.tensor()  # legs: med_out, med inputs...
    n_other = n - 1
    w_labels = ["xa"] + [f"m{k}" for k in range(n_other)] + ["t", "b"]
    g_labels = ["b", "xl"] + [f"m{k}" for k in range(n_other)]
    ch = contract([(w, w_labels), (g, g_labels)], ["xa", "t", "xl"])
    src_t, tgt_t = loci[source], loci[target]
    comb = ProcessValue.from_tensor(theory, [src_t], [src_t, tgt_t], ch)
    meta = {
        "method": "observational identification",
        "mediator_loci": med_in + [med_out],
        "frames": {x: [f"{b}:{i}" for b, i in frames[x].labels] for x in sorted({source, *med_in, med_out, target})},
        "min_divisor": float(min(marg_in.min(), med_grid.min())),
    }
    return InterventionalChannel(source, target, comb, meta)


def _check_frame_in_plan(table: ObservationTable, x: str, frame: Frame):
    for name, _ in frame.labels:
        try:
            c = table.plan.choice(x, name)
        except KeyError:
            raise MissingTable(f"frame basis {name!r} at {x!r} was never measured") from None
        if c is None:
            raise MissingTable(f"frame element {name!r} at {x!r} is the trivial measurement")
    if None not in table.plan.choices[x]:
        raise MissingTable(f"locus {x!r} was never left unmeasured; the trivial measurement is required")


def _merge(tables) -> ObservationTable:
    """Union of several tables over the same loci (choices matched by name)."""
    if isinstance(tables, ObservationTable):
        return tables
    tables = list(tables)
    if not tables:
        raise MissingTable("no observation tables given")
    first = tables[0]
    choices = {x: {} for x in first.loci}
    entries = {}
    for t in tables:
        if t.loci != first.loci or t.theory is not first.theory:
            raise ShapeMismatch("observation tables describe different loci")
        for x in first.loci:
            for c in t.plan.choices[x]:
                choices[x].setdefault(choice_name(c), c)
        entries.update(t.entries)
    plan = MeasurementPlan(first.loci, {x: list(cs.values()) for x, cs in choices.items()}, first.theory)
    # the merged plan may list combinations nobody measured; lookups raise MissingTable
    return ObservationTable(plan, entries)


def identify_front_door(
    tables, shape: FrontDoorShape | None = None, frames: Mapping[str, Frame] | None = None
) -> InterventionalChannel:
    """Interventional channel X -> Y from observations of a front-door model.

    Needs the trivial and informationally complete measurements at X, Z and Y
    (other loci, if any, are read with the trivial measurement).
    """
    shape = shape or FrontDoorShape()
    return _identify(tables, shape.x, [shape.x], shape.z, shape.y, frames)


def identify_single_intervention(
    tables, shape: SingleInterventionShape | None = None, frames: Mapping[str, Frame] | None = None
) -> InterventionalChannel:
    """Interventional channel X -> C when a latent-free mediator maps X (x) A to B."""
    shape = shape or SingleInterventionShape()
    return _identify(tables, shape.x, [shape.x, shape.a], shape.b, shape.c, frames)


# non-identifiability witness


def dephasing(system: SystemType) -> ProcessValue:
    d = system.dim
    return th.from_kraus([np.diag(np.eye(d)[i]) for i in range(d)], system, system)


def depolarizing(system: SystemType, lam: float) -> ProcessValue:
    """``sigma -> (1 - lam) sigma + lam * tr(sigma) * 1/d``."""
    ident = th.identity(system, Theory.QUANTUM)
    noise = th.compose_seq(th.maximally_mixed(system, Theory.QUANTUM), th.discard(system, Theory.QUANTUM))
    return ProcessValue(Theory.QUANTUM, (system,), (system,), (1 - lam) * ident.data + lam * noise.data)


def bell_state(system: SystemType) -> ProcessValue:
    d = system.dim
    omega = np.eye(d).reshape(-1) / np.sqrt(d)
    return th.pure_state(omega, [system, system])


def build_counterexample_pair(lam: float = 0.5, z_state=None) -> tuple[Model, Model]:
    """Two positive quantum models with equal observations but different channels X -> Y.

    Shared: ``u`` is the two-qubit maximally entangled state, ``z`` a full-rank
    state, ``x`` discards its left input (from Z) and passes its right one (from
    ``u``).  ``y`` applies dephasing then depolarising with parameter ``lam`` to
    its left input (the ``u`` branch) in the first model and to its right input
    (from X) in the second, discarding the other input.
    """
    if not (0 < lam <= 1):
        raise BadLambda(f"lambda must lie in (0, 1], got {lam}")
    return _counterexample_models(lam, z_state)


def _counterexample_models(lam: float, z_state=None) -> tuple[Model, Model]:
    d = counterexample_diagram()
    q = d.signature.systems["Q"]
    qm = Theory.QUANTUM
    noisy = th.compose_seq(depolarizing(q, lam), dephasing(q))
    if z_state is None:
        z_state = np.diag([0.6, 0.4])
    shared = {
        "u": bell_state(q),
        "z": th.from_density(z_state, q),
        "x": th.compose_par(th.discard(q, qm), th.identity(q, qm)),
    }
    y1 = th.compose_par(noisy, th.discard(q, qm))
    y2 = th.compose_par(th.discard(q, qm), noisy)
    return Model(d, qm, {**shared, "y": y1}), Model(d, qm, {**shared, "y": y2})
