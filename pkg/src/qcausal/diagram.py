"""Circuits with holes, their models, and evaluation by tensor contraction.

A :class:`Diagram` is a set of declared boxes, a list of *loci* (holes where a
local process ``X -> X`` can be plugged in) and wires joining producer ports
to consumer ports:

=============  =========================  ===========================
port kind      text form                  role
=============  =========================  ===========================
``box_out``    ``u.out[0]``               producer
``box_in``     ``y.in[1]``                consumer
``leave``      ``X.leave``                producer (wire leaving a locus)
``arrive``     ``X.arrive``               consumer (wire arriving at a locus)
``input``      ``in[0]``                  producer (open global input)
``output``     ``out[0]``                 consumer (open global output)
``discard``    ``discard``                consumer, may be used many times
=============  =========================  ===========================

Joining every locus's arrive port to its leave port must give an acyclic
graph.  A :class:`Model` adds a concrete process for every box.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from . import theory as th
from ._network import contract
from .errors import (
    CycleDetected,
    NonCausalBox,
    PortArityMismatch,
    ShapeMismatch,
    TheoryMismatch,
    TypeMismatch,
    UnknownLocus,
    UnknownSystem,
)
from .theory import ProcessValue, SystemType, Theory

PRODUCERS = ("box_out", "leave", "input")
CONSUMERS = ("box_in", "arrive", "output", "discard")

_PORT_RE = re.compile(
    r"^\s*(?:(?P<gside>in|out)\[(?P<gidx>\d+)\]"
    r"|(?P<discard>discard)"
    r"|(?P<node>[A-Za-z_][\w\-]*)\.(?:(?P<bside>in|out)\[(?P<bidx>\d+)\]|(?P<lside>leave|arrive)))\s*$"
)


@dataclass(frozen=True)
class Port:
    kind: str
    name: str = ""
    index: int = 0

    @classmethod
    def parse(cls, text: str) -> "Port":
        m = _PORT_RE.match(text)
        if not m:
            raise ValueError(f"bad port reference {text!r}")
        if m["gside"]:
            return cls("input" if m["gside"] == "in" else "output", "", int(m["gidx"]))
        if m["discard"]:
            return cls("discard")
        if m["bside"]:
            return cls("box_in" if m["bside"] == "in" else "box_out", m["node"], int(m["bidx"]))
        return cls(m["lside"], m["node"])

    def __str__(self):
        if self.kind == "discard":
            return "discard"
        if self.kind in ("input", "output"):
            return f"{'in' if self.kind == 'input' else 'out'}[{self.index}]"
        if self.kind in ("leave", "arrive"):
            return f"{self.name}.{self.kind}"
        return f"{self.name}.{'in' if self.kind == 'box_in' else 'out'}[{self.index}]"

    @property
    def is_producer(self) -> bool:
        return self.kind in PRODUCERS


@dataclass(frozen=True)
class Wire:
    src: Port
    dst: Port


@dataclass(frozen=True)
class BoxDecl:
    inputs: tuple[SystemType, ...]
    outputs: tuple[SystemType, ...]


@dataclass(frozen=True)
class Signature:
    systems: Mapping[str, SystemType]
    box_decls: Mapping[str, BoxDecl]

    def __post_init__(self):
        known = set(self.systems.values())
        for name, decl in self.box_decls.items():
            for t in decl.inputs + decl.outputs:
                if t not in known:
                    raise UnknownSystem(f"box {name!r} uses undeclared system {t!r}")


class Diagram:
    """A validated circuit with holes.  Immutable once constructed."""

    def __init__(
        self,
        signature: Signature,
        loci: Mapping[str, SystemType],
        wires: Sequence[Wire],
        inputs: Sequence[SystemType] = (),
        outputs: Sequence[SystemType] = (),
    ):
        self.signature = signature
        self.loci = dict(loci)
        self.wires = tuple(wires)
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        for name, t in self.loci.items():
            if t not in signature.systems.values():
                raise UnknownSystem(f"locus {name!r} uses undeclared system {t!r}")
            if name in signature.box_decls:
                raise ValueError(f"{name!r} is both a box and a locus")
        self._check_ports()
        self._order = self._closure_order()

    @property
    def boxes(self) -> Mapping[str, BoxDecl]:
        return self.signature.box_decls

    @property
    def locus_names(self) -> list[str]:
        return list(self.loci)

    def port_type(self, port: Port) -> SystemType:
        kind, name, k = port.kind, port.name, port.index
        try:
            if kind in ("box_in", "box_out"):
                decl = self.boxes[name]
                return (decl.inputs if kind == "box_in" else decl.outputs)[k]
            if kind in ("leave", "arrive"):
                return self.loci[name]
            if kind == "input":
                return self.inputs[k]
            if kind == "output":
                return self.outputs[k]
        except KeyError:
            raise UnknownLocus(f"unknown box or locus in port {port}") from None
        except IndexError:
            raise PortArityMismatch(f"port {port} is out of range") from None
        raise ValueError("discard ports have no fixed type")

    def all_ports(self) -> list[Port]:
        ports = []
        for name, decl in self.boxes.items():
            ports += [Port("box_out", name, k) for k in range(len(decl.outputs))]
            ports += [Port("box_in", name, k) for k in range(len(decl.inputs))]
        for name in self.loci:
            ports += [Port("leave", name), Port("arrive", name)]
        ports += [Port("input", "", k) for k in range(len(self.inputs))]
        ports += [Port("output", "", k) for k in range(len(self.outputs))]
        return ports

    def _check_ports(self):
        self.wire_at: dict[Port, int] = {}
        for i, w in enumerate(self.wires):
            if not w.src.is_producer:
                raise PortArityMismatch(f"wire {i}: {w.src} cannot be the source of a wire")
            if w.dst.is_producer:
                raise PortArityMismatch(f"wire {i}: {w.dst} cannot be the target of a wire")
            src_t = self.port_type(w.src)
            if w.dst.kind != "discard":
                if self.port_type(w.dst) != src_t:
                    raise TypeMismatch(
                        f"wire {w.src} -> {w.dst} joins {src_t!r} to {self.port_type(w.dst)!r}"
                    )
            for p in (w.src, w.dst):
                if p.kind == "discard":
                    continue
                if p in self.wire_at:
                    raise PortArityMismatch(f"port {p} is connected more than once")
                self.wire_at[p] = i
        for p in self.all_ports():
            if p not in self.wire_at:
                raise PortArityMismatch(f"port {p} is not connected")

    # graph structure

    @staticmethod
    def _node(port: Port, wire_index: int):
        if port.kind in ("box_in", "box_out"):
            return ("box", port.name)
        if port.kind in ("leave", "arrive"):
            return ("locus", port.name)
        if port.kind == "discard":
            return ("discard", wire_index)
        return (port.kind, port.index)

    def closure_graph(self) -> nx.DiGraph:
        """Boxes and loci as nodes, with every locus closed by an identity."""
        g = nx.DiGraph()
        g.add_nodes_from(self._node_rank())
        for i, w in enumerate(self.wires):
            g.add_edge(self._node(w.src, i), self._node(w.dst, i), wire=i)
        return g

    def _node_rank(self) -> dict:
        nodes = [("input", k) for k in range(len(self.inputs))]
        nodes += [("box", b) for b in self.boxes] + [("locus", x) for x in self.loci]
        nodes += [("output", k) for k in range(len(self.outputs))]
        nodes += [("discard", i) for i, w in enumerate(self.wires) if w.dst.kind == "discard"]
        return {n: r for r, n in enumerate(nodes)}

    def _closure_order(self) -> list:
        g = self.closure_graph()
        if not nx.is_directed_acyclic_graph(g):
            cycle = nx.find_cycle(g)
            names = " -> ".join(f"{a[0]} {a[1]}" for a, _ in cycle)
            raise CycleDetected(f"closing the loci creates a directed cycle: {names}")
        rank = self._node_rank()
        return list(nx.lexicographical_topological_sort(g, key=rank.__getitem__))

    def topological_order(self) -> list:
        return list(self._order)

    def _split_graph(self, joined: Sequence[str]) -> nx.DiGraph:
        g = nx.DiGraph()
        for i, w in enumerate(self.wires):
            a, b = self._split_node(w.src, i), self._split_node(w.dst, i)
            g.add_edge(a, b)
        for x in joined:
            g.add_edge(("arrive", x), ("leave", x))
        return g

    def _split_node(self, port: Port, wire_index: int):
        if port.kind in ("leave", "arrive"):
            return (port.kind, port.name)
        return self._node(port, wire_index)

    def _check_locus(self, *names: str):
        for x in names:
            if x not in self.loci:
                raise UnknownLocus(f"no locus named {x!r}")

    def is_descendant(self, xi: str, xj: str) -> bool:
        """True iff ``xj`` is a descendant of ``xi``.

        All loci other than ``xi`` and ``xj`` are closed with identity wires and
        we look for a directed path from the wire leaving ``xi`` to the wire
        arriving at ``xj``.
        """
        self._check_locus(xi, xj)
        if xi == xj:
            raise ValueError("descendance is only defined between distinct loci")
        others = [x for x in self.loci if x not in (xi, xj)]
        g = self._split_graph(others)
        return nx.has_path(g, ("leave", xi), ("arrive", xj))

    def descendants(self, xi: str) -> list[str]:
        return [x for x in self.loci if x != xi and self.is_descendant(xi, x)]


def is_descendant(d: Diagram, xi: str, xj: str) -> bool:
    return d.is_descendant(xi, xj)


class Model:
    """A diagram with a causal process assigned to every box."""

    def __init__(self, diagram: Diagram, theory: Theory, interpretation: Mapping[str, ProcessValue], tol: float = th.ATOL):
        self.diagram = diagram
        self.theory = theory
        self.interpretation = dict(interpretation)
        missing = set(diagram.boxes) - set(self.interpretation)
        if missing:
            raise PortArityMismatch(f"boxes without an interpretation: {sorted(missing)}")
        extra = set(self.interpretation) - set(diagram.boxes)
        if extra:
            raise PortArityMismatch(f"interpretations for undeclared boxes: {sorted(extra)}")
        for name, decl in diagram.boxes.items():
            f = self.interpretation[name]
            if f.theory is not theory:
                raise TheoryMismatch(f"box {name!r} is {f.theory.value}, model is {theory.value}")
            if [t.dim for t in f.inputs] != [t.dim for t in decl.inputs] or [t.dim for t in f.outputs] != [
                t.dim for t in decl.outputs
            ]:
                raise TypeMismatch(f"box {name!r}: process {f!r} does not match its declaration")
            if f.inputs != decl.inputs or f.outputs != decl.outputs:
                f = ProcessValue(theory, decl.inputs, decl.outputs, f.data)
                self.interpretation[name] = f
            if theory is Theory.QUANTUM and not th.is_cp(f, tol):
                raise NonCausalBox(f"box {name!r} is not completely positive")
            if not th.is_causal(f, tol):
                raise NonCausalBox(f"box {name!r} is not causal (probability/trace is not preserved)")

    @property
    def loci(self) -> dict[str, SystemType]:
        return self.diagram.loci

    def __repr__(self):
        return f"Model({self.theory.value}, boxes={list(self.diagram.boxes)}, loci={list(self.loci)})"


# contraction


@dataclass
class _Net:
    tensors: list = field(default_factory=list)
    out_labels: list = field(default_factory=list)
    in_labels: list = field(default_factory=list)
    in_types: list = field(default_factory=list)
    out_types: list = field(default_factory=list)
    extras: list = field(default_factory=list)


def _fill_tensor(f, locus: str, t: SystemType, theory: Theory):
    if isinstance(f, ProcessValue):
        if f.theory is not theory:
            raise TheoryMismatch(f"filling at {locus!r} is {f.theory.value}, model is {theory.value}")
        if [x.dim for x in f.inputs] != [t.dim] or [x.dim for x in f.outputs] != [t.dim]:
            raise TypeMismatch(f"filling at {locus!r} must be a process {t!r} -> {t!r}, got {f!r}")
        return f.tensor(), []
    # raw (tensor, extra labels) pairs are used internally for stacked instruments
    tensor, extra = f
    return tensor, list(extra)


def build_network(
    model: Model,
    fill: Mapping[str, object] | None = None,
    keep: Sequence[str] = (),
    boundary: Mapping[str, ProcessValue] | None = None,
    schedule: Sequence | None = None,
) -> _Net:
    """Assemble the tensors for ``model``; used by evaluate/as_comb/observe.

    ``fill`` maps loci to ProcessValues (or to ``(tensor, extra_labels)`` pairs
    whose extra axes stay open).  Loci in ``keep`` stay open; the rest default
    to the identity.  ``boundary`` maps ``"in[k]"``/``"out[k]"`` to states/effects.
    """
    d = model.diagram
    theory = model.theory
    fill = dict(fill or {})
    boundary = dict(boundary or {})
    d._check_locus(*fill, *keep)
    if set(fill) & set(keep):
        raise ValueError("a locus cannot be both filled and kept open")
    order = list(schedule) if schedule is not None else d.topological_order()
    if sorted(map(repr, order)) != sorted(map(repr, d.topological_order())):
        raise ValueError("schedule must list every node of the diagram exactly once")
    net = _Net()
    wire_at = d.wire_at
    extras: dict[str, list] = {}
    for node in order:
        kind, name = node
        if kind == "box":
            decl = d.boxes[name]
            labels = [wire_at[Port("box_out", name, k)] for k in range(len(decl.outputs))]
            labels += [wire_at[Port("box_in", name, k)] for k in range(len(decl.inputs))]
            net.tensors.append((model.interpretation[name].tensor(), labels))
        elif kind == "locus":
            if name in keep:
                continue
            t = d.loci[name]
            f = fill.get(name)
            if f is None:
                tensor, extra = np.eye(th.leg_dim(t, theory)), []
            else:
                tensor, extra = _fill_tensor(f, name, t, theory)
            net.tensors.append((tensor, [wire_at[Port("leave", name)], wire_at[Port("arrive", name)]] + extra))
            extras[name] = extra
        elif kind == "discard":
            w = d.wires[name]
            t = d.port_type(w.src)
            net.tensors.append((th.discard(t, theory).tensor(), [name]))
        elif kind in ("input", "output"):
            port = Port(kind, "", name)
            label = wire_at[port]
            t = d.port_type(port)
            given = boundary.get(str(port))
            if given is None:
                (net.in_labels if kind == "input" else net.out_labels).append(label)
                (net.in_types if kind == "input" else net.out_types).append(t)
                continue
            want_in, want_out = ((), (t,)) if kind == "input" else ((t,), ())
            if [x.dim for x in given.inputs] != [x.dim for x in want_in] or [x.dim for x in given.outputs] != [
                x.dim for x in want_out
            ]:
                raise TypeMismatch(f"boundary {port} needs a {'state' if kind == 'input' else 'effect'} on {t!r}")
            if given.theory is not theory:
                raise TheoryMismatch(f"boundary {port} is {given.theory.value}")
            net.tensors.append((given.tensor(), [label]))
    kept = [x for x in d.loci if x in keep]
    net.out_labels = [wire_at[Port("arrive", x)] for x in kept] + net.out_labels
    net.out_types = [d.loci[x] for x in kept] + net.out_types
    net.in_labels = net.in_labels + [wire_at[Port("leave", x)] for x in kept]
    net.in_types = net.in_types + [d.loci[x] for x in kept]
    # extra axes follow locus order, whatever the schedule
    net.extras = [e for x in d.loci for e in extras.get(x, [])]
    return net


def contract_network(net: _Net) -> np.ndarray:
    """Contract; result axes are extras, then outputs, then inputs."""
    labels = list(net.extras) + net.out_labels + net.in_labels
    return contract(net.tensors, labels)


def evaluate(
    model: Model,
    fill: Mapping[str, ProcessValue] | None = None,
    boundary: Mapping[str, ProcessValue] | None = None,
    schedule: Sequence | None = None,
) -> ProcessValue:
    """Evaluate the model with every locus filled (identity by default).

    Returns a process on the open global ports not covered by ``boundary``; a
    scalar when the diagram is closed.
    """
    net = build_network(model, fill, (), boundary, schedule)
    t = contract_network(net)
    return ProcessValue.from_tensor(model.theory, net.in_types, net.out_types, t)


def as_comb(
    model: Model,
    keep: Sequence[str],
    fill: Mapping[str, ProcessValue] | None = None,
    schedule: Sequence | None = None,
) -> ProcessValue:
    """First-order representation of the comb with holes at ``keep``.

    Port order: outputs are the arrive wires of the kept loci (in locus order)
    followed by open global outputs; inputs are open global inputs followed by
    the leave wires of the kept loci.  Loci outside ``keep`` are filled from
    ``fill`` or with identities.
    """
    model.diagram._check_locus(*keep)
    net = build_network(model, fill, keep, None, schedule)
    t = contract_network(net)
    return ProcessValue.from_tensor(model.theory, net.in_types, net.out_types, t)


def plug(comb: ProcessValue, fillings: Sequence[ProcessValue]) -> ProcessValue:
    """Plug processes into the holes of a comb laid out as :func:`as_comb` does.

    With ``k = len(fillings)``, hole ``h`` is output ``h`` (arrive) and input
    ``n_in - k + h`` (leave).  The result keeps the remaining ports.
    """
    k = len(fillings)
    n_out, n_in = len(comb.outputs), len(comb.inputs)
    if k > min(n_out, n_in):
        raise ShapeMismatch("more fillings than holes")
    tensors = [(comb.tensor(), [("o", i) for i in range(n_out)] + [("i", i) for i in range(n_in)])]
    for h, f in enumerate(fillings):
        if f.theory is not comb.theory:
            raise TheoryMismatch("filling and comb live in different theories")
        hole_t = comb.outputs[h]
        if [t.dim for t in f.inputs] != [hole_t.dim] or [t.dim for t in f.outputs] != [comb.inputs[n_in - k + h].dim]:
            raise TypeMismatch(f"filling {f!r} does not fit hole {h}")
        tensors.append((f.tensor(), [("i", n_in - k + h), ("o", h)]))
    open_labels = [("o", i) for i in range(k, n_out)] + [("i", i) for i in range(n_in - k)]
    t = contract(tensors, open_labels)
    return ProcessValue.from_tensor(comb.theory, comb.inputs[: n_in - k], comb.outputs[k:], t)


def locus_state(model: Model, target: str, fill: Mapping[str, ProcessValue] | None = None) -> ProcessValue:
    """State arriving at ``target`` with the other loci filled; global outputs discarded.

    The wire leaving ``target`` is fed the maximally mixed/uniform state.
    """
    comb = as_comb(model, [target], fill)
    d = model.diagram
    if d.inputs:
        raise ShapeMismatch("locus_state needs a diagram without open global inputs")
    t = d.loci[target]
    rest = comb.outputs[1:]
    if rest:
        comb = th.compose_seq(th.compose_par(th.identity(comb.outputs[:1], model.theory), th.discard(rest, model.theory)), comb)
    return th.compose_seq(comb, th.maximally_mixed(t, model.theory))


def build_diagram(
    systems: Mapping[str, int],
    boxes: Mapping[str, tuple[Sequence[str], Sequence[str]]],
    loci: Mapping[str, str],
    wires: Sequence[tuple[str, str]],
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
) -> Diagram:
    """Convenience constructor from plain names.

    ``boxes`` maps a box name to ``(input system names, output system names)``;
    ``wires`` is a list of ``(source, target)`` port references.
    """
    sys_types = {name: SystemType(name, int(dim)) for name, dim in systems.items()}

    def lookup(name):
        try:
            return sys_types[name]
        except KeyError:
            raise UnknownSystem(f"undeclared system {name!r}") from None

    decls = {
        b: BoxDecl(tuple(lookup(s) for s in ins), tuple(lookup(s) for s in outs)) for b, (ins, outs) in boxes.items()
    }
    sig = Signature(sys_types, decls)
    parsed = []
    for src, dst in wires:
        parsed.append(Wire(Port.parse(src), Port.parse(dst)))
    return Diagram(
        sig,
        {x: lookup(s) for x, s in loci.items()},
        parsed,
        [lookup(s) for s in inputs],
        [lookup(s) for s in outputs],
    )
