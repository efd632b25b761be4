"""Observations, informationally complete frames and local process tomography.

Observations at a locus are projective measurements: for a basis ``{b_i}``
outcome ``i`` is the map "test for ``b_i``, then prepare ``b_i``".  Together with
the trivial (identity) measurement these are the only instruments used to
produce an :class:`ObservationTable`.

A :class:`Frame` is an informationally complete family of states and effects
on one system.  Generalised matrix elements of a process against frames fix the
process, and :func:`reconstruct` inverts :func:`matrix_elements` using the
Moore-Penrose pseudo-inverses of the stacked frame matrices.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import theory as th
from .diagram import Model, build_network, contract_network
from .errors import RankDeficientFrame, ShapeMismatch, TypeMismatch
from .theory import ProcessValue, SystemType, Theory

TRIVIAL = "trivial"
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Basis:
    """A named orthonormal basis; ``vectors[:, i]`` is the ``i``-th basis vector."""

    name: str
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeMismatch(f"basis {self.name!r} must be a square matrix of column vectors")
        if np.abs(v.conj().T @ v - np.eye(v.shape[0])).max() > 1e-9:
            raise ValueError(f"basis {self.name!r} is not orthonormal")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def projector(self, i: int) -> np.ndarray:
        b = self.vectors[:, i]
        return np.outer(b, b.conj())

    def __eq__(self, other):
        return isinstance(other, Basis) and self.name == other.name and np.array_equal(self.vectors, other.vectors)

    def __hash__(self):
        return hash((self.name, self.vectors.shape))


def standard_basis(d: int) -> Basis:
    return Basis("std", np.eye(d))


def basis_family(d: int, theory: Theory = Theory.QUANTUM) -> list[Basis]:
    """Standard basis plus, for each ``i < j`` and phase 0 or pi/2, the basis with
    ``(|i> +- e^{i phi}|j>)/sqrt 2`` in slots ``i, j`` and standard vectors elsewhere.

    Classical systems only get the standard basis.  Names are ``std``, ``x{i}{j}``
    and ``y{i}{j}``.
    """
    family = [standard_basis(d)]
    if theory is Theory.CLASSICAL:
        return family
    for i, j in itertools.combinations(range(d), 2):
        for tag, phase in (("x", 1.0), ("y", 1j)):
            v = np.eye(d, dtype=complex)
            v[:, i] = 0
            v[:, j] = 0
            v[i, i] = v[i, j] = 1 / np.sqrt(2)
            v[j, i] = phase / np.sqrt(2)
            v[j, j] = -phase / np.sqrt(2)
            family.append(Basis(f"{tag}{i}{j}", v))
    return family


def _state_leg(basis: Basis, i: int, theory: Theory) -> np.ndarray:
    if theory is Theory.CLASSICAL:
        return np.abs(basis.vectors[:, i]) ** 2
    # leg index c * d + r holds rho[r, c]
    return basis.projector(i).T.reshape(-1)


def _effect_leg(basis: Basis, i: int, theory: Theory) -> np.ndarray:
    if theory is Theory.CLASSICAL:
        return np.abs(basis.vectors[:, i]) ** 2
    # tr(P rho) = sum_{r,c} P[c, r] rho[r, c]
    return basis.projector(i).reshape(-1)


class Frame:
    """States and effects on one system, each labelled ``(basis name, outcome)``.

    ``state_matrix`` has one column per state (leg vector), ``effect_matrix`` one
    row per effect.  The duals are pseudo-inverses: ``effect_dual @ effect_matrix``
    and ``state_matrix @ state_dual`` are identities when the frame is
    informationally complete.
    """

    def __init__(self, system: SystemType, theory: Theory, bases: Sequence[Basis]):
        self.system = system
        self.theory = theory
        self.bases = list(bases)
        for b in self.bases:
            if b.dim != system.dim:
                raise TypeMismatch(f"basis {b.name!r} has dimension {b.dim}, system {system!r} needs {system.dim}")
            if theory is Theory.CLASSICAL and not np.allclose(np.abs(b.vectors), np.eye(b.dim)):
                raise ValueError("classical observations use the standard basis only")
        self.labels = [(b.name, i) for b in self.bases for i in range(b.dim)]
        self.state_matrix = np.stack([_state_leg(b, i, theory) for b in self.bases for i in range(b.dim)], axis=1)
        self.effect_matrix = np.stack([_effect_leg(b, i, theory) for b in self.bases for i in range(b.dim)], axis=0)
        if theory is Theory.CLASSICAL:
            self.state_matrix = self.state_matrix.real
            self.effect_matrix = self.effect_matrix.real
        self.state_dual = np.linalg.pinv(self.state_matrix, rcond=RANK_RTOL)
        self.effect_dual = np.linalg.pinv(self.effect_matrix, rcond=RANK_RTOL)

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"Frame({self.system!r}, {self.theory.value}, {len(self)} elements, rank {self.gram_rank()})"

    @property
    def leg_dim(self) -> int:
        return th.leg_dim(self.system, self.theory)

    def gram_rank(self) -> int:
        gram = self.effect_matrix.conj() @ self.effect_matrix.T
        s = np.linalg.svd(gram, compute_uv=False)
        return int((s > RANK_RTOL * s.max()).sum())

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.effect_matrix, compute_uv=False)

    def condition_number(self) -> float:
        s = self.singular_values()[: self.leg_dim]
        return float(s.max() / s.min()) if s.min() > 0 else float("inf")

    def is_complete(self) -> bool:
        return self.gram_rank() == self.leg_dim

    def require_complete(self):
        if not self.is_complete():
            raise RankDeficientFrame(
                f"frame on {self.system!r} has rank {self.gram_rank()}, needs {self.leg_dim}"
            )

    def state(self, k: int) -> ProcessValue:
        return ProcessValue.from_tensor(self.theory, (), (self.system,), self.state_matrix[:, k])

    def effect(self, k: int) -> ProcessValue:
        return ProcessValue.from_tensor(self.theory, (self.system,), (), self.effect_matrix[k])

    @property
    def states(self) -> list[ProcessValue]:
        return [self.state(k) for k in range(len(self))]

    @property
    def effects(self) -> list[ProcessValue]:
        return [self.effect(k) for k in range(len(self))]


def standard_frame(system: SystemType, theory: Theory) -> Frame:
    """Point states/indicator effects (classical) or the projectors of :func:`basis_family`.

    Repeated standard vectors inside the non-standard bases are not duplicated.
    """
    bases = basis_family(system.dim, theory)
    frame = Frame(system, theory, bases)
    seen, keep = [], []
    for k in range(len(frame)):
        v = frame.state_matrix[:, k]
        if any(np.allclose(v, w) for w in seen):
            continue
        seen.append(v)
        keep.append(k)
    frame.labels = [frame.labels[k] for k in keep]
    frame.state_matrix = frame.state_matrix[:, keep]
    frame.effect_matrix = frame.effect_matrix[keep]
    frame.state_dual = np.linalg.pinv(frame.state_matrix, rcond=RANK_RTOL)
    frame.effect_dual = np.linalg.pinv(frame.effect_matrix, rcond=RANK_RTOL)
    return frame


# projective instruments


class ProjectiveInstrument:
    """Non-degenerate projective measurement; outcome ``i`` tests then re-prepares ``b_i``."""

    def __init__(self, system: SystemType, theory: Theory, basis: Basis):
        if basis.dim != system.dim:
            raise TypeMismatch(f"basis dimension {basis.dim} does not match {system!r}")
        if theory is Theory.CLASSICAL and basis.name != "std":
            raise ValueError("classical observations use the standard basis only")
        self.system = system
        self.theory = theory
        self.basis = basis

    def outcome_tensor(self, i: int) -> np.ndarray:
        return np.outer(_state_leg(self.basis, i, self.theory), _effect_leg(self.basis, i, self.theory))

    def outcome(self, i: int) -> ProcessValue:
        return ProcessValue.from_tensor(self.theory, (self.system,), (self.system,), self.outcome_tensor(i))

    @property
    def outcomes(self) -> list[ProcessValue]:
        return [self.outcome(i) for i in range(self.system.dim)]

    def channel(self) -> ProcessValue:
        """The measure-and-forget channel, i.e. the sum of all outcome maps."""
        return ProcessValue.from_tensor(
            self.theory, (self.system,), (self.system,), sum(self.outcome_tensor(i) for i in range(self.system.dim))
        )


# plans and tables


class MeasurementPlan:
    """Per-locus list of choices; a choice is a :class:`Basis` or ``None`` (trivial)."""

    def __init__(self, loci: Mapping[str, SystemType], choices: Mapping[str, Sequence[Basis | None]], theory: Theory):
        self.loci = dict(loci)
        self.theory = theory
        if set(choices) != set(self.loci):
            raise ValueError(f"plan covers {sorted(choices)}, model has loci {sorted(self.loci)}")
        self.choices: dict[str, list[Basis | None]] = {}
        for x, t in self.loci.items():
            cs = list(choices[x])
            if not cs:
                raise ValueError(f"locus {x!r} has no measurement choice")
            for c in cs:
                if c is not None and c.dim != t.dim:
                    raise TypeMismatch(f"basis {c.name!r} at {x!r} has dimension {c.dim}, locus needs {t.dim}")
                if c is not None and theory is Theory.CLASSICAL and c.name != "std":
                    raise ValueError("classical observations use the standard basis only")
            names = [choice_name(c) for c in cs]
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate choice names at locus {x!r}")
            self.choices[x] = cs

    @classmethod
    def auto(cls, loci: Mapping[str, SystemType], theory: Theory) -> "MeasurementPlan":
        """Trivial measurement plus the full basis family at every locus."""
        return cls(loci, {x: [None] + basis_family(t.dim, theory) for x, t in loci.items()}, theory)

    def combos(self):
        return itertools.product(*(self.choices[x] for x in self.loci))

    def choice(self, locus: str, name: str) -> Basis | None:
        for c in self.choices[locus]:
            if choice_name(c) == name:
                return c
        raise KeyError(f"locus {locus!r} has no choice {name!r}")

    def __eq__(self, other):
        return (
            isinstance(other, MeasurementPlan)
            and self.theory is other.theory
            and self.loci == other.loci
            and all(self.choices[x] == other.choices[x] for x in self.loci)
        )


def choice_name(c: Basis | None) -> str:
    return TRIVIAL if c is None else c.name


def _n_outcomes(c: Basis | None) -> int:
    return 1 if c is None else c.dim


class ObservationTable:
    """Joint outcome probabilities keyed by ``(choice names, outcomes)`` tuples in locus order."""

    def __init__(self, plan: MeasurementPlan, entries: Mapping[tuple, float]):
        self.plan = plan
        self.entries = dict(entries)

    @property
    def theory(self) -> Theory:
        return self.plan.theory

    @property
    def loci(self) -> dict[str, SystemType]:
        return self.plan.loci

    def prob(self, event: Mapping[str, tuple[str, int]]) -> float:
        """Probability of ``{locus: (choice name, outcome)}``; loci left out mean trivial."""
        names, outs = [], []
        for x in self.loci:
            name, out = event.get(x, (TRIVIAL, 0))
            names.append(name)
            outs.append(out)
        key = (tuple(names), tuple(outs))
        try:
            return self.entries[key]
        except KeyError:
            from .errors import MissingTable

            raise MissingTable(f"no observation recorded for {dict(zip(self.loci, zip(names, outs)))}") from None

    def rows(self):
        for combo in self.plan.combos():
            names = tuple(choice_name(c) for c in combo)
            for outs in itertools.product(*(range(_n_outcomes(c)) for c in combo)):
                yield names, outs, self.entries[(names, outs)]

    def normalization_error(self) -> float:
        totals: dict = {}
        for names, _, p in self.rows():
            totals[names] = totals.get(names, 0.0) + p
        return max(abs(v - 1.0) for v in totals.values())

    def min_probability(self) -> float:
        return min(self.entries.values())


def _stacked_instrument(choices: Sequence[Basis | None], t: SystemType, theory: Theory):
    """All (choice, outcome) maps at one locus stacked along a trailing axis."""
    mats, labels = [], []
    for c in choices:
        if c is None:
            mats.append(np.eye(th.leg_dim(t, theory)))
            labels.append((TRIVIAL, 0))
        else:
            inst = ProjectiveInstrument(t, theory, c)
            for i in range(c.dim):
                mats.append(inst.outcome_tensor(i))
                labels.append((c.name, i))
    return np.stack(mats, axis=-1), labels


def observe(model: Model, plan: MeasurementPlan | None = None, check_positive: bool = False) -> ObservationTable:
    """Exact joint outcome probabilities for every choice combination in ``plan``.

    Each locus is filled with all of its outcome maps at once (stacked on an
    extra open axis) so one contraction yields the whole table.
    """
    if plan is None:
        plan = MeasurementPlan.auto(model.loci, model.theory)
    if plan.theory is not model.theory:
        raise TypeMismatch("plan and model are in different theories")
    if plan.loci.keys() != model.loci.keys() or any(plan.loci[x].dim != t.dim for x, t in model.loci.items()):
        raise TypeMismatch("plan does not match the model's loci")
    if model.diagram.inputs:
        raise ShapeMismatch("observation needs a diagram without open global inputs")
    fill, labels = {}, {}
    for x, t in model.loci.items():
        tensor, labels[x] = _stacked_instrument(plan.choices[x], t, model.theory)
        fill[x] = (tensor, [("outcome", x)])
    boundary = {
        f"out[{k}]": th.discard(t, model.theory) for k, t in enumerate(model.diagram.outputs)
    }
    net = build_network(model, fill, (), boundary)
    probs = contract_network(net)
    if model.theory is Theory.QUANTUM:
        if probs.size and np.abs(probs.imag).max() > th.ATOL:
            raise ValueError("observation probabilities have non-negligible imaginary parts")
        probs = probs.real
    # rows of the stacked axes are (choice, outcome) pairs in plan order
    index = {x: {lab: k for k, lab in enumerate(labels[x])} for x in model.loci}
    entries = {}
    loci = list(model.loci)
    for combo in plan.combos():
        names = tuple(choice_name(c) for c in combo)
        for outs in itertools.product(*(range(_n_outcomes(c)) for c in combo)):
            pos = tuple(index[x][(n, o)] for x, n, o in zip(loci, names, outs))
            entries[(names, outs)] = float(probs[pos])
    table = ObservationTable(plan, entries)
    if check_positive and table.min_probability() <= 0:
        warnings.warn("model is not positive: some observation outcome has probability zero", stacklevel=2)
    return table


# tomography


def _frames_list(frames, n: int) -> list[Frame]:
    if isinstance(frames, Frame):
        frames = [frames]
    frames = list(frames)
    if len(frames) != n:
        raise ShapeMismatch(f"expected {n} frames, got {len(frames)}")
    return frames


def matrix_elements(f: ProcessValue, in_frames, out_frames) -> np.ndarray:
    """Grid ``[i_1, ..., i_m, j_1, ..., j_n] = (effects j) . f . (states i)``.

    Inputs take frame states, outputs take frame effects.  Values are real.
    """
    in_frames = _frames_list(in_frames, len(f.inputs))
    out_frames = _frames_list(out_frames, len(f.outputs))
    for fr, t in zip(in_frames + out_frames, f.inputs + f.outputs):
        if fr.system.dim != t.dim or fr.theory is not f.theory:
            raise TypeMismatch(f"frame {fr!r} does not fit port {t!r}")
    t = f.tensor()
    n = len(f.outputs)
    # contract outputs with effect rows, inputs with state columns
    for k, fr in enumerate(out_frames):
        t = np.moveaxis(np.tensordot(fr.effect_matrix, t, axes=([1], [k])), 0, k)
    for k, fr in enumerate(in_frames):
        t = np.moveaxis(np.tensordot(t, fr.state_matrix, axes=([n + k], [0])), -1, n + k)
    grid = np.moveaxis(t, list(range(n)), list(range(t.ndim - n, t.ndim)))
    if np.iscomplexobj(grid):
        if grid.size and np.abs(grid.imag).max() > th.ATOL:
            raise ValueError("generalised matrix elements must be real")
        grid = grid.real
    return grid


def reconstruct(grid, in_frames, out_frames, theory: Theory | None = None) -> ProcessValue:
    """Invert :func:`matrix_elements` through the dual frames."""
    in_frames = list([in_frames] if isinstance(in_frames, Frame) else in_frames)
    out_frames = list([out_frames] if isinstance(out_frames, Frame) else out_frames)
    grid = np.asarray(grid, dtype=float)
    frames = in_frames + out_frames
    if theory is None:
        theory = frames[0].theory if frames else Theory.CLASSICAL
    if grid.shape != tuple(len(fr) for fr in frames):
        raise ShapeMismatch(f"grid of shape {grid.shape} does not match frame sizes {[len(fr) for fr in frames]}")
    for fr in frames:
        fr.require_complete()
    m = len(in_frames)
    t = grid
    for k, fr in enumerate(in_frames):
        # state_matrix @ state_dual = 1 on legs
        t = np.moveaxis(np.tensordot(t, fr.state_dual, axes=([k], [0])), -1, k)
    for k, fr in enumerate(out_frames):
        t = np.moveaxis(np.tensordot(t, fr.effect_dual, axes=([m + k], [1])), -1, m + k)
    n = len(out_frames)
    t = np.moveaxis(t, list(range(m, m + n)), list(range(n)))
    if theory is Theory.CLASSICAL:
        t = np.real(t)
    return ProcessValue.from_tensor(theory, [fr.system for fr in in_frames], [fr.system for fr in out_frames], t)


# positivity


@dataclass
class PositivityReport:
    positive: bool
    min_value: float
    witness: dict
    threshold: float

    def __bool__(self):
        return self.positive


def is_positive_model(model: Model, frames: Mapping[str, Frame] | None = None, threshold: float = 1e-12) -> PositivityReport:
    """Strict positivity against every product of frame effects/states at the loci.

    Each locus is filled with ``state_j . effect_i`` for all frame pairs; open
    global inputs get frame states and open outputs frame effects.  This is a
    finite certificate: exact for classical models (point states span the
    cone); for quantum models it only probes the frame projectors.
    """
    d = model.diagram
    theory = model.theory
    frames = dict(frames or {})
    fill = {}
    axis_labels = []
    for x, t in model.loci.items():
        fr = frames.get(x) or standard_frame(t, theory)
        tensor = np.einsum("aj,ib->abij", fr.state_matrix, fr.effect_matrix)
        fill[x] = (tensor, [("eff", x), ("st", x)])
        axis_labels += [(x, "effect", fr.labels), (x, "state", fr.labels)]
    # open global ports: feed frames through a stacked boundary
    net = build_network(model, fill)
    for k, t in enumerate(d.inputs):
        fr = frames.get(f"in[{k}]") or standard_frame(t, theory)
        net.tensors.append((fr.state_matrix, [net.in_labels[k], ("in", k)]))
        net.extras.append(("in", k))
        axis_labels.append((f"in[{k}]", "state", fr.labels))
    for k, t in enumerate(d.outputs):
        fr = frames.get(f"out[{k}]") or standard_frame(t, theory)
        net.tensors.append((fr.effect_matrix.T, [net.out_labels[k], ("out", k)]))
        net.extras.append(("out", k))
        axis_labels.append((f"out[{k}]", "effect", fr.labels))
    net.in_labels, net.out_labels, net.in_types, net.out_types = [], [], [], []
    values = contract_network(net)
    values = np.real(values)
    pos = np.unravel_index(np.argmin(values), values.shape) if values.size else ()
    min_value = float(values[pos]) if values.size else 1.0
    witness = {f"{where} {role}": labels[i] for (where, role, labels), i in zip(axis_labels, pos)}
    return PositivityReport(min_value > threshold, min_value, witness, threshold)
