"""Concrete process theories: stochastic matrices and completely positive maps.

A :class:`ProcessValue` is a morphism in one of two theories:

* ``Theory.CLASSICAL`` -- nonnegative matrices of shape ``(prod out dims, prod in dims)``.
  Columns of a causal process are probability distributions.
* ``Theory.QUANTUM`` -- superoperator matrices of shape
  ``(prod out dims ** 2, prod in dims ** 2)`` acting on column-stacked density
  operators, ``vec(rho)[r + c * D] = rho[r, c]``.

Composite systems are indexed with the leftmost port as the most significant
digit.  Internally most operations go through the *leg tensor* view of a
process, which has one axis per port: ``d`` values per classical port and
``d ** 2`` values per quantum port, where the quantum leg index of a single
system is its own column-stacked vectorisation index.  In the leg view the two
theories share all of their plumbing (composition, tensoring, cups, caps and
discarding are the same tensor contractions).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatch, TheoryMismatch, TypeMismatch, WrongTheory

ATOL = 1e-9


class Theory(enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class SystemType:
    name: str
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"system {self.name!r} needs a positive integer dimension, got {self.dim}")

    def __repr__(self):
        return f"{self.name}[{self.dim}]"


UNIT = SystemType("I", 1)


def _types(types) -> tuple[SystemType, ...]:
    if isinstance(types, SystemType):
        return (types,)
    return tuple(types)


def total_dim(types: Iterable[SystemType]) -> int:
    return int(np.prod([t.dim for t in types], dtype=np.int64))


def leg_dim(t: SystemType, theory: Theory) -> int:
    return t.dim if theory is Theory.CLASSICAL else t.dim**2


def leg_dims(types: Iterable[SystemType], theory: Theory) -> list[int]:
    return [leg_dim(t, theory) for t in types]


class ProcessValue:
    """An immutable morphism ``inputs -> outputs`` in a fixed theory.

    Classical data must be entrywise nonnegative (up to ``ATOL``).  Complete
    positivity of quantum data is *not* enforced here because some useful
    linear maps (e.g. the transpose) are not CP; models check it on ingestion.
    """

    __slots__ = ("theory", "inputs", "outputs", "data")

    def __init__(self, theory: Theory, inputs, outputs, data):
        inputs, outputs = _types(inputs), _types(outputs)
        dtype = float if theory is Theory.CLASSICAL else complex
        arr = np.array(data, dtype=dtype)
        if theory is Theory.CLASSICAL and np.iscomplexobj(np.asarray(data)):
            raise TheoryMismatch("classical processes must be real")
        shape = (
            (total_dim(outputs), total_dim(inputs))
            if theory is Theory.CLASSICAL
            else (total_dim(outputs) ** 2, total_dim(inputs) ** 2)
        )
        if arr.size != shape[0] * shape[1]:
            raise ShapeMismatch(f"data of shape {arr.shape} does not fit {inputs} -> {outputs} (expected {shape})")
        arr = arr.reshape(shape)
        if theory is Theory.CLASSICAL and arr.size and arr.min() < -ATOL:
            raise ValueError(f"classical process has a negative entry {arr.min():.3g}")
        arr.setflags(write=False)
        object.__setattr__(self, "theory", theory)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, key, value):
        raise AttributeError("ProcessValue is immutable")

    def __repr__(self):
        return f"ProcessValue({self.theory.value}, {list(self.inputs)} -> {list(self.outputs)})"

    # leg tensor view

    def tensor(self) -> np.ndarray:
        """Return the data with one axis per port: outputs first, then inputs."""
        out_d = [t.dim for t in self.outputs]
        in_d = [t.dim for t in self.inputs]
        if self.theory is Theory.CLASSICAL:
            return self.data.reshape(out_d + in_d)
        n, m = len(out_d), len(in_d)
        t = self.data.reshape(out_d + out_d + in_d + in_d)
        order = [a for k in range(n) for a in (k, n + k)]
        order += [a for k in range(m) for a in (2 * n + k, 2 * n + m + k)]
        return t.transpose(order).reshape([d * d for d in out_d + in_d])

    @classmethod
    def from_tensor(cls, theory: Theory, inputs, outputs, tensor) -> "ProcessValue":
        inputs, outputs = _types(inputs), _types(outputs)
        out_d = [t.dim for t in outputs]
        in_d = [t.dim for t in inputs]
        tensor = np.asarray(tensor)
        if theory is Theory.CLASSICAL:
            return cls(theory, inputs, outputs, tensor.reshape(total_dim(outputs), total_dim(inputs)))
        n, m = len(out_d), len(in_d)
        t = tensor.reshape([d for d in out_d for _ in (0, 1)] + [d for d in in_d for _ in (0, 1)])
        order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
        order += [2 * n + 2 * k for k in range(m)] + [2 * n + 2 * k + 1 for k in range(m)]
        data = t.transpose(order).reshape(total_dim(outputs) ** 2, total_dim(inputs) ** 2)
        return cls(theory, inputs, outputs, data)

    # conveniences

    def to_scalar(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatch(f"{self!r} is not a scalar")
        value = self.data.reshape(())[()]
        if abs(np.imag(value)) > ATOL:
            raise ValueError(f"scalar has imaginary part {np.imag(value):.3g}")
        return float(np.real(value))

    def density(self) -> np.ndarray:
        """The operator/distribution represented by a state (no inputs)."""
        if self.inputs:
            raise ShapeMismatch("density() needs a state")
        if self.theory is Theory.CLASSICAL:
            return self.data[:, 0].copy()
        d = total_dim(self.outputs)
        return self.data[:, 0].reshape(d, d, order="F")

    def __matmul__(self, other: "ProcessValue") -> "ProcessValue":
        return compose_seq(self, other)

    def __and__(self, other: "ProcessValue") -> "ProcessValue":
        return compose_par(self, other)


# constructors


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator of ``rho -> sum_k K rho K^dagger`` in column-stacking form."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    return sum(np.kron(k.conj(), k) for k in kraus)


def from_kraus(kraus, inputs, outputs) -> ProcessValue:
    inputs, outputs = _types(inputs), _types(outputs)
    kraus = [np.asarray(k, dtype=complex).reshape(total_dim(outputs), total_dim(inputs)) for k in kraus]
    return ProcessValue(Theory.QUANTUM, inputs, outputs, kraus_to_superop(kraus))


def superop_to_kraus(f: ProcessValue, tol: float = 1e-14) -> list[np.ndarray]:
    """Kraus operators from the eigen-decomposition of the Choi operator."""
    if f.theory is not Theory.QUANTUM:
        raise WrongTheory("Kraus operators only exist for quantum processes")
    dout, din = total_dim(f.outputs), total_dim(f.inputs)
    vals, vecs = np.linalg.eigh(choi(f))
    kraus = []
    for lam, v in zip(vals[::-1], vecs[:, ::-1].T):
        if lam > tol:
            # choi index is (out, in) so each eigenvector reshapes straight into an operator
            kraus.append(np.sqrt(lam) * v.reshape(dout, din))
    return kraus


def from_matrix(matrix, inputs, outputs) -> ProcessValue:
    return ProcessValue(Theory.CLASSICAL, inputs, outputs, matrix)


def from_density(rho, system) -> ProcessValue:
    """Quantum state from a density operator on ``system`` (a type or list of types)."""
    outputs = _types(system)
    rho = np.asarray(rho, dtype=complex)
    return ProcessValue(Theory.QUANTUM, (), outputs, rho.reshape(-1, order="F")[:, None])


def from_effect_operator(op, system) -> ProcessValue:
    """Quantum effect ``rho -> tr(op rho)``."""
    inputs = _types(system)
    op = np.asarray(op, dtype=complex)
    return ProcessValue(Theory.QUANTUM, inputs, (), op.reshape(1, -1))


def pure_state(vector, system) -> ProcessValue:
    v = np.asarray(vector, dtype=complex)
    return from_density(np.outer(v, v.conj()), system)


def point_state(index: int, system: SystemType, theory: Theory = Theory.CLASSICAL) -> ProcessValue:
    if theory is Theory.QUANTUM:
        return pure_state(np.eye(system.dim)[index], system)
    return from_matrix(np.eye(system.dim)[:, [index]], (), system)


def maximally_mixed(system, theory: Theory) -> ProcessValue:
    outputs = _types(system)
    d = total_dim(outputs)
    if theory is Theory.CLASSICAL:
        return from_matrix(np.full((d, 1), 1.0 / d), (), outputs)
    return from_density(np.eye(d) / d, outputs)


def scalar(value: float, theory: Theory) -> ProcessValue:
    if abs(np.imag(value)) > ATOL:
        raise ValueError("scalars must be real")
    return ProcessValue(theory, (), (), [[np.real(value)]])


def identity(types, theory: Theory) -> ProcessValue:
    types = _types(types)
    n = total_dim(types) if theory is Theory.CLASSICAL else total_dim(types) ** 2
    return ProcessValue(theory, types, types, np.eye(n))


# composition


def _check_theory(*fs: ProcessValue) -> Theory:
    theories = {f.theory for f in fs}
    if len(theories) != 1:
        raise TheoryMismatch(f"cannot combine processes from theories {sorted(t.value for t in theories)}")
    return fs[0].theory


def compose_seq(g: ProcessValue, f: ProcessValue) -> ProcessValue:
    """``g . f``: first ``f``, then ``g``."""
    theory = _check_theory(g, f)
    if f.outputs != g.inputs:
        raise TypeMismatch(f"cannot compose: {list(f.outputs)} does not match {list(g.inputs)}")
    return ProcessValue(theory, f.inputs, g.outputs, g.data @ f.data)


def compose_par(f: ProcessValue, g: ProcessValue) -> ProcessValue:
    """``f (x) g`` with ports ``f.outputs + g.outputs`` and ``f.inputs + g.inputs``."""
    theory = _check_theory(f, g)
    if theory is Theory.CLASSICAL:
        # leftmost-significant ordering makes this a plain Kronecker product
        return ProcessValue(theory, f.inputs + g.inputs, f.outputs + g.outputs, np.kron(f.data, g.data))
    tf, tg = f.tensor(), g.tensor()
    nfo, ngo = len(f.outputs), len(g.outputs)
    t = np.multiply.outer(tf, tg)
    nf = tf.ndim
    order = list(range(nfo)) + [nf + k for k in range(ngo)]
    order += list(range(nfo, nf)) + list(range(nf + ngo, t.ndim))
    return ProcessValue.from_tensor(theory, f.inputs + g.inputs, f.outputs + g.outputs, t.transpose(order))


def tensor_all(fs: Sequence[ProcessValue]) -> ProcessValue:
    return reduce(compose_par, fs)


def permute_ports(f: ProcessValue, out_order: Sequence[int], in_order: Sequence[int]) -> ProcessValue:
    """Reorder ports: new output ``k`` is old output ``out_order[k]`` (same for inputs)."""
    if sorted(out_order) != list(range(len(f.outputs))) or sorted(in_order) != list(range(len(f.inputs))):
        raise ShapeMismatch("port orders must be permutations")
    n = len(f.outputs)
    t = f.tensor().transpose(list(out_order) + [n + k for k in in_order])
    return ProcessValue.from_tensor(
        f.theory,
        [f.inputs[k] for k in in_order],
        [f.outputs[k] for k in out_order],
        t,
    )


def discard(types, theory: Theory) -> ProcessValue:
    """The discarding effect: all-ones row (classical) or the trace (quantum)."""
    types = _types(types)
    d = total_dim(types)
    if theory is Theory.CLASSICAL:
        return ProcessValue(theory, types, (), np.ones((1, d)))
    return ProcessValue(theory, types, (), np.eye(d).reshape(1, -1))


def _leg_delta(t: SystemType, theory: Theory) -> np.ndarray:
    return np.eye(leg_dim(t, theory))


def cup(t: SystemType, theory: Theory) -> ProcessValue:
    """Unnormalised perfectly correlated state on ``t (x) t``.

    Quantum: ``|Omega><Omega|`` with ``Omega = sum_i |ii>``.  In the leg view both
    cup and cap are the identity matrix on legs.
    """
    return ProcessValue.from_tensor(theory, (), (t, t), _leg_delta(t, theory))


def cap(t: SystemType, theory: Theory) -> ProcessValue:
    return ProcessValue.from_tensor(theory, (t, t), (), _leg_delta(t, theory))


# predicates


def is_causal(f: ProcessValue, tol: float = ATOL) -> bool:
    lhs = compose_seq(discard(f.outputs, f.theory), f)
    return bool(np.max(np.abs(lhs.data - discard(f.inputs, f.theory).data), initial=0.0) <= tol)


def choi(f: ProcessValue, normalized: bool = False) -> np.ndarray:
    """Choi operator ``J[(m, i), (n, j)] = <m| f(|i><j|) |n>`` (output index first)."""
    if f.theory is not Theory.QUANTUM:
        raise WrongTheory("the Choi operator is defined for quantum processes")
    dout, din = total_dim(f.outputs), total_dim(f.inputs)
    # superop row index n * dout + m, column index j * din + i
    j = f.data.reshape(dout, dout, din, din).transpose(1, 3, 0, 2).reshape(dout * din, dout * din)
    return j / din if normalized else j


def is_cp(f: ProcessValue, tol: float = ATOL) -> bool:
    if f.theory is not Theory.QUANTUM:
        raise WrongTheory("complete positivity is checked on quantum processes only")
    j = choi(f)
    j = (j + j.conj().T) / 2
    return bool(np.linalg.eigvalsh(j).min() >= -tol)


def is_positive_class(f: ProcessValue, tol: float = 1e-10) -> bool:
    """Entrywise nonnegativity (classical) or complete positivity (quantum)."""
    if f.theory is Theory.CLASSICAL:
        return bool(f.data.min(initial=0.0) >= -tol)
    return is_cp(f, tol)


def max_abs_diff(a: ProcessValue, b: ProcessValue) -> float:
    _check_theory(a, b)
    if a.data.shape != b.data.shape:
        raise ShapeMismatch(f"{a!r} and {b!r} have different shapes")
    return float(np.max(np.abs(a.data - b.data), initial=0.0))
