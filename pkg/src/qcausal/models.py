"""Stock diagram shapes and seeded random positive models.

Random boxes are convex mixtures ``(1 - mu) * R + mu * N`` of a random causal
map ``R`` and the map ``N`` that discards its input and prepares the uniform /
maximally mixed state.  With ``mu > 0`` every box has full support, so the
resulting models are positive.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from . import theory as th
from .diagram import Diagram, Model, build_diagram
from .theory import ProcessValue, Theory

MIXING = 0.1


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_kraus(din: int, dout: int, rng, rank: int | None = None) -> list[np.ndarray]:
    """Kraus operators of a Haar-ish random channel (an isometry cut into blocks)."""
    rank = rank or din * dout
    g = rng.normal(size=(dout * rank, din)) + 1j * rng.normal(size=(dout * rank, din))
    v, r = np.linalg.qr(g)
    # fix the QR phase ambiguity so the draw is a function of the seed only
    v = v * (np.diag(r) / np.abs(np.diag(r)))
    return [v[k * dout : (k + 1) * dout, :] for k in range(rank)]


def random_causal(theory: Theory, inputs, outputs, seed=None, mu: float = MIXING) -> ProcessValue:
    rng = _rng(seed)
    inputs, outputs = th._types(inputs), th._types(outputs)
    din, dout = th.total_dim(inputs), th.total_dim(outputs)
    noise = th.compose_seq(th.maximally_mixed(outputs, theory), th.discard(inputs, theory))
    if theory is Theory.CLASSICAL:
        r = rng.dirichlet(np.ones(dout), size=din).T
        return ProcessValue(theory, inputs, outputs, (1 - mu) * r + mu * noise.data)
    r = th.from_kraus(random_kraus(din, dout, rng), inputs, outputs)
    return ProcessValue(theory, inputs, outputs, (1 - mu) * r.data + mu * noise.data)


def random_interpretation(diagram: Diagram, theory: Theory, seed=None, mu: float = MIXING) -> dict[str, ProcessValue]:
    rng = _rng(seed)
    return {
        name: random_causal(theory, decl.inputs, decl.outputs, rng, mu) for name, decl in diagram.boxes.items()
    }


def random_model(diagram: Diagram, theory: Theory, seed=None, mu: float = MIXING) -> Model:
    return Model(diagram, theory, random_interpretation(diagram, theory, seed, mu))


# shapes


def front_door_diagram(dims: Mapping[str, int] | None = None) -> Diagram:
    """Latent ``u`` feeds ``x`` (towards X) and ``y``; X -> z -> Z -> y -> Y."""
    sysdims = {"U1": 2, "U2": 2, "X": 2, "Z": 2, "Y": 2}
    sysdims.update(dims or {})
    return build_diagram(
        sysdims,
        {
            "u": ([], ["U1", "U2"]),
            "x": (["U1"], ["X"]),
            "z": (["X"], ["Z"]),
            "y": (["Z", "U2"], ["Y"]),
        },
        {"X": "X", "Z": "Z", "Y": "Y"},
        [
            ("u.out[0]", "x.in[0]"),
            ("u.out[1]", "y.in[1]"),
            ("x.out[0]", "X.arrive"),
            ("X.leave", "z.in[0]"),
            ("z.out[0]", "Z.arrive"),
            ("Z.leave", "y.in[0]"),
            ("y.out[0]", "Y.arrive"),
            ("Y.leave", "discard"),
        ],
    )


def single_intervention_diagram(dims: Mapping[str, int] | None = None) -> Diagram:
    """Mediator ``g : X (x) A -> B`` inside an outer comb with latent confounding.

    ``u`` is a latent source shared by ``x`` (which emits X and a side wire V),
    ``a`` (emits A) and the sink ``c`` (emits C).  Only ``g`` is free of latent
    inputs: it sees exactly the wires leaving X and A.
    """
    sysdims = {"U1": 2, "U2": 2, "U3": 2, "V": 2, "X": 2, "A": 2, "B": 2, "C": 2}
    sysdims.update(dims or {})
    return build_diagram(
        sysdims,
        {
            "u": ([], ["U1", "U2", "U3"]),
            "x": (["U1"], ["X", "V"]),
            "a": (["V", "U3"], ["A"]),
            "g": (["X", "A"], ["B"]),
            "c": (["B", "U2"], ["C"]),
        },
        {"X": "X", "A": "A", "B": "B", "C": "C"},
        [
            ("u.out[0]", "x.in[0]"),
            ("u.out[1]", "c.in[1]"),
            ("u.out[2]", "a.in[1]"),
            ("x.out[0]", "X.arrive"),
            ("x.out[1]", "a.in[0]"),
            ("a.out[0]", "A.arrive"),
            ("X.leave", "g.in[0]"),
            ("A.leave", "g.in[1]"),
            ("g.out[0]", "B.arrive"),
            ("B.leave", "c.in[0]"),
            ("c.out[0]", "C.arrive"),
            ("C.leave", "discard"),
        ],
    )


def four_locus_diagram(dims: Mapping[str, int] | None = None) -> Diagram:
    """Four loci where X4 descends from X1 and X2 but not from X3.

    ``s`` is a common source of X1, X3 and ``c``; X1 -> b -> X2 -> c -> X4,
    while the wire leaving X3 only reaches ``e`` whose output is discarded.
    """
    sysdims = {"S": 2}
    sysdims.update(dims or {})
    return build_diagram(
        sysdims,
        {
            "s": ([], ["S", "S", "S"]),
            "b": (["S"], ["S"]),
            "c": (["S", "S"], ["S"]),
            "e": (["S"], ["S"]),
        },
        {"X1": "S", "X2": "S", "X3": "S", "X4": "S"},
        [
            ("s.out[0]", "X1.arrive"),
            ("s.out[1]", "X3.arrive"),
            ("s.out[2]", "c.in[1]"),
            ("X1.leave", "b.in[0]"),
            ("b.out[0]", "X2.arrive"),
            ("X2.leave", "c.in[0]"),
            ("c.out[0]", "X4.arrive"),
            ("X3.leave", "e.in[0]"),
            ("e.out[0]", "discard"),
            ("X4.leave", "discard"),
        ],
    )


def counterexample_diagram() -> Diagram:
    """Three loci: z -> Z -> x <- u -> y, with x -> X -> y -> Y.

    ``u`` emits two qubits; the left one goes straight to ``y``, the right one
    through ``x`` to X.  The wire leaving Z enters ``x`` as its left input.
    """
    return build_diagram(
        {"Q": 2},
        {
            "u": ([], ["Q", "Q"]),
            "z": ([], ["Q"]),
            "x": (["Q", "Q"], ["Q"]),
            "y": (["Q", "Q"], ["Q"]),
        },
        {"X": "Q", "Z": "Q", "Y": "Q"},
        [
            ("z.out[0]", "Z.arrive"),
            ("Z.leave", "x.in[0]"),
            ("u.out[1]", "x.in[1]"),
            ("x.out[0]", "X.arrive"),
            ("u.out[0]", "y.in[0]"),
            ("X.leave", "y.in[1]"),
            ("y.out[0]", "Y.arrive"),
            ("Y.leave", "discard"),
        ],
    )


def random_dims(names, rng, choices=(2, 3)) -> dict[str, int]:
    return {n: int(rng.choice(choices)) for n in names}


def random_front_door_model(theory: Theory, seed=None, dims: Mapping[str, int] | None = None) -> Model:
    """Seeded random positive front-door model.

    Quantum systems default to qubits; classical dimensions are drawn from {2, 3}.
    """
    rng = _rng(seed)
    if dims is None and theory is Theory.CLASSICAL:
        dims = random_dims(["U1", "U2", "X", "Z", "Y"], rng)
    return random_model(front_door_diagram(dims), theory, rng)


def random_single_intervention_model(theory: Theory, seed=None, dims: Mapping[str, int] | None = None) -> Model:
    rng = _rng(seed)
    if dims is None and theory is Theory.CLASSICAL:
        dims = random_dims(["U1", "U2", "U3", "V", "X", "A", "B", "C"], rng)
    return random_model(single_intervention_diagram(dims), theory, rng)
