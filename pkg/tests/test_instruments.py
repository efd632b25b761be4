import itertools

import numpy as np
import pytest

import oracles
from qcausal import theory as th
from qcausal.diagram import Model, build_diagram
from qcausal.errors import MissingTable, RankDeficientFrame, TypeMismatch
from qcausal.identify import _counterexample_models, build_counterexample_pair
from qcausal.instruments import (
    Frame,
    MeasurementPlan,
    ProjectiveInstrument,
    basis_family,
    is_positive_model,
    matrix_elements,
    observe,
    reconstruct,
    standard_basis,
    standard_frame,
)
from qcausal.models import random_causal, random_front_door_model
from qcausal.theory import SystemType, Theory

C, Q = Theory.CLASSICAL, Theory.QUANTUM
QB = SystemType("Q", 2)


def test_classical_frame_is_point_states():
    fr = standard_frame(SystemType("B", 2), C)
    assert np.array_equal(fr.state_matrix, np.eye(2))
    assert np.array_equal(fr.effect_matrix, np.eye(2))


@pytest.mark.parametrize("d, n", [(2, 6), (3, 15)])
def test_quantum_frame_sizes_and_rank(d, n):
    fr = standard_frame(SystemType("S", d), Q)
    assert len(fr) == n
    assert fr.gram_rank() == d * d
    assert np.isfinite(fr.condition_number())


def test_standard_basis_alone_is_incomplete():
    fr = Frame(QB, Q, [standard_basis(2)])
    assert fr.gram_rank() == 2
    with pytest.raises(RankDeficientFrame):
        reconstruct(np.eye(2), [fr], [fr], Q)


def test_basis_family_vectors_orthonormal():
    for b in basis_family(3):
        assert np.abs(b.vectors.conj().T @ b.vectors - np.eye(3)).max() < 1e-15
    assert [b.name for b in basis_family(2)] == ["std", "x01", "y01"]


def test_matrix_elements_identity():
    bit = SystemType("B", 2)
    fr = standard_frame(bit, C)
    assert np.abs(matrix_elements(th.identity(bit, C), fr, fr) - np.eye(2)).max() < 1e-15

    fq = standard_frame(QB, Q)
    grid = matrix_elements(th.identity(QB, Q), fq, fq)
    vecs = []
    for name, i in fq.labels:
        vecs.append(next(b for b in basis_family(2) if b.name == name).vectors[:, i])
    expected = np.array([[abs(np.vdot(bj, bi)) ** 2 for bj in vecs] for bi in vecs])
    assert np.abs(grid - expected).max() < 1e-14


def test_matrix_elements_constant_channel():
    sigma = np.array([[0.8, 0.1 + 0.2j], [0.1 - 0.2j, 0.2]])
    f = th.compose_seq(th.from_density(sigma, QB), th.discard(QB, Q))
    fr = standard_frame(QB, Q)
    grid = matrix_elements(f, fr, fr)
    # effect leg P.reshape(-1) pairs with vec(sigma) as tr(P sigma)
    expected = [float(np.real(fr.effect_matrix[j] @ sigma.T.reshape(-1))) for j in range(len(fr))]
    for i in range(len(fr)):
        assert np.abs(grid[i] - expected).max() < 1e-14


@pytest.mark.parametrize("theory", [C, Q])
@pytest.mark.parametrize("d", [2, 3])
def test_tomography_round_trip(theory, d):
    s = SystemType("S", d)
    fr = standard_frame(s, theory)
    worst = 0.0
    for seed in range(50):
        f = random_causal(theory, [s], [s], seed=seed, mu=0.0)
        g = reconstruct(matrix_elements(f, fr, fr), fr, fr, theory)
        worst = max(worst, th.max_abs_diff(f, g))
    assert worst < 1e-10


def test_round_trip_two_inputs():
    fr = standard_frame(QB, Q)
    f = random_causal(Q, [QB, QB], [QB], seed=1)
    g = reconstruct(matrix_elements(f, [fr, fr], [fr]), [fr, fr], [fr], Q)
    assert th.max_abs_diff(f, g) < 1e-10


def test_reconstruction_perturbation_bound():
    rng = np.random.default_rng(0)
    fr = standard_frame(QB, Q)
    f = random_causal(Q, [QB], [QB], seed=3)
    grid = matrix_elements(f, fr, fr)
    eps = 1e-6
    noise = rng.uniform(-eps, eps, size=grid.shape)
    err = th.max_abs_diff(reconstruct(grid + noise, fr, fr, Q), f)
    s_state = np.linalg.svd(fr.state_matrix, compute_uv=False)[: fr.leg_dim].min()
    s_effect = fr.singular_values()[: fr.leg_dim].min()
    bound = eps * np.sqrt(grid.size) / (s_state * s_effect)
    assert 0 < err <= bound


def test_trivial_plan_single_entry():
    m = random_front_door_model(Q, seed=0)
    plan = MeasurementPlan(m.loci, {x: [None] for x in m.loci}, Q)
    table = observe(m, plan)
    assert len(table.entries) == 1
    assert abs(next(iter(table.entries.values())) - 1.0) < 1e-12


def test_counterexample_tables_agree():
    m1, m2 = build_counterexample_pair(0.5)
    t1, t2 = observe(m1), observe(m2)
    assert t1.entries.keys() == t2.entries.keys()
    assert max(abs(p - t2.entries[k]) for k, p in t1.entries.items()) < 1e-12
    assert t1.normalization_error() < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_classical_front_door_table_matches_enumeration(seed):
    m = random_front_door_model(C, seed=seed)
    joint = oracles.front_door_joint(m)
    table = observe(m)
    for x, z, y in itertools.product(*(range(n) for n in joint.shape)):
        event = {"X": ("std", x), "Z": ("std", z), "Y": ("std", y)}
        assert abs(table.prob(event) - joint[x, z, y]) < 1e-14


def test_classical_measurement_does_not_disturb():
    m = random_front_door_model(C, seed=7)
    table = observe(m)
    for z in range(m.loci["Z"].dim):
        summed = sum(table.prob({"X": ("std", x), "Z": ("std", z)}) for x in range(m.loci["X"].dim))
        assert abs(summed - table.prob({"Z": ("std", z)})) < 1e-14


def test_quantum_tables_are_normalized():
    table = observe(random_front_door_model(Q, seed=2))
    assert table.normalization_error() < 1e-12
    assert table.min_probability() > 0


def test_instruments_sum_to_causal_channel():
    for b in basis_family(3):
        instr = ProjectiveInstrument(SystemType("S", 3), Q, b)
        assert th.is_causal(instr.channel())
        for f in instr.outcomes:
            assert th.is_cp(f)
            assert not th.is_causal(f)


def test_classical_plan_rejects_rotated_basis():
    m = random_front_door_model(C, seed=0)
    with pytest.raises(ValueError):
        MeasurementPlan(m.loci, {x: [None, basis_family(m.loci[x].dim, Q)[-1]] for x in m.loci}, C)
    with pytest.raises(TypeMismatch):
        MeasurementPlan(m.loci, {x: [standard_basis(5)] for x in m.loci}, C)


def test_missing_choice_raises():
    m = random_front_door_model(Q, seed=0)
    plan = MeasurementPlan(m.loci, {x: [None] for x in m.loci}, Q)
    with pytest.raises(MissingTable):
        observe(m, plan).prob({"X": ("std", 0)})


def test_positivity_of_counterexample():
    m1, m2 = build_counterexample_pair(0.5)
    assert is_positive_model(m1).positive
    assert is_positive_model(m2).positive
    report = is_positive_model(_counterexample_models(0.0)[0])
    assert not report.positive
    assert report.min_value < 1e-12


def test_permutation_channel_is_not_positive():
    d = build_diagram(
        {"B": 2},
        {"s": ([], ["B"]), "p": (["B"], ["B"])},
        {"X": "B", "Y": "B"},
        [("s.out[0]", "X.arrive"), ("X.leave", "p.in[0]"), ("p.out[0]", "Y.arrive"), ("Y.leave", "discard")],
    )
    b = d.loci["X"]
    m = Model(d, C, {"s": th.from_matrix([[0.5], [0.5]], [], b), "p": th.from_matrix([[0, 1], [1, 0]], b, b)})
    report = is_positive_model(m)
    assert not report.positive
    assert report.min_value == 0.0
    assert set(report.witness) == {"X effect", "X state", "Y effect", "Y state"}


def test_random_models_are_positive():
    for theory in (C, Q):
        assert is_positive_model(random_front_door_model(theory, seed=1)).positive
