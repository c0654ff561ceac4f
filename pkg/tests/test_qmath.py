import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqcsym import qmath
from mbqcsym.qmath import CircuitIR, DenseState, DimensionError, Gate, ZeroProbabilityError

from oracles import embed


def test_gate_constants_are_unitary():
    for name in ("I2", "X", "Y", "Z", "H", "S", "T", "CZ", "CNOT", "SWAP", "CCZ"):
        assert qmath.is_unitary(getattr(qmath, name)), name


def test_y_is_i_x_z():
    np.testing.assert_allclose(qmath.Y, 1j * qmath.X @ qmath.Z)


@pytest.mark.parametrize("theta", [0.0, 0.3, -1.7, math.pi])
def test_rotations_match_series(theta):
    np.testing.assert_allclose(qmath.rz(theta), np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]))
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    np.testing.assert_allclose(qmath.rx(theta), [[c, -1j * s], [-1j * s, c]])


def test_state_rejects_unnormalised_and_mixed_registers():
    with pytest.raises(ValueError):
        DenseState((2,), np.array([1.0, 1.0]))
    with pytest.raises(DimensionError):
        DenseState((2, 3), np.ones(6) / math.sqrt(6))
    with pytest.raises(DimensionError):
        DenseState((4,), np.array([1, 0, 0, 0]))


@pytest.mark.parametrize("sites", [[0], [2], [1, 0], [0, 2], [2, 1, 0]])
def test_apply_unitary_matches_embedding(rng, sites):
    n = 3
    psi = qmath.random_state(n, rng)
    u = qmath.random_unitary(2 ** len(sites), rng)
    out = qmath.apply_unitary(psi, u, sites)
    ref = embed(u, sites, n) @ psi.amplitudes
    np.testing.assert_allclose(out.amplitudes, ref, atol=1e-12)


def test_apply_unitary_on_qutrits(rng):
    psi = qmath.random_state(2, rng, dim=3)
    u = qmath.random_unitary(3, rng)
    out = qmath.apply_unitary(psi, u, [1])
    np.testing.assert_allclose(out.amplitudes, embed(u, [1], 2, d=3) @ psi.amplitudes, atol=1e-12)


def test_apply_unitary_rejects_non_unitary(rng):
    with pytest.raises(ValueError):
        qmath.apply_unitary(DenseState.zeros(1), np.array([[1, 1], [0, 1]]), [0])


def test_circuit_text_round_trip():
    text = "# note: hello\nwires 3\nH 0\nRZ 1 0.785398\nCZ 0 1\nCCZ 0 1 2\n"
    circ = CircuitIR.parse(text)
    assert circ.num_wires == 3
    assert [g.kind for g in circ.gates] == ["H", "RZ", "CZ", "CCZ"]
    assert circ.meta("note") == "hello"
    again = CircuitIR.parse(circ.to_text())
    assert again == circ


@pytest.mark.parametrize("bad", ["FOO 0", "CZ 0", "RZ 0", "H 0 1", "CZ 1 1"])
def test_circuit_parse_errors(bad):
    with pytest.raises(ValueError):
        CircuitIR.parse(bad)


def test_circuit_unitary_matches_embedding():
    circ = CircuitIR(3, (Gate("H", (2,)), Gate("CNOT", (2, 0)), Gate("RX", (1,), 0.4)))
    ref = embed(qmath.rx(0.4), [1], 3) @ embed(qmath.CNOT, [2, 0], 3) @ embed(qmath.H, [2], 3)
    np.testing.assert_allclose(circ.unitary(), ref, atol=1e-12)


def test_apply_circuit_width_mismatch():
    with pytest.raises(DimensionError):
        qmath.apply_circuit(CircuitIR(2, ()), DenseState.zeros(3))


def test_measure_forced_branches_sum_to_one(rng):
    psi = qmath.random_state(3, rng)
    total = sum(qmath.measure(psi, 1, qmath.X_BASIS, forced_outcome=o).probability for o in (0, 1))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_measure_post_state_is_projection(rng):
    psi = qmath.random_state(2, rng)
    res = qmath.measure(psi, 0, qmath.X_BASIS, forced_outcome=1)
    proj = np.kron(np.outer(qmath.KET_MINUS, qmath.KET_MINUS.conj()), np.eye(2)) @ psi.amplitudes
    ref = np.kron(qmath.KET_MINUS.conj(), np.eye(2)) @ proj
    assert res.probability == pytest.approx(np.linalg.norm(proj) ** 2)
    np.testing.assert_allclose(res.post_state.amplitudes, ref / np.linalg.norm(ref), atol=1e-12)


def test_measure_keep_site(rng):
    psi = qmath.random_state(2, rng)
    res = qmath.measure(psi, 1, qmath.Z_BASIS, forced_outcome=0, remove=False)
    assert res.post_state.num_sites == 2
    assert abs(res.post_state.tensor()[:, 1]).max() < 1e-12


def test_measure_zero_probability_branch():
    with pytest.raises(ZeroProbabilityError):
        qmath.measure(DenseState.zeros(2), 0, qmath.Z_BASIS, forced_outcome=1)


def test_measure_last_site_gives_none():
    res = qmath.measure(DenseState.plus(1), 0, qmath.X_BASIS, forced_outcome=0)
    assert res.post_state is None
    assert res.probability == pytest.approx(1.0)


def test_reduced_density_of_bell_pair():
    bell = DenseState.from_vector([1, 0, 0, 1])
    np.testing.assert_allclose(bell.reduced_density([0]), np.eye(2) / 2, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_phase_alignment(re, im):
    rng = np.random.default_rng(3)
    u = qmath.random_unitary(2, rng)
    c = complex(re, im)
    if abs(c) < 1e-3:
        c = 1.0
    assert qmath.proportional(c * u, u)
    assert qmath.equal_up_to_phase(np.exp(1j * re) * u, u)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_random_states_are_normalised(n, seed):
    psi = qmath.random_state(n, np.random.default_rng(seed))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_h_on_zero_is_plus():
    out = qmath.apply_circuit(CircuitIR(1, (Gate("H", (0,)),)), DenseState.zeros(1))
    assert qmath.fidelity(out, DenseState.plus(1)) == pytest.approx(1.0)


def test_ccz_on_plus_states():
    out = qmath.apply_circuit(CircuitIR(3, (Gate("CCZ", (0, 1, 2)),)), DenseState.plus(3))
    ref = np.full(8, 1 / math.sqrt(8))
    ref[7] *= -1
    np.testing.assert_allclose(out.amplitudes, ref, atol=1e-12)


def test_cz_on_plus_is_stabilized_by_xz_and_zx():
    from mbqcsym.pauli import PauliOp, StabilizerGroup

    out = qmath.apply_circuit(CircuitIR(2, (Gate("CZ", (0, 1)),)), DenseState.plus(2))
    group = StabilizerGroup(2, (PauliOp.from_str("XZ"), PauliOp.from_str("ZX")))
    assert group.stabilizes(out)


@pytest.mark.parametrize("state,probs", [(DenseState.zeros(1), (1.0, 0.0)), (DenseState.plus(1), (0.5, 0.5))])
def test_z_measurement_probabilities(state, probs):
    t = state.tensor()
    got = [abs(t[o]) ** 2 for o in (0, 1)]
    np.testing.assert_allclose(got, probs)
    res = qmath.measure(state, 0, qmath.Z_BASIS, forced_outcome=0)
    assert res.probability == pytest.approx(probs[0])


def test_bell_x_measurement_leaves_plus():
    bell = DenseState.from_vector([1, 0, 0, 1])
    res = qmath.measure(bell, 0, qmath.X_BASIS, forced_outcome=0)
    assert res.probability == pytest.approx(0.5)
    assert qmath.fidelity(res.post_state, DenseState.plus(1)) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "a,b,value",
    [
        (DenseState.zeros(1), DenseState.zeros(1), 1.0),
        (DenseState.zeros(1), DenseState.product(qmath.KET1), 0.0),
        (DenseState.zeros(1), DenseState.plus(1), 0.5),
    ],
)
def test_fidelity_examples(a, b, value):
    assert qmath.fidelity(a, b) == pytest.approx(value)


def test_fidelity_structure_mismatch():
    with pytest.raises(DimensionError):
        qmath.fidelity(DenseState.zeros(1), DenseState.zeros(2))


def test_deep_random_circuit_preserves_norm(rng):
    n = 10
    gates = []
    kinds = ["H", "S", "T", "X", "RZ", "RX", "CZ", "CNOT", "SWAP", "CCZ"]
    for _ in range(20):
        k = kinds[rng.integers(len(kinds))]
        wires = tuple(int(w) for w in rng.choice(n, size=qmath.GATE_ARITY[k], replace=False))
        gates.append(Gate(k, wires, float(rng.uniform(-3, 3)) if k in qmath.ROTATIONS else None))
    psi = qmath.random_state(n, rng)
    vec = psi.amplitudes
    for g in gates:
        vec = qmath._apply_raw(vec, psi.site_dims, g.matrix(), g.wires)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_measurement_reconstructs_partial_projection(rng):
    psi = qmath.random_state(4, rng)
    basis = qmath.random_unitary(2, rng)
    rho = np.zeros((8, 8), dtype=complex)
    for o in (0, 1):
        res = qmath.measure(psi, 2, basis, forced_outcome=o)
        v = res.post_state.amplitudes
        rho += res.probability * np.outer(v, v.conj())
    # summing over outcomes in any basis leaves the partial trace
    t = np.moveaxis(psi.tensor(), 2, 0).reshape(2, -1)
    ref = t.T @ t.conj()
    np.testing.assert_allclose(rho, ref, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-math.pi, math.pi), st.integers(0, 1000))
def test_fidelity_ignores_global_phase(phi, seed):
    r = np.random.default_rng(seed)
    a, b = qmath.random_state(2, r), qmath.random_state(2, r)
    a2 = DenseState(a.site_dims, np.exp(1j * phi) * a.amplitudes)
    assert qmath.fidelity(a2, b) == pytest.approx(qmath.fidelity(a, b), abs=1e-12)
