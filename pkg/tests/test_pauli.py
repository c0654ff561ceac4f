import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqcsym import pauli, qmath
from mbqcsym.pauli import PauliOp, StabilizerError, StabilizerGroup

from oracles import clifford_level, pauli_matrix

paulis = st.builds(
    lambda letters, phase: PauliOp.from_str("+" + letters) * PauliOp((0,) * len(letters), (0,) * len(letters), phase),
    st.text(alphabet="IXYZ", min_size=3, max_size=3),
    st.integers(0, 3),
)


def test_x_times_z_is_minus_i_y():
    p = PauliOp.from_str("X") * PauliOp.from_str("Z")
    assert (p.x, p.z, p.phase) == ((1,), (1,), 3)
    assert str(p) == "-iY"


@pytest.mark.parametrize("text", ["+XZX", "-IYZ", "+iX_Z", "-iYYY", "ZZ"])
def test_string_round_trip(text):
    p = PauliOp.from_str(text)
    assert PauliOp.from_str(str(p)) == p


@pytest.mark.parametrize("bad", ["", "+Q", "XZ+", "--X"])
def test_bad_strings(bad):
    with pytest.raises(ValueError):
        PauliOp.from_str(bad)


def test_matrix_uses_y_equals_i_x_z():
    np.testing.assert_allclose(PauliOp.from_str("Y").matrix(), 1j * qmath.X @ qmath.Z)


def test_commuting_two_qubit_pair():
    a, b = PauliOp.from_str("XZ"), PauliOp.from_str("ZX")
    assert a * b == b * a
    assert a.commutes(b)


def test_size_mismatch():
    with pytest.raises(ValueError):
        PauliOp.from_str("X") * PauliOp.from_str("XX")


@settings(max_examples=200, deadline=None)
@given(paulis, paulis)
def test_multiply_matches_matrices(p, q):
    np.testing.assert_allclose((p * q).matrix(), p.matrix() @ q.matrix(), atol=1e-12)
    ab = p.matrix() @ q.matrix()
    assert p.commutes(q) == np.allclose(ab, q.matrix() @ p.matrix())


@settings(max_examples=200, deadline=None)
@given(paulis, paulis, paulis)
def test_multiply_associative(p, q, r):
    assert (p * q) * r == p * (q * r)


@settings(max_examples=50, deadline=None)
@given(paulis)
def test_inverse(p):
    assert p * p.inverse() == PauliOp.identity(3)


@settings(max_examples=50, deadline=None)
@given(paulis)
def test_hadamard_dual_matches_conjugation(p):
    h = qmath.kron(qmath.H, qmath.H, qmath.H)
    np.testing.assert_allclose(p.hadamard_dual().matrix(), h @ p.matrix() @ h, atol=1e-12)


def _group(*labels, n=None):
    ops = tuple(PauliOp.from_str(s) for s in labels)
    return StabilizerGroup(n if n is not None else ops[0].n, ops)


def test_canonical_order_independent():
    assert pauli.canonicalize(_group("XX", "ZZ")) == pauli.canonicalize(_group("ZZ", "XX"))


def test_canonical_product_replacement():
    xx, zz = PauliOp.from_str("XX"), PauliOp.from_str("ZZ")
    g2 = StabilizerGroup(2, (xx, xx * zz))
    assert pauli.canonicalize(g2) == pauli.canonicalize(_group("XX", "ZZ"))


def test_canonical_empty():
    assert pauli.canonicalize(StabilizerGroup(3, ())) == ()


def test_canonical_is_idempotent():
    g = _group("XZI", "ZXZ", "IZX")
    c = pauli.canonicalize(g)
    assert pauli.canonicalize(StabilizerGroup(3, c)) == c


def test_canonical_distinguishes_sign():
    assert not pauli.groups_equal(_group("XX", "ZZ"), _group("XX", "-ZZ"))


@pytest.mark.parametrize(
    "labels,err",
    [(("XI", "ZI"), "anticommute"), (("XX", "XX"), "independent"), (("+iXX",), "Hermitian")],
)
def test_invalid_groups(labels, err):
    with pytest.raises(StabilizerError, match=err):
        _group(*labels)


def test_membership_sign():
    g = _group("XX", "ZZ")
    assert pauli.membership_sign(g, PauliOp.from_str("-YY")) == 1
    assert pauli.membership_sign(g, PauliOp.from_str("YY")) == -1
    assert pauli.membership_sign(g, PauliOp.from_str("XI")) is None


def test_text_round_trip():
    g = _group("+XZX", "-ZIZ")
    assert StabilizerGroup.from_text(g.to_text()) == g


def test_path_graph_generators():
    adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    g = pauli.graph_state_group(adj)
    assert [str(p) for p in g.generators] == ["+XZI", "+ZXZ", "+IZX"]
    assert g.stabilizes(pauli.graph_state(adj))


def test_single_vertex():
    g = pauli.graph_state_group(np.zeros((1, 1), dtype=int))
    assert [str(p) for p in g.generators] == ["+X"]


def test_four_cycle_state_matches_cz_construction():
    adj = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]])
    g = pauli.graph_state_group(adj)
    assert all(p.weight == 3 for p in g.generators)
    # independent CZ construction: phases (-1)^{sum of edge products} on |+>^n
    vec = np.array([
        (-1) ** sum(b[i] * b[j] for i, j in [(0, 1), (1, 2), (2, 3), (3, 0)])
        for b in itertools.product((0, 1), repeat=4)
    ], dtype=complex)
    assert qmath.fidelity(g.state(), qmath.DenseState.from_vector(vec)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "adj",
    [np.array([[0, 1], [0, 0]]), np.array([[1, 0], [0, 0]]), np.array([[0, 2], [2, 0]])],
)
def test_graph_rejects_bad_adjacency(adj):
    with pytest.raises(ValueError):
        pauli.graph_state_group(adj)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_random_graphs_have_unique_state(n, seed):
    r = np.random.default_rng(seed)
    upper = np.triu(r.integers(0, 2, size=(n, n)), 1)
    adj = upper + upper.T
    g = pauli.graph_state_group(adj)
    assert g.rank == n
    # joint +1 eigenspace: trace of the projector prod (1+K)/2
    proj = np.eye(2**n, dtype=complex)
    for k in g.generators:
        proj = proj @ (np.eye(2**n) + k.matrix()) / 2
    assert np.trace(proj).real == pytest.approx(1.0)
    assert g.stabilizes(pauli.graph_state(adj))


def test_relabel():
    p = PauliOp.from_str("XZ")
    assert str(pauli.relabel(p, [2, 0], 3)) == "+ZIX"


# ---------------------------------------------------------------------------
# Clifford hierarchy


@pytest.mark.parametrize(
    "name,level",
    [("X", 1), ("Y", 1), ("Z", 1), ("H", 2), ("S", 2), ("CZ", 2), ("CNOT", 2), ("T", 3), ("CCZ", 3)],
)
def test_ch_levels(name, level):
    u = getattr(qmath, name)
    got = pauli.ch_level(u).level
    assert got == level
    assert clifford_level(u) == level


def test_sqrt_t_is_above_three():
    u = np.diag([1, np.exp(1j * np.pi / 8)])
    assert pauli.ch_level(u).level == "above_kmax"


def test_ch_rejects_non_unitary_and_large():
    with pytest.raises(ValueError):
        pauli.ch_level(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        pauli.ch_level(np.eye(16))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["X", "H", "S", "T", "CZ"]), st.floats(-3, 3), st.sampled_from(["I", "X", "Y", "Z"]))
def test_ch_invariances(name, phi, p):
    u = getattr(qmath, name)
    n = int(np.log2(u.shape[0]))
    pm = pauli_matrix(p * n)
    level = pauli.ch_level(u).level
    assert pauli.ch_level(np.exp(1j * phi) * u).level == level
    assert pauli.ch_level(pm @ u @ pm).level == level
