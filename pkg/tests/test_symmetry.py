import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqcsym import mps, qmath, symmetry
from mbqcsym.mps import SPIN1, spin1_rotation
from mbqcsym.symmetry import SymmetryAction

from oracles import pauli_matrix


def _act(label, u, v, blocking=1, right=None):
    return SymmetryAction(label, u, v, right, blocking)


def test_ghz_z_to_x():
    assert symmetry.global_residual(mps.ghz_tensor(), _act("Z", qmath.Z, qmath.X)) < 1e-12


def test_ghz_wrong_virtual_fails():
    assert symmetry.global_residual(mps.ghz_tensor(), _act("Z", qmath.Z, qmath.Z)) > 0.5


@pytest.mark.parametrize("label,virt", [("ZI", "Z"), ("IZ", "X"), ("ZZ", "Y")])
def test_cluster_blocked_z2xz2(label, virt):
    act = _act(label, pauli_matrix(label), pauli_matrix(virt), blocking=2)
    assert symmetry.global_residual(mps.cluster_tensor(), act) < 1e-12


def test_blocked_ops_against_products():
    t = mps.cluster_tensor()
    blocked = symmetry.blocked_ops(t, 2)
    for i in range(2):
        for j in range(2):
            np.testing.assert_allclose(blocked[2 * i + j], t.ops[i] @ t.ops[j], atol=1e-15)


@pytest.mark.parametrize("axis", ["X", "Y", "Z"])
@pytest.mark.parametrize("theta", [0.3, 1.1])
def test_aklt_so3(axis, theta):
    u = spin1_rotation(axis, theta)
    v = qmath.expi(theta / 2, qmath.PAULIS[axis])
    assert symmetry.global_residual(mps.aklt_tensor(), _act(axis, u, v)) < 1e-12


def test_aklt_rotation_matches_series():
    g = SPIN1["Y"]
    series = sum(np.linalg.matrix_power(0.7j * g, k) / math.factorial(k) for k in range(30))
    np.testing.assert_allclose(spin1_rotation("Y", 0.7), series, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(-math.pi, math.pi))
def test_global_residual_phase_invariant(phi):
    t = mps.ghz_tensor()
    a = _act("Z", qmath.Z, qmath.X)
    b = _act("Z", qmath.Z, cmath.exp(1j * phi) * qmath.X)
    assert symmetry.global_residual(t, b) == pytest.approx(symmetry.global_residual(t, a), abs=1e-14)


def test_composition_closes():
    t = mps.cluster_tensor()
    a = _act("ZI", pauli_matrix("ZI"), qmath.Z, 2)
    b = _act("IZ", pauli_matrix("IZ"), qmath.X, 2)
    assert symmetry.global_residual(t, a.compose(b)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(["X", "Y", "Z"]), st.sampled_from(["X", "Y", "Z"]))
def test_aklt_composition_closes(t1, t2, a1, a2):
    t = mps.aklt_tensor()
    g = _act(a1, spin1_rotation(a1, t1), qmath.expi(t1 / 2, qmath.PAULIS[a1]))
    h = _act(a2, spin1_rotation(a2, t2), qmath.expi(t2 / 2, qmath.PAULIS[a2]))
    assert symmetry.global_residual(t, g.compose(h)) < 1e-10


def test_action_validation():
    with pytest.raises(ValueError):
        _act("bad", np.ones((2, 2)), qmath.X)
    with pytest.raises(ValueError):
        _act("Z", qmath.Z, qmath.X, blocking=3)
    with pytest.raises(ValueError):
        symmetry.global_residual(mps.ghz_tensor(), _act("Z", qmath.Z, np.eye(3)))
    with pytest.raises(ValueError):
        symmetry.global_residual(mps.ghz_tensor(), _act("Z", np.eye(3), qmath.X))


# ---------------------------------------------------------------------------
# one-leg (gauge) actions


@pytest.mark.parametrize("theta", [0.0, math.pi / 5, 1.3])
def test_cluster_gauge_rotation(theta):
    r = symmetry.gauge_residual(
        mps.cluster_tensor(), qmath.expi(theta, qmath.X), "right", qmath.expi(theta, qmath.Z)
    )
    assert r < 1e-12


def test_gauge_zero_angle():
    assert symmetry.gauge_residual(mps.ghz_tensor(), np.eye(2), "left", np.eye(2)) < 1e-15


def test_ghz_has_one_leg_x_rotation():
    # A_i = Z^i, so e^{i t X} mixes 1 and Z into A_i e^{i t Z}
    t = math.pi / 4
    r = symmetry.gauge_residual(mps.ghz_tensor(), qmath.expi(t, qmath.X), "right", qmath.expi(t, qmath.Z))
    assert r < 1e-12


def test_ghz_has_no_one_leg_z_rotation():
    r = symmetry.gauge_residual(mps.ghz_tensor(), qmath.expi(math.pi / 4, qmath.Z), "right")
    assert r > 0.5


def test_gauge_fit_recovers_known_action():
    assert symmetry.gauge_residual(mps.cluster_tensor(), qmath.expi(0.4, qmath.X), "right") < 1e-12
    # H e^{itZ} = e^{itX} H, so the same rotation also has a left-leg form
    r = symmetry.gauge_residual(mps.cluster_tensor(), qmath.expi(0.4, qmath.X), "left", qmath.expi(0.4, qmath.X))
    assert r < 1e-12


def test_gauge_bad_side():
    with pytest.raises(ValueError):
        symmetry.gauge_residual(mps.ghz_tensor(), qmath.X, "up")


# ---------------------------------------------------------------------------
# projective phases


@pytest.mark.parametrize(
    "a,b,w",
    [("X", "Z", -1), ("I", "Y", 1), ("X", "X", 1), ("Y", "Z", -1)],
)
def test_projective_phase(a, b, w):
    assert symmetry.projective_phase(pauli_matrix(a), pauli_matrix(b)) == pytest.approx(w)


def test_projective_phase_rejects_non_scalar():
    with pytest.raises(symmetry.ProjectivePhaseError):
        symmetry.projective_phase(qmath.H, qmath.Z)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from("IXYZ"), st.sampled_from("IXYZ"), st.floats(-3, 3))
def test_projective_phase_antisymmetric(a, b, phi):
    va = cmath.exp(1j * phi) * pauli_matrix(a)
    vb = pauli_matrix(b)
    w1 = symmetry.projective_phase(va, vb)
    w2 = symmetry.projective_phase(vb, va)
    assert w1 == pytest.approx(np.conj(w2))


def test_discover_cluster_and_ghz():
    cl = {a.label: a for a in symmetry.discover_actions(mps.cluster_tensor(), 2)}
    assert set(cl) == {"ZI", "IZ", "ZZ"}
    assert symmetry.projective_phase(cl["ZI"].virtual_left, cl["IZ"].virtual_left) == pytest.approx(-1)
    ghz = {a.label: a for a in symmetry.discover_actions(mps.ghz_tensor(), 2)}
    assert {"XX", "ZZ"} <= set(ghz)
    assert symmetry.projective_phase(ghz["XX"].virtual_left, ghz["ZZ"].virtual_left) == pytest.approx(1)


def test_discover_rejects_qutrits():
    with pytest.raises(ValueError):
        symmetry.discover_actions(mps.aklt_tensor())


def test_find_action():
    assert symmetry.find_action(mps.ghz_tensor(), "Z") is not None
    assert symmetry.find_action(mps.ghz_tensor(), "X") is None


def test_symmetry_report_json():
    rep = symmetry.symmetry_report(mps.cluster_tensor())
    assert all(r < 1e-12 for _, r in rep.actions)
    assert all(re == pytest.approx(-1) for _, _, re, _ in rep.projective_phases)
    assert '"tensor": "cluster"' in rep.to_json()


# ---------------------------------------------------------------------------
# stabilizers from two-sided actions


def test_cluster_stabilizers():
    act = _act("Z", qmath.Z, qmath.Z, right=qmath.X)
    rep = symmetry.symmetry_stabilizer_check(mps.cluster_tensor(), act, 6)
    assert rep.holds
    assert len(rep.expectations) == 4
    # the flanking operators realize X on both neighbours
    assert qmath.equal_up_to_phase(rep.left_op, qmath.X)
    assert qmath.equal_up_to_phase(rep.right_op, qmath.X)


def test_ghz_ising_term():
    act = _act("X", qmath.X, qmath.Z, right=np.eye(2))
    rep = symmetry.symmetry_stabilizer_check(mps.ghz_tensor(), act, 6)
    assert rep.holds
    assert rep.worst_expectation == pytest.approx(1, abs=1e-10)


def test_product_trivial():
    act = _act("I", np.eye(2), np.eye(1), right=np.eye(1))
    assert symmetry.symmetry_stabilizer_check(mps.product_tensor(), act, 4).holds


def test_stabilizer_check_fails_on_wrong_relation():
    act = _act("Z", qmath.Z, qmath.X, right=qmath.X)
    assert not symmetry.symmetry_stabilizer_check(mps.cluster_tensor(), act, 6).holds


def test_stabilizer_check_length_limits():
    act = _act("Z", qmath.Z, qmath.Z, right=qmath.X)
    with pytest.raises(ValueError):
        symmetry.symmetry_stabilizer_check(mps.cluster_tensor(), act, 11)
