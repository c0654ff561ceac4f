import json

import numpy as np
import pytest

from mbqcsym import gauging, mps, pauli
from mbqcsym.gauging import Hamiltonian
from mbqcsym.pauli import PauliOp


def _projector_trace(gens, n):
    """Dimension of the joint +1 eigenspace, from dense matrices."""
    proj = np.eye(2**n, dtype=complex)
    for g in gens:
        proj = proj @ (np.eye(2**n) + g.matrix()) / 2
    return float(np.trace(proj).real)


def test_ising_periodic_terms():
    h = gauging.spin_chain_model("ising", 4, True)
    assert [str(p) for p in h.ops] == ["+XXII", "+IXXI", "+IIXX", "+XIIX"]
    assert all(c == -1 for c, _ in h.terms)


def test_cluster_open_bulk_terms():
    h = gauging.spin_chain_model("cluster", 5, False)
    assert [str(p) for p in h.ops] == ["+XZXII", "+IXZXI", "+IIXZX"]


@pytest.mark.parametrize("n", [3, 4, 7])
def test_cluster_terms_commute(n):
    assert gauging.spin_chain_model("cluster", n, True).commuting()


@pytest.mark.parametrize("kind,n", [("ising", 2), ("heisenberg", 5)])
def test_spin_chain_errors(kind, n):
    with pytest.raises(ValueError):
        gauging.spin_chain_model(kind, n)


def test_hamiltonian_validation():
    with pytest.raises(ValueError):
        Hamiltonian(())
    with pytest.raises(ValueError):
        Hamiltonian(((1.0, PauliOp.from_str("X")), (1.0, PauliOp.from_str("XX"))))
    with pytest.raises(ValueError):
        Hamiltonian(((float("inf"), PauliOp.from_str("X")),))


def test_cluster_energy_is_minimal():
    n = 6
    h = gauging.spin_chain_model("cluster", n, True)
    state = mps.contract(mps.cluster_tensor(), n, "periodic")
    dense = sum(c * p.matrix() for c, p in h.terms)
    assert h.energy(state) == pytest.approx(np.linalg.eigvalsh(dense)[0], abs=1e-10)


def test_gauge_1d():
    rep = gauging.gauge_1d(6)
    assert rep.ok
    assert len(rep.ghz_check) == 6 and len(rep.cluster_check) == 6
    assert rep.symmetry_map["global_z_commutes_with_cluster"]
    assert json.loads(json.dumps(rep.to_dict()))["ok"]


def test_gauge_1d_odd_ring_breaks_sublattices():
    rep = gauging.gauge_1d(5)
    assert not rep.symmetry_map["even_sublattice_commutes"]


def test_gauge_1d_too_short():
    with pytest.raises(ValueError):
        gauging.gauge_1d(3)


# ---------------------------------------------------------------------------
# toric code


@pytest.mark.parametrize("L,qubits,rank", [(2, 8, 6), (3, 18, 16)])
def test_toric_counts(L, qubits, rank):
    lat, group = gauging.toric_code(L)
    assert lat.num_qubits == qubits
    assert group.rank == rank
    assert 2 ** (qubits - group.rank) == 4


def test_toric_degeneracy_dense():
    lat, group = gauging.toric_code(2)
    assert _projector_trace(group.generators, lat.num_qubits) == pytest.approx(4)


@pytest.mark.parametrize("L", [2, 3, 4])
def test_toric_cells_commute_and_obey_relations(L):
    lat, _ = gauging.toric_code(L)
    stars, plaqs = gauging.toric_cells(lat)
    for s in stars:
        assert all(p.weight == 4 for p in plaqs)
        assert all(s.commutes(p) for p in plaqs)
    n = lat.num_qubits
    assert pauli.product(stars, n) == PauliOp.identity(n)
    assert pauli.product(plaqs, n) == PauliOp.identity(n)


def test_toric_loops_are_symmetries_not_stabilizers():
    lat, group = gauging.toric_code(2)
    reports = gauging.line_symmetry_report(group, lat)
    assert reports
    for r in reports:
        assert r.z_line_commutes and r.x_line_commutes
        assert not r.z_line_in_group


def test_toric_too_small():
    with pytest.raises(ValueError):
        gauging.toric_code(1)


def test_lattice_registry_bijection():
    lat, _, _ = gauging.gauge_2d(2)
    assert sorted(lat.registry.values()) == list(range(lat.num_qubits))
    data = json.loads(lat.to_json())
    assert len(data["registry"]) == 16


# ---------------------------------------------------------------------------
# two-stage gauging


@pytest.mark.parametrize("L", [2, 3])
def test_gauge_2d_full_rank(L):
    lat, group, log = gauging.gauge_2d(L)
    assert lat.num_qubits == 4 * L * L
    assert group.rank == 4 * L * L
    assert {r.stage for r in log} == {0, 1, 2}


def test_stage_one_plaquette_identity_from_log():
    L = 2
    lat, _, log = gauging.gauge_2d(L)
    n = lat.num_qubits
    added = {r.cell: PauliOp.from_str(r.after) for r in log if r.stage == 1 and r.action == "add"}
    checks = [r for r in log if r.stage == 1 and r.action == "check"]
    assert len(checks) == L * L
    for rec in checks:
        plaq = PauliOp.from_str(rec.before)
        # the surrounding gauge terms are exactly those whose edge lies in the plaquette
        edges = [q for q in range(2 * L * L) if plaq.z[q]]
        terms = [t for t in added.values() if any(t.z[e] for e in edges)]
        assert len(terms) == 4
        assert pauli.product(terms, n) == plaq


def test_stage_one_terms_commute():
    _, _, log = gauging.gauge_2d(3)
    ops = [PauliOp.from_str(r.after) for r in log if r.stage == 1 and r.action in ("add", "modify")]
    ops += [PauliOp.from_str(r.before) for r in log if r.stage == 1 and r.action == "check"]
    assert all(a.commutes(b) for a in ops for b in ops)


def test_identify_record_is_a_permutation():
    lat, _, log = gauging.gauge_2d(2)
    rec = [r for r in log if r.action == "identify"][0]
    assert sorted(json.loads(rec.after)) == list(range(lat.num_qubits))


@pytest.mark.parametrize("L", [2, 3])
def test_gauged_equals_cluster(L):
    assert gauging.gauged_matches_cluster(L)


def test_gauged_needs_hadamard_dual():
    lat, group, _ = gauging.gauge_2d(2)
    mapping = lat.grid_map()
    plain = pauli.StabilizerGroup(group.n, tuple(pauli.relabel(g, mapping, group.n) for g in group.generators))
    assert not pauli.groups_equal(plain, gauging.cluster_2d_group(4))


def test_dense_cross_check():
    assert gauging.dense_cross_check(2) >= 1 - 1e-9


@pytest.mark.parametrize("L2,count", [(4, 16), (6, 36)])
def test_cluster_2d_group(L2, count):
    g = gauging.cluster_2d_group(L2)
    assert len(g.generators) == count
    assert all(p.weight == 5 for p in g.generators)
    assert all(a.commutes(b) for a in g.generators for b in g.generators)


@pytest.mark.parametrize("L2", [2, 5])
def test_cluster_2d_group_rejects(L2):
    with pytest.raises(ValueError):
        gauging.cluster_2d_group(L2)


def test_torus_adjacency_degree():
    adj = gauging.torus_adjacency(4)
    assert (adj.sum(axis=0) == 4).all()
    assert (adj == adj.T).all()


@pytest.mark.parametrize("L", [2, 3])
def test_gauged_line_asymmetry(L):
    lat, group, _ = gauging.gauge_2d(L)
    reports = gauging.line_symmetry_report(group, lat)
    assert len(reports) == 4 * L
    for r in reports:
        assert r.z_line_in_group
        assert not r.x_line_commutes


def test_gauged_z_lines_dense():
    lat, group, _ = gauging.gauge_2d(2)
    probs = np.abs(group.state().amplitudes) ** 2
    bits = (np.arange(2**group.n)[:, None] >> (group.n - 1 - np.arange(group.n))) & 1
    for line in lat.lines():
        signs = (-1.0) ** bits[:, list(line.z_support)].sum(axis=1)
        assert probs @ signs == pytest.approx(1, abs=1e-9)


def test_gauge_2d_too_small():
    with pytest.raises(ValueError):
        gauging.gauge_2d(1)
