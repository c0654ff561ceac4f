"""Brute-force references shared by the tests; deliberately naive."""
import itertools

import numpy as np


def embed(op, sites, n, d=2):
    """Full matrix of ``op`` acting on ``sites`` of an n-site register, by index loops."""
    op = np.asarray(op, dtype=complex)
    k = len(sites)
    dim = d**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in itertools.product(range(d), repeat=n):
        sub_in = tuple(col[s] for s in sites)
        j_in = int(np.ravel_multi_index(sub_in, (d,) * k))
        for j_out, sub_out in enumerate(itertools.product(range(d), repeat=k)):
            amp = op[j_out, j_in]
            if amp == 0:
                continue
            row = list(col)
            for s, v in zip(sites, sub_out):
                row[s] = v
            full[np.ravel_multi_index(row, (d,) * n), np.ravel_multi_index(col, (d,) * n)] += amp
    return full


def pauli_matrix(label):
    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    out = np.eye(1, dtype=complex)
    for c in label:
        out = np.kron(out, mats[c])
    return out


def mps_amplitudes(ops, left, right, n):
    """Chain amplitudes by explicit enumeration of every configuration."""
    d = len(ops)
    amps = []
    for cfg in itertools.product(range(d), repeat=n):
        m = np.eye(ops[0].shape[0], dtype=complex)
        for i in cfg:
            m = m @ ops[i]
        amps.append(np.conj(left) @ m @ right)
    return np.array(amps)


def overlap_fidelity(a, b):
    a = np.asarray(a) / np.linalg.norm(a)
    b = np.asarray(b) / np.linalg.norm(b)
    return abs(np.vdot(a, b)) ** 2


def _pauli_table(n):
    labels = ["".join(t) for t in itertools.product("IXYZ", repeat=n)]
    return np.array([pauli_matrix(s) for s in labels])


def is_phased_pauli(m, table):
    """True when ``m`` equals one Pauli string times a unit phase."""
    dim = m.shape[0]
    coeffs = np.abs(np.einsum("kab,ab->k", table.conj(), m)) / dim
    big = coeffs > 1e-9
    return big.sum() == 1 and abs(coeffs[big][0] - 1) < 1e-9


def clifford_level(u):
    """Level 1, 2 or 3 of ``u`` by conjugating every Pauli string, else None."""
    u = np.asarray(u, dtype=complex)
    n = int(round(np.log2(u.shape[0])))
    table = _pauli_table(n)
    if is_phased_pauli(u, table):
        return 1
    conj = [u @ p @ u.conj().T for p in table[1:]]
    if all(is_phased_pauli(c, table) for c in conj):
        return 2
    if all(all(is_phased_pauli(c @ p @ c.conj().T, table) for p in table[1:]) for c in conj):
        return 3
    return None
