"""Phased Pauli operators in symplectic form, stabilizer groups, and the Clifford hierarchy.

A :class:`PauliOp` stores ``i**phase * P_0 ⊗ P_1 ⊗ ...`` with each ``P_k`` one
of the Hermitian labels ``I, X, Y, Z`` encoded by bits ``(x_k, z_k)``:
``(0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z``.  With this choice ``Y = iXZ``.

Text grammar (used for serialisation)::

    pauli  := sign letters
    sign   := "+" | "-" | "+i" | "-i"
    letters:= ("I" | "X" | "Y" | "Z")+

e.g. ``+XZX``, ``-iIYZ``.  A stabilizer group serialises to one generator per
line.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import qmath

_SIGNS = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_SIGN_PARSE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PAULI_RE = re.compile(r"^\s*([+-]?i?)([IXYZ_]+)\s*$")
_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTER.items()}
_BITS["_"] = (0, 0)


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent of ``i`` picked up by the product of two single-qubit Hermitian Paulis."""
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1 and z1 == 0:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliOp:
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self) -> None:
        x = tuple(int(b) & 1 for b in self.x)
        z = tuple(int(b) & 1 for b in self.z)
        if len(x) != len(z):
            raise ValueError("x and z bit strings must have equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls((0,) * n, (0,) * n)

    @classmethod
    def from_str(cls, s: str) -> "PauliOp":
        m = _PAULI_RE.match(s)
        if not m:
            raise ValueError(f"cannot parse Pauli string {s!r}")
        bits = [_BITS[c] for c in m.group(2)]
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits), _SIGN_PARSE[m.group(1)])

    @classmethod
    def single(cls, n: int, site: int, label: str) -> "PauliOp":
        return cls.from_sites(n, {site: label})

    @classmethod
    def from_sites(cls, n: int, labels: dict, phase: int = 0) -> "PauliOp":
        x = [0] * n
        z = [0] * n
        for k, lab in labels.items():
            x[k], z[k] = _BITS[lab]
        return cls(tuple(x), tuple(z), phase)

    def __str__(self) -> str:
        return _SIGNS[self.phase] + "".join(_LETTER[b] for b in zip(self.x, self.z))

    def label(self, k: int) -> str:
        return _LETTER[(self.x[k], self.z[k])]

    @property
    def weight(self) -> int:
        return sum(1 for a, b in zip(self.x, self.z) if a or b)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def symplectic(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.uint8)

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def inverse(self) -> "PauliOp":
        # Hermitian letters square to I, so only the scalar needs inverting
        return PauliOp(self.x, self.z, -self.phase)

    def commutes(self, other: "PauliOp") -> bool:
        _check_size(self, other)
        s = sum(a * d + b * c for a, b, c, d in zip(self.x, self.z, other.x, other.z))
        return s % 2 == 0

    def matrix(self) -> np.ndarray:
        mats = [qmath.PAULIS[self.label(k)] for k in range(self.n)]
        return (1j**self.phase) * qmath.kron(*mats)

    def restricted(self, sites: Sequence[int]) -> "PauliOp":
        return PauliOp(tuple(self.x[s] for s in sites), tuple(self.z[s] for s in sites), self.phase)

    def embedded(self, n: int, sites: Sequence[int]) -> "PauliOp":
        x = [0] * n
        z = [0] * n
        for k, s in enumerate(sites):
            x[s], z[s] = self.x[k], self.z[k]
        return PauliOp(tuple(x), tuple(z), self.phase)

    def hadamard_dual(self) -> "PauliOp":
        """Conjugate by ``H`` on every qubit (swaps X and Z; each Y picks up a sign)."""
        ny = sum(1 for a, b in zip(self.x, self.z) if a and b)
        return PauliOp(self.z, self.x, self.phase + 2 * ny)


def _check_size(p: PauliOp, q: PauliOp) -> None:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n} qubits")


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    _check_size(p, q)
    phase = p.phase + q.phase + sum(_g(*args) for args in zip(p.x, p.z, q.x, q.z))
    x = tuple(a ^ b for a, b in zip(p.x, q.x))
    z = tuple(a ^ b for a, b in zip(p.z, q.z))
    return PauliOp(x, z, phase)


def product(ops: Iterable[PauliOp], n: Optional[int] = None) -> PauliOp:
    ops = list(ops)
    if not ops:
        if n is None:
            raise ValueError("empty product needs n")
        return PauliOp.identity(n)
    out = ops[0]
    for o in ops[1:]:
        out = out * o
    return out


def pauli_basis(n: int) -> list[PauliOp]:
    """All ``4**n`` Hermitian Paulis with phase +1."""
    out = []
    for bits in itertools.product(range(4), repeat=n):
        letters = "".join("IXYZ"[b] for b in bits)
        out.append(PauliOp.from_str("+" + letters))
    return out


# ---------------------------------------------------------------------------
# stabilizer groups


class StabilizerError(ValueError):
    """Generators that do not define a valid stabilizer group."""


def _gf2_rank(mat: np.ndarray) -> int:
    m = mat.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if m[r, c]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def symplectic_rank(ops: Sequence[PauliOp]) -> int:
    if not ops:
        return 0
    return _gf2_rank(np.array([p.symplectic() for p in ops], dtype=np.uint8))


@dataclass(frozen=True)
class StabilizerGroup:
    n: int
    generators: tuple[PauliOp, ...]

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.n != self.n:
                raise StabilizerError(f"generator {g} has {g.n} qubits, expected {self.n}")
            if not g.is_hermitian:
                raise StabilizerError(f"generator {g} is not Hermitian")
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes(b):
                raise StabilizerError(f"generators {a} and {b} anticommute")
        if symplectic_rank(gens) != len(gens):
            raise StabilizerError("generators are not independent")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def logical_dimension(self) -> int:
        return 2 ** (self.n - self.rank)

    def to_text(self) -> str:
        return "".join(f"{g}\n" for g in self.generators)

    @classmethod
    def from_text(cls, text: str) -> "StabilizerGroup":
        gens = [PauliOp.from_str(line) for line in text.splitlines() if line.strip()]
        if not gens:
            raise StabilizerError("empty text: pass n explicitly for the trivial group")
        return cls(gens[0].n, tuple(gens))

    def canonical(self) -> tuple[PauliOp, ...]:
        return canonicalize(self)

    def contains(self, p: PauliOp) -> bool:
        return membership_sign(self, p) == 1

    def stabilizes(self, state: qmath.DenseState, tol: float = 1e-9) -> bool:
        vec = state.amplitudes
        for g in self.generators:
            if np.abs(g.matrix() @ vec - vec).max() > tol:
                return False
        return True

    def state(self) -> qmath.DenseState:
        """Dense joint +1 eigenstate; requires full rank."""
        if self.rank != self.n:
            raise StabilizerError(f"group has rank {self.rank} < {self.n}; state not unique")
        return stabilizer_state(self)


def stabilizer_state(group: StabilizerGroup, seed: int = 0) -> qmath.DenseState:
    """Project a random vector onto the joint +1 eigenspace of a full-rank group."""
    rng = np.random.default_rng(seed)
    dims = (2,) * group.n
    vec = rng.normal(size=2**group.n) + 1j * rng.normal(size=2**group.n)
    for g in group.generators:
        vec = 0.5 * (vec + _apply_pauli(vec, g))
    return qmath.DenseState.from_vector(vec, dims)


def _apply_pauli(vec: np.ndarray, p: PauliOp) -> np.ndarray:
    """Apply a Pauli to a flat qubit vector without building the full matrix."""
    n = p.n
    idx = np.arange(2**n)
    xmask = int("".join(map(str, p.x)), 2) if n else 0
    zmask = int("".join(map(str, p.z)), 2) if n else 0
    ny = sum(1 for a, b in zip(p.x, p.z) if a and b)
    # P = i^phase prod_k (X^x Z^z)_k * i^{ny} since Y = i X Z
    src = idx ^ xmask
    par = _parity(src & zmask)
    coef = (1j ** (p.phase + ny)) * (1 - 2 * par)
    return vec[src] * coef


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.int64)
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v = v >> 1
    return out


def _rref(ops: Sequence[PauliOp], n: int) -> list[PauliOp]:
    rows = list(ops)
    pivot_row = 0
    for col in range(2 * n):
        def bit(p: PauliOp) -> int:
            return p.x[col] if col < n else p.z[col - n]

        piv = next((r for r in range(pivot_row, len(rows)) if bit(rows[r])), None)
        if piv is None:
            continue
        rows[pivot_row], rows[piv] = rows[piv], rows[pivot_row]
        for r in range(len(rows)):
            if r != pivot_row and bit(rows[r]):
                rows[r] = rows[r] * rows[pivot_row]
        pivot_row += 1
    return rows[:pivot_row]


def canonicalize(group: StabilizerGroup) -> tuple[PauliOp, ...]:
    """Reduced row-echelon generator list (x block before z block).

    Row operations are exact Pauli products, so the phases of the canonical
    generators are the phases those group elements actually carry.  Two groups
    are equal iff their canonical tuples are equal.
    """
    rows = _rref(group.generators, group.n)
    if len(rows) != group.rank:
        raise StabilizerError("dependent generators")
    return tuple(rows)


def membership_sign(group: StabilizerGroup, p: PauliOp) -> Optional[int]:
    """Return +1 if ``p`` is in the group, -1 if ``-p`` is, ``None`` if neither.

    Solves for ``p`` over GF(2) against the canonical form, then compares the
    phase of the reconstructed element.
    """
    if p.n != group.n:
        raise ValueError("size mismatch")
    canon = canonicalize(group)
    residual = PauliOp(p.x, p.z, 0)
    acc = PauliOp.identity(group.n)
    for row in canon:
        col = next(c for c in range(2 * group.n) if (row.x + row.z)[c])
        if (residual.x + residual.z)[col]:
            residual = residual * row
            acc = acc * row
    if any(residual.x) or any(residual.z):
        return None
    diff = (p.phase - acc.phase) % 4
    if diff == 0:
        return 1
    if diff == 2:
        return -1
    return None


def groups_equal(a: StabilizerGroup, b: StabilizerGroup) -> bool:
    return a.n == b.n and canonicalize(a) == canonicalize(b)


def relabel(p: PauliOp, mapping: Sequence[int], n: Optional[int] = None) -> PauliOp:
    """Move qubit ``k`` of ``p`` to position ``mapping[k]``."""
    n = p.n if n is None else n
    x = [0] * n
    z = [0] * n
    for k, t in enumerate(mapping):
        x[t], z[t] = p.x[k], p.z[k]
    return PauliOp(tuple(x), tuple(z), p.phase)


# ---------------------------------------------------------------------------
# graph states


def graph_state_group(adjacency) -> StabilizerGroup:
    """Generators ``K_a = X_a prod_{b in N(a)} Z_b`` of the graph state."""
    adj = np.asarray(adjacency, dtype=int)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(adj)):
        raise ValueError("adjacency must have zero diagonal")
    if np.any((adj != 0) & (adj != 1)):
        raise ValueError("adjacency must be a 0/1 matrix (no multi-edges)")
    n = adj.shape[0]
    gens = []
    for a in range(n):
        x = [0] * n
        x[a] = 1
        gens.append(PauliOp(tuple(x), tuple(int(v) for v in adj[a])))
    return StabilizerGroup(n, tuple(gens))


def graph_state(adjacency) -> qmath.DenseState:
    """CZ-on-|+...+> construction of the graph state (dense)."""
    adj = np.asarray(adjacency, dtype=int)
    n = adj.shape[0]
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    sign = np.zeros(2**n, dtype=int)
    for a, b in zip(*np.nonzero(np.triu(adj))):
        sign ^= bits[:, a] & bits[:, b]
    return qmath.DenseState.from_vector((-1.0) ** sign, (2,) * n)


# ---------------------------------------------------------------------------
# Clifford hierarchy

MEMBERSHIP_TOL = 1e-8
K_MAX = 3


@dataclass(frozen=True)
class CHLevel:
    level: Union[int, str]

    def __post_init__(self) -> None:
        if self.level != "above_kmax" and (not isinstance(self.level, int) or self.level < 1):
            raise ValueError(f"invalid level {self.level!r}")


def _pauli_generators(n: int) -> list[np.ndarray]:
    gens = []
    for k in range(n):
        for lab in "XZ":
            gens.append(PauliOp.single(n, k, lab).matrix())
    return gens


def as_phased_pauli(u: np.ndarray, tol: float = MEMBERSHIP_TOL) -> Optional[PauliOp]:
    """Return the PauliOp equal to ``u`` up to a global phase, or ``None``."""
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    n = int(round(math.log2(dim)))
    for p in pauli_basis(n):
        m = p.matrix()
        c = np.vdot(m, u) / dim
        if abs(abs(c) - 1) < tol and np.abs(u - c * m).max() < tol:
            return p
    return None


def _in_level(u: np.ndarray, k: int, gens: list[np.ndarray]) -> bool:
    if k == 1:
        return as_phased_pauli(u) is not None
    udag = u.conj().T
    return all(_in_level(u @ g @ udag, k - 1, gens) for g in gens)


def ch_level(u: np.ndarray, n: Optional[int] = None, k_max: int = K_MAX) -> CHLevel:
    """Smallest ``k <= k_max`` with ``u`` in the k-th level of the Clifford hierarchy.

    Membership is tested numerically by conjugating the ``2n`` single-qubit
    Pauli generators, which suffices for ``k <= 3`` because levels 1 and 2 are
    groups.
    """
    u = np.asarray(u, dtype=complex)
    if n is None:
        n = int(round(math.log2(u.shape[0])))
    if u.shape != (2**n, 2**n):
        raise ValueError(f"matrix shape {u.shape} does not act on {n} qubits")
    if n > 3:
        raise ValueError("ch_level supports at most 3 qubits")
    if not 1 <= k_max <= K_MAX:
        raise ValueError(f"k_max must be in 1..{K_MAX}")
    qmath.check_unitary(u, "gate")
    gens = _pauli_generators(n)
    for k in range(1, k_max + 1):
        if _in_level(u, k, gens):
            return CHLevel(k)
    return CHLevel("above_kmax")
