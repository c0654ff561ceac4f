"""Dense statevector substrate used as the ground-truth oracle by every other module.

Ordering convention: site 0 is the most significant digit of the flat amplitude
index, so ``amplitudes.reshape(site_dims)[i0, i1, ...]`` is the amplitude of
``|i0 i1 ...>``.  Nothing else in the package relies on a different ordering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
FORCED_FLOOR = 1e-12


class DimensionError(ValueError):
    """Raised when register shapes do not line up."""


class ZeroProbabilityError(ValueError):
    """Raised when a forced measurement outcome has (numerically) zero probability."""


# ---------------------------------------------------------------------------
# gate matrices

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
T = np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
CCZ = np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)

Z_BASIS = np.eye(2, dtype=complex)
X_BASIS = H.copy()


def rx(theta: float) -> np.ndarray:
    """``exp(-i theta X / 2)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    """``exp(-i theta Z / 2)``."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def expi(theta: float, pauli: np.ndarray) -> np.ndarray:
    """``exp(i theta P)`` for an involutory ``P``."""
    return math.cos(theta) * np.eye(pauli.shape[0]) + 1j * math.sin(theta) * pauli


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < tol)


def check_unitary(u: np.ndarray, name: str = "matrix") -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError(f"{name} is not unitary within {UNITARY_TOL}")
    return u


def phase_align(a: np.ndarray, b: np.ndarray) -> complex:
    """Return the unit phase ``w`` minimising ``|a - w b|``."""
    ip = np.vdot(b, a)
    if abs(ip) < 1e-300:
        return 1.0 + 0j
    return ip / abs(ip)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    return bool(np.abs(a - phase_align(a, b) * b).max() < tol)


def proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """True if ``a = c b`` for some nonzero complex ``c`` (after Frobenius normalisation)."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-300 or nb < 1e-300:
        return False
    return equal_up_to_phase(a / na, b / nb, tol)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class DenseState:
    """Normalised amplitude vector over an ordered register of sites.

    Registers are homogeneous: all qubits, or (for the spin-1 AKLT chain) all
    qutrits.
    """

    site_dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.site_dims)
        if any(d not in (2, 3) for d in dims):
            raise DimensionError(f"site dimensions must be 2 or 3, got {dims}")
        if len(set(dims)) > 1:
            raise DimensionError("mixed qubit/qutrit registers are not supported")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"amplitude length {amps.size} does not match dims {dims}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm {norm!r})")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, site_dims: Optional[Sequence[int]] = None) -> "DenseState":
        """Build a state from an unnormalised vector (qubits unless ``site_dims`` given)."""
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if site_dims is None:
            n = int(round(math.log2(vec.size)))
            if 2**n != vec.size:
                raise DimensionError(f"length {vec.size} is not a power of two")
            site_dims = (2,) * n
        norm = np.linalg.norm(vec)
        if norm < 1e-300:
            raise ValueError("cannot normalise the zero vector")
        return cls(tuple(site_dims), vec / norm)

    @classmethod
    def product(cls, *kets) -> "DenseState":
        vec = np.ones(1, dtype=complex)
        dims = []
        for k in kets:
            k = np.asarray(k, dtype=complex).reshape(-1)
            vec = np.kron(vec, k)
            dims.append(k.size)
        return cls.from_vector(vec, dims)

    @classmethod
    def zeros(cls, n: int) -> "DenseState":
        return cls.product(*([KET0] * n))

    @classmethod
    def plus(cls, n: int) -> "DenseState":
        return cls.product(*([KET_PLUS] * n))

    @property
    def num_sites(self) -> int:
        return len(self.site_dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.site_dims)

    def kron(self, other: "DenseState") -> "DenseState":
        return DenseState(
            self.site_dims + other.site_dims,
            np.kron(self.amplitudes, other.amplitudes),
        )

    def expectation(self, op: np.ndarray, sites: Sequence[int]) -> complex:
        """``<psi| op_{sites} |psi>`` for an operator acting on ``sites`` (in the given order)."""
        phi = _apply_raw(self.amplitudes, self.site_dims, op, sites)
        return complex(np.vdot(self.amplitudes, phi))

    def reduced_density(self, sites: Sequence[int]) -> np.ndarray:
        sites = list(sites)
        rest = [k for k in range(self.num_sites) if k not in sites]
        t = np.transpose(self.tensor(), sites + rest)
        d = math.prod(self.site_dims[k] for k in sites)
        m = t.reshape(d, -1)
        return m @ m.conj().T


def _apply_raw(vec: np.ndarray, dims: Sequence[int], op: np.ndarray, sites: Sequence[int]) -> np.ndarray:
    sites = list(sites)
    if len(set(sites)) != len(sites):
        raise DimensionError(f"repeated sites {sites}")
    n = len(dims)
    if any(not 0 <= s < n for s in sites):
        raise DimensionError(f"site index out of range in {sites}")
    k = math.prod(dims[s] for s in sites)
    op = np.asarray(op, dtype=complex)
    if op.shape != (k, k):
        raise DimensionError(f"operator shape {op.shape} does not act on sites {sites}")
    t = np.asarray(vec).reshape(dims)
    op_t = op.reshape([dims[s] for s in sites] * 2)
    m = len(sites)
    t = np.tensordot(op_t, t, axes=(list(range(m, 2 * m)), sites))
    # tensordot puts the acted-on axes first; move them back
    rest = [s for s in range(n) if s not in sites]
    order = sites + rest
    inv = np.argsort(order)
    return np.transpose(t, inv).reshape(-1)


def apply_unitary(state: DenseState, u: np.ndarray, sites: Sequence[int]) -> DenseState:
    u = check_unitary(u, "operator")
    out = _apply_raw(state.amplitudes, state.site_dims, u, sites)
    return DenseState.from_vector(out, state.site_dims)


# ---------------------------------------------------------------------------
# circuits

GATE_ARITY = {
    "H": 1, "S": 1, "T": 1, "X": 1, "Y": 1, "Z": 1, "RX": 1, "RZ": 1,
    "CZ": 2, "CNOT": 2, "SWAP": 2, "CCZ": 3,
}
ROTATIONS = {"RX", "RZ"}


@dataclass(frozen=True)
class Gate:
    kind: str
    wires: tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        kind = self.kind.upper()
        if kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        wires = tuple(int(w) for w in self.wires)
        if len(wires) != GATE_ARITY[kind] or len(set(wires)) != len(wires):
            raise ValueError(f"{kind} needs {GATE_ARITY[kind]} distinct wires, got {wires}")
        if kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{kind} takes no angle")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", wires)

    def matrix(self) -> np.ndarray:
        k = self.kind
        if k == "RX":
            return rx(self.angle)
        if k == "RZ":
            return rz(self.angle)
        return {
            "H": H, "S": S, "T": T, "X": X, "Y": Y, "Z": Z,
            "CZ": CZ, "CNOT": CNOT, "SWAP": SWAP, "CCZ": CCZ,
        }[k]

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.wires)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)


@dataclass(frozen=True)
class CircuitIR:
    """Ordered gate list over ``num_wires`` qubits.

    Text form: one gate per line (``H 0``, ``RZ 0 0.785398``, ``CZ 0 1``,
    ``CCZ 0 1 2``).  A ``wires N`` line fixes the width; ``#`` starts a comment.
    Comment lines of the form ``# key: value`` are kept as metadata.
    """

    num_wires: int
    gates: tuple[Gate, ...] = ()
    metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        gates = tuple(self.gates)
        for g in gates:
            if any(not 0 <= w < self.num_wires for w in g.wires):
                raise ValueError(f"gate {g.to_text()!r} out of range for {self.num_wires} wires")
        object.__setattr__(self, "gates", gates)

    def unitary(self) -> np.ndarray:
        dim = 2**self.num_wires
        u = np.eye(dim, dtype=complex)
        for g in self.gates:
            u = _apply_raw_matrix(u, self.num_wires, g.matrix(), g.wires)
        return u

    def to_text(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata]
        lines.append(f"wires {self.num_wires}")
        lines.extend(g.to_text() for g in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "CircuitIR":
        gates: list[Gate] = []
        meta: list[tuple[str, str]] = []
        width = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    meta.append((k.strip(), v.strip()))
                continue
            tok = line.split()
            head = tok[0].upper()
            try:
                if head == "WIRES":
                    width = int(tok[1])
                elif head in ROTATIONS:
                    gates.append(Gate(head, tuple(int(t) for t in tok[1:-1]), float(tok[-1])))
                else:
                    gates.append(Gate(head, tuple(int(t) for t in tok[1:])))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
        if width is None:
            width = 1 + max((w for g in gates for w in g.wires), default=-1)
        return cls(width, tuple(gates), tuple(meta))

    def meta(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for k, v in self.metadata:
            if k == key:
                return v
        return default


def _apply_raw_matrix(u: np.ndarray, n: int, op: np.ndarray, wires: Sequence[int]) -> np.ndarray:
    cols = [_apply_raw(u[:, j], (2,) * n, op, wires) for j in range(u.shape[1])]
    return np.stack(cols, axis=1)


def apply_circuit(circuit: CircuitIR, state: DenseState) -> DenseState:
    if circuit.num_wires != state.num_sites:
        raise DimensionError(
            f"circuit has {circuit.num_wires} wires, state has {state.num_sites} sites"
        )
    if any(d != 2 for d in state.site_dims):
        raise DimensionError("circuits act on qubit registers only")
    vec = state.amplitudes
    for g in circuit.gates:
        vec = _apply_raw(vec, state.site_dims, g.matrix(), g.wires)
    return DenseState.from_vector(vec, state.site_dims)


# ---------------------------------------------------------------------------
# measurement


@dataclass(frozen=True)
class MeasurementResult:
    outcome: int
    probability: float
    post_state: Optional[DenseState]


def measure(
    state: DenseState,
    site: int,
    basis: np.ndarray,
    forced_outcome: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    remove: bool = True,
) -> MeasurementResult:
    """Projective measurement of one site.

    ``basis`` holds the measurement vectors as columns; outcome ``o`` projects
    onto column ``o``.  With ``remove=True`` the measured site is dropped from
    the post-measurement register, otherwise it is kept in the basis state.
    When nothing is left after removal the post state is ``None``.
    """
    basis = np.asarray(basis, dtype=complex)
    d = state.site_dims[site]
    if basis.shape != (d, d):
        raise DimensionError(f"basis shape {basis.shape} does not match site dimension {d}")
    check_unitary(basis, "measurement basis")
    t = np.moveaxis(state.tensor(), site, 0).reshape(d, -1)
    branches = basis.conj().T @ t
    probs = np.real(np.einsum("ij,ij->i", branches.conj(), branches))
    if forced_outcome is None:
        if rng is None:
            raise ValueError("need either forced_outcome or rng")
        p = np.clip(probs, 0, None)
        outcome = int(rng.choice(d, p=p / p.sum()))
    else:
        outcome = int(forced_outcome)
        if not 0 <= outcome < d:
            raise ValueError(f"outcome {outcome} out of range")
        if probs[outcome] <= FORCED_FLOOR:
            raise ZeroProbabilityError(
                f"outcome {outcome} on site {site} has probability {probs[outcome]:.3e}"
            )
    prob = float(probs[outcome])
    rest_dims = tuple(dd for k, dd in enumerate(state.site_dims) if k != site)
    vec = branches[outcome] / math.sqrt(prob)
    if remove:
        post = DenseState(rest_dims, vec) if rest_dims else None
    else:
        full = np.tensordot(basis[:, outcome], vec.reshape(rest_dims or (1,)), axes=0)
        full = np.moveaxis(full.reshape((d,) + rest_dims), 0, site)
        post = DenseState(state.site_dims, full.reshape(-1))
    return MeasurementResult(outcome, prob, post)


def fidelity(a: DenseState, b: DenseState) -> float:
    if a.site_dims != b.site_dims:
        raise DimensionError(f"site structures differ: {a.site_dims} vs {b.site_dims}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def random_state(n: int, rng: np.random.Generator, dim: int = 2) -> DenseState:
    vec = rng.normal(size=dim**n) + 1j * rng.normal(size=dim**n)
    return DenseState.from_vector(vec, (dim,) * n)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
