"""Matrix-product site tensors, contraction, sequential preparation and wire MBQC.

A :class:`SiteTensor` is the family ``{A_i}`` of bond-space operators.  The chain
amplitude for physical indices ``i_1 ... i_n`` is ``<L| A_{i_1} ... A_{i_n} |R>``
where ``<L|`` is the conjugate transpose of the left boundary vector.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import pauli, qmath
from .qmath import DenseState, DimensionError, ZeroProbabilityError
from .teleport import ByproductFrame, rotated_basis

CHANNEL_TOL = 1e-10
RANK_TOL = 1e-8
MAX_DENSE_DIM = 2**20
INJECTIVITY_KMAX = 6
FACTORIZATION_TOL = 1e-6
MAX_TILT = 0.05

TENSOR_DIR = Path(__file__).with_name("data") / "tensors"
NAMED_TENSORS = ("ghz", "cluster", "aklt", "toric", "product")


# ---------------------------------------------------------------------------
# spin-1 helpers

def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    return eps


# Cartesian spin-1 generators, (S_a)_{bc} = i eps_{abc}.  With this sign the
# physical rotation exp(i t S_a) acts on the bond as conjugation by exp(i t sigma_a / 2).
SPIN1 = {
    axis: (1j * _levi_civita()[k]).astype(complex)
    for k, axis in enumerate("XYZ")
}


def hermitian_exp(theta: float, gen: np.ndarray) -> np.ndarray:
    """``exp(i theta G)`` for Hermitian ``G``."""
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def spin1_rotation(axis: str, theta: float) -> np.ndarray:
    return hermitian_exp(theta, SPIN1[axis])


# ---------------------------------------------------------------------------
# tensors


@dataclass(frozen=True)
class SiteTensor:
    """Site tensor ``{A_i}`` with boundary vectors.

    ``ops`` has shape ``(phys_dim, bond_dim, bond_dim)``.  ``normalization`` is
    the scalar that turns the family into Kraus operators of a channel.
    """

    ops: np.ndarray = field(repr=False)
    normalization: float = 1.0
    left_boundary: Optional[np.ndarray] = field(default=None, repr=False)
    right_boundary: Optional[np.ndarray] = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        ops = np.asarray(self.ops, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionError(f"ops must have shape (d, D, D), got {ops.shape}")
        if ops.shape[0] not in (2, 3):
            raise DimensionError(f"physical dimension must be 2 or 3, got {ops.shape[0]}")
        bond = ops.shape[1]
        bounds = []
        for vec in (self.left_boundary, self.right_boundary):
            if vec is None:
                vec = np.ones(bond, dtype=complex) / math.sqrt(bond)
            vec = np.asarray(vec, dtype=complex).reshape(-1)
            if vec.size != bond:
                raise DimensionError(f"boundary length {vec.size} != bond dimension {bond}")
            if np.linalg.norm(vec) < 1e-12:
                raise ValueError("boundary vectors must be nonzero")
            vec = vec.copy()
            vec.setflags(write=False)
            bounds.append(vec)
        ops = ops.copy()
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "normalization", float(self.normalization))
        object.__setattr__(self, "left_boundary", bounds[0])
        object.__setattr__(self, "right_boundary", bounds[1])

    @property
    def phys_dim(self) -> int:
        return self.ops.shape[0]

    @property
    def bond_dim(self) -> int:
        return self.ops.shape[1]

    def with_boundaries(self, left=None, right=None) -> "SiteTensor":
        return SiteTensor(
            self.ops,
            self.normalization,
            self.left_boundary if left is None else left,
            self.right_boundary if right is None else right,
            self.name,
        )

    def kraus(self) -> np.ndarray:
        return self.normalization * self.ops

    def to_json(self) -> str:
        def cplx(a):
            return [[float(z.real), float(z.imag)] for z in np.asarray(a).reshape(-1)]

        return json.dumps(
            {
                "name": self.name,
                "phys_dim": self.phys_dim,
                "bond_dim": self.bond_dim,
                "normalization": self.normalization,
                "ops": [cplx(a) for a in self.ops],
                "left_boundary": cplx(self.left_boundary),
                "right_boundary": cplx(self.right_boundary),
            },
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SiteTensor":
        doc = json.loads(text)
        d, bond = int(doc["phys_dim"]), int(doc["bond_dim"])

        def arr(entries, shape):
            vals = np.array([complex(re, im) for re, im in entries])
            return vals.reshape(shape)

        if len(doc["ops"]) != d:
            raise DimensionError(f"expected {d} operators, found {len(doc['ops'])}")
        ops = np.stack([arr(a, (bond, bond)) for a in doc["ops"]])
        return cls(
            ops,
            doc["normalization"],
            arr(doc["left_boundary"], (bond,)),
            arr(doc["right_boundary"], (bond,)),
            doc.get("name", ""),
        )


def ghz_tensor() -> SiteTensor:
    return SiteTensor(np.stack([qmath.I2, qmath.Z]), 1 / math.sqrt(2), name="ghz")


def cluster_tensor() -> SiteTensor:
    return SiteTensor(np.stack([qmath.H, qmath.H @ qmath.Z]), 1 / math.sqrt(2), name="cluster")


def aklt_tensor() -> SiteTensor:
    """Spin-1 AKLT tensor ``{X, Y, Z}`` in the Cartesian basis."""
    return SiteTensor(np.stack([qmath.X, qmath.Y, qmath.Z]), 1 / math.sqrt(3), name="aklt")


def toric_tensor() -> SiteTensor:
    """Bond-4 tensor ``Z^s (x) Z^s``."""
    ops = np.stack([np.eye(4), np.kron(qmath.Z, qmath.Z)])
    return SiteTensor(ops, 1 / math.sqrt(2), name="toric")


def product_tensor() -> SiteTensor:
    """Bond-1 tensor with ``A_0 = A_1 = 1/sqrt(2)``; contracts to ``|+>^n``."""
    ops = np.full((2, 1, 1), 1 / math.sqrt(2), dtype=complex)
    return SiteTensor(ops, 1.0, name="product")


_BUILDERS = {
    "ghz": ghz_tensor,
    "cluster": cluster_tensor,
    "aklt": aklt_tensor,
    "toric": toric_tensor,
    "product": product_tensor,
}


def named_tensor(name: str) -> SiteTensor:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown tensor {name!r}; choose from {NAMED_TENSORS}") from None


def load_golden(name: str) -> SiteTensor:
    return SiteTensor.from_json((TENSOR_DIR / f"{name}.json").read_text())


def write_golden_tensors(directory: Path = TENSOR_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in ("ghz", "cluster", "aklt", "toric"):
        path = directory / f"{name}.json"
        path.write_text(named_tensor(name).to_json() + "\n")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# channel view and contraction


@dataclass(frozen=True)
class ChannelReport:
    is_trace_preserving: bool
    defect: float


def channel_check(t: SiteTensor) -> ChannelReport:
    """Trace-preservation defect ``max |sum_i N^2 A_i^dag A_i - 1|``."""
    k = t.kraus()
    total = np.einsum("iba,ibc->ac", k.conj(), k)
    defect = float(np.abs(total - np.eye(t.bond_dim)).max())
    return ChannelReport(defect < CHANNEL_TOL, defect)


def _check_dense(d: int, n: int) -> None:
    if n < 1 or d**n > MAX_DENSE_DIM:
        raise DimensionError(f"dense dimension {d}^{n} exceeds 2^20")


def chain_amplitudes(
    t: SiteTensor,
    n: int,
    boundary: str = "open",
    right: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Unnormalised amplitudes ``N^n <L|A...A|R>`` (or ``N^n Tr(A...A)``)."""
    _check_dense(t.phys_dim, n)
    k = t.kraus()
    bond = t.bond_dim
    if boundary == "open":
        r = t.right_boundary if right is None else np.asarray(right, dtype=complex)
        left = t.left_boundary.conj()[None, :]
        acc = left  # rows: physical configurations so far
        for _ in range(n):
            acc = np.einsum("ma,iab->mib", acc, k).reshape(-1, bond)
        return acc @ r
    if boundary == "periodic":
        acc = np.eye(bond, dtype=complex)[None]
        for _ in range(n):
            acc = np.einsum("mab,ibc->miac", acc, k).reshape(-1, bond, bond)
        return np.einsum("maa->m", acc)
    raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")


def contract(t: SiteTensor, n: int, boundary: str = "open") -> DenseState:
    if n < 2:
        raise ValueError("chain length must be at least 2")
    amps = chain_amplitudes(t, n, boundary)
    return DenseState.from_vector(amps, (t.phys_dim,) * n)


def contraction_norm(t: SiteTensor, n: int, boundary: str = "open") -> float:
    """Norm of the chain before the final normalisation (unit boundaries)."""
    tt = t.with_boundaries(
        t.left_boundary / np.linalg.norm(t.left_boundary),
        t.right_boundary / np.linalg.norm(t.right_boundary),
    )
    return float(np.linalg.norm(chain_amplitudes(tt, n, boundary)))


# ---------------------------------------------------------------------------
# sequential preparation


@dataclass(frozen=True)
class SequentialCircuit:
    """Per-site unitary acting on ``fresh site (x) ancilla``.

    The fresh site starts in ``|0>``; column ``(0, a)`` of ``step`` is the
    isometry ``|a> -> sum_i |i> (x) N A_i |a>``.
    """

    phys_dim: int
    bond_dim: int
    step: np.ndarray = field(repr=False)

    @property
    def ancilla_qubits(self) -> int:
        return int(round(math.log2(self.bond_dim)))

    @property
    def entangling(self) -> bool:
        """Whether ``step`` couples the site to the ancilla (operator-Schmidt rank > 1)."""
        d, bond = self.phys_dim, self.bond_dim
        r = self.step.reshape(d, bond, d, bond).transpose(0, 2, 1, 3).reshape(d * d, bond * bond)
        s = np.linalg.svd(r, compute_uv=False)
        return bool(np.sum(s > RANK_TOL * s[0]) > 1)


def sequential_circuit(t: SiteTensor) -> SequentialCircuit:
    bond, d = t.bond_dim, t.phys_dim
    if bond & (bond - 1):
        raise DimensionError(f"bond dimension {bond} is not a power of two")
    report = channel_check(t)
    if not report.is_trace_preserving:
        raise ValueError(f"tensor is not an isometry (channel defect {report.defect:.2e})")
    iso = t.kraus().reshape(d * bond, bond)
    rng = np.random.default_rng(0)
    filler = rng.normal(size=(d * bond, d * bond - bond)) + 0j
    q, _ = np.linalg.qr(np.hstack([iso, filler]))
    comp = q[:, bond:]
    comp = comp - iso @ (iso.conj().T @ comp)
    comp, _ = np.linalg.qr(comp)
    step = np.hstack([iso, comp])
    qmath.check_unitary(step, "sequential step")
    return SequentialCircuit(d, bond, step)


def sequential_prepare(t: SiteTensor, n: int) -> DenseState:
    """Grow the chain right to left with an ancilla register, then project on ``<L|``."""
    _check_dense(t.phys_dim, n)
    circ = sequential_circuit(t)
    d, bond = t.phys_dim, t.bond_dim
    r = t.right_boundary / np.linalg.norm(t.right_boundary)
    psi = r.reshape(bond, 1)  # (ancilla, sites)
    for _ in range(n):
        m = psi.shape[1]
        full = np.zeros((d * bond, m), dtype=complex)
        full[:bond] = psi  # fresh site in |0>
        out = (circ.step @ full).reshape(d, bond, m)
        psi = out.transpose(1, 0, 2).reshape(bond, d * m)
    amps = t.left_boundary.conj() @ psi
    return DenseState.from_vector(amps, (d,) * n)


# ---------------------------------------------------------------------------
# measurement bases and wire MBQC


@dataclass(frozen=True)
class BasisSpec:
    """Single-site measurement basis: a symmetry basis tilted about ``axis``.

    Qubits: ``axis="X"`` is the computational basis rotated by ``exp(-i theta X)``,
    ``axis="Z"`` is the X basis rotated by ``exp(-i theta Z)``.  Spin-1 sites
    use the Cartesian basis rotated by ``exp(-i theta S_axis)`` so that the
    induced bond action is conjugation by ``exp(i theta P / 2)``; ``axis``
    may also be ``"Y"`` there.
    """

    axis: str
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"axis must be X, Y or Z, got {self.axis!r}")
        if not math.isfinite(self.theta):
            raise ValueError("tilt angle must be finite")

    def matrix(self, phys_dim: int) -> np.ndarray:
        if phys_dim == 2:
            if self.axis == "Y":
                raise ValueError("qubit bases are tilted about X or Z")
            return rotated_basis(self.axis, self.theta)
        if phys_dim == 3:
            return spin1_rotation(self.axis, -self.theta)
        raise DimensionError(f"unsupported physical dimension {phys_dim}")


def induced_op(t: SiteTensor, basis: BasisSpec, outcome: int) -> np.ndarray:
    """Bond operator ``A(b, o) = sum_i conj(b_o)_i A_i`` (raw, unnormalised)."""
    b = basis.matrix(t.phys_dim)
    return np.einsum("i,iab->ab", b[:, outcome].conj(), t.ops)


def induced_ops(t: SiteTensor, basis: BasisSpec) -> list[np.ndarray]:
    return [induced_op(t, basis, o) for o in range(t.phys_dim)]


def generates_abelian(ops: Sequence[np.ndarray], tol: float = 1e-10) -> bool:
    return all(
        np.abs(a @ b - b @ a).max() < tol for a, b in itertools.combinations(ops, 2)
    )


def _transfer(t: SiteTensor, e: np.ndarray) -> np.ndarray:
    return np.einsum("iba,bc,icd->ad", t.ops.conj(), e, t.ops)


def _readout_map(t: SiteTensor, b: int) -> np.ndarray:
    """Rows ``<L| A_config`` for all ``b``-site configurations."""
    acc = t.left_boundary.conj()[None, :]
    for _ in range(b):
        acc = np.einsum("ma,iab->mib", acc, t.ops).reshape(-1, t.bond_dim)
    return acc


def readout_buffer(t: SiteTensor, max_buffer: int = 6) -> int:
    """Smallest number of unmeasured left sites that reads out the bond space faithfully."""
    for b in range(1, max_buffer + 1):
        if np.linalg.matrix_rank(_readout_map(t, b), tol=RANK_TOL) == t.bond_dim:
            return b
    raise ValueError("no readout buffer of length <= 6 resolves the bond space")


@dataclass(frozen=True)
class WireResult:
    logical_op: np.ndarray = field(repr=False)
    outcomes: tuple[int, ...]
    frame: Optional[ByproductFrame]
    probability: float
    buffer: int


def wire_measure(
    t: SiteTensor,
    n: int,
    bases: Sequence[BasisSpec],
    forced_outcomes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
    buffer: Optional[int] = None,
) -> WireResult:
    """Measure ``n`` sites of a chain from the right, one basis per step.

    The chain is ``buffer`` unmeasured sites followed by the ``n`` measured
    ones; step 1 is the rightmost site.  The induced bond operator is
    ``A(step n) ... A(step 1)``.  Branch probabilities come from the
    environment of the still-unmeasured sites, so sampling matches a dense
    measurement of the full chain.
    """
    bases = list(bases)
    if len(bases) != n:
        raise ValueError(f"need {n} bases, got {len(bases)}")
    if forced_outcomes is not None and len(forced_outcomes) != n:
        raise ValueError(f"need {n} forced outcomes, got {len(forced_outcomes)}")
    if forced_outcomes is None and rng is None:
        raise ValueError("need either forced_outcomes or rng")
    if buffer is None:
        buffer = readout_buffer(t)
    bond = t.bond_dim
    envs = [np.outer(t.left_boundary, t.left_boundary.conj())]
    for _ in range(buffer + n):
        envs.append(_transfer(t, envs[-1]))
    r = t.right_boundary
    total = float(np.real(np.vdot(r, envs[buffer + n] @ r)))
    logical = np.eye(bond, dtype=complex)
    vec = r.copy()
    weight = total
    outcomes = []
    for k, spec in enumerate(bases):
        env = envs[buffer + n - k - 1]
        ops = induced_ops(t, spec)
        cands = [op @ vec for op in ops]
        probs = np.array([np.real(np.vdot(v, env @ v)) for v in cands]) / weight
        if forced_outcomes is None:
            p = np.clip(probs, 0, None)
            o = int(rng.choice(len(p), p=p / p.sum()))
        else:
            o = int(forced_outcomes[k])
            if not 0 <= o < t.phys_dim:
                raise ValueError(f"outcome {o} out of range")
            if probs[o] <= qmath.FORCED_FLOOR:
                raise ZeroProbabilityError(f"outcome {o} at step {k + 1} has probability {probs[o]:.3e}")
        outcomes.append(o)
        vec = cands[o]
        weight *= probs[o]
        logical = ops[o] @ logical
    frame = _wire_frame(t, bases, logical)
    return WireResult(logical, tuple(outcomes), frame, float(weight / total), buffer)


def intended_op(t: SiteTensor, bases: Sequence[BasisSpec]) -> np.ndarray:
    """Operator of the all-zero branch: the gate the measurement sequence targets."""
    out = np.eye(t.bond_dim, dtype=complex)
    for spec in bases:
        out = induced_op(t, spec, 0) @ out
    return out


def _wire_frame(t: SiteTensor, bases, logical) -> Optional[ByproductFrame]:
    if t.bond_dim != 2:
        return None
    target = intended_op(t, bases)
    if abs(np.linalg.det(target)) < 1e-12:
        return None
    p = pauli.as_phased_pauli(logical @ np.linalg.inv(target) / math.sqrt(abs(np.linalg.det(logical @ np.linalg.inv(target)))))
    if p is None:
        return None
    return ByproductFrame(p.x, p.z)


def wire_oracle(
    t: SiteTensor,
    bases: Sequence[BasisSpec],
    outcomes: Sequence[int],
    buffer: Optional[int] = None,
) -> np.ndarray:
    """Induced bond operator recovered from dense simulation.

    For each right boundary ``|e_a>`` the chain of ``buffer + n`` sites is
    built by brute-force amplitude enumeration, normalised, and measured
    site-by-site with :func:`qmath.measure`.  The unmeasured buffer register is
    then solved for the bond vector it encodes.
    """
    n = len(bases)
    if buffer is None:
        buffer = readout_buffer(t)
    d, bond = t.phys_dim, t.bond_dim
    total = buffer + n
    _check_dense(d, total)
    readout = _readout_map(t, buffer)
    cols = []
    for a in range(bond):
        right = np.zeros(bond, dtype=complex)
        right[a] = 1.0
        raw = np.array([
            t.left_boundary.conj() @ _product(t.ops, cfg) @ right
            for cfg in itertools.product(range(d), repeat=total)
        ])
        norm = np.linalg.norm(raw)
        if norm < 1e-14:
            cols.append(np.zeros(d**buffer, dtype=complex))
            continue
        state = DenseState.from_vector(raw, (d,) * total)
        scale = norm
        try:
            for k, spec in enumerate(bases):
                res = qmath.measure(state, total - 1 - k, spec.matrix(d), forced_outcome=outcomes[k])
                scale *= math.sqrt(res.probability)
                state = res.post_state
            cols.append(scale * state.amplitudes)
        except ZeroProbabilityError:
            cols.append(np.zeros(d**buffer, dtype=complex))
    branch = np.stack(cols, axis=1)
    sol, *_ = np.linalg.lstsq(readout, branch, rcond=None)
    return sol


def _product(ops: np.ndarray, cfg: Sequence[int]) -> np.ndarray:
    out = np.eye(ops.shape[1], dtype=complex)
    for i in cfg:
        out = out @ ops[i]
    return out


# ---------------------------------------------------------------------------
# injectivity


def injectivity(t: SiteTensor, k_max: int = INJECTIVITY_KMAX) -> Optional[int]:
    """Smallest blocking length whose products span all bond-space matrices."""
    if not 1 <= k_max <= INJECTIVITY_KMAX:
        raise ValueError(f"k_max must be in 1..{INJECTIVITY_KMAX}")
    bond = t.bond_dim
    prods = np.eye(bond, dtype=complex)[None]
    for k in range(1, k_max + 1):
        prods = np.einsum("mab,ibc->miac", prods, t.ops).reshape(-1, bond, bond)
        s = np.linalg.svd(prods.reshape(len(prods), -1), compute_uv=False)
        if np.sum(s > RANK_TOL * max(s[0], 1.0)) == bond * bond:
            return k
    return None


# ---------------------------------------------------------------------------
# factorized tensors and tilted measurements


@dataclass(frozen=True)
class FactorizedTensor:
    """Tensor ``A_i = B_i (x) P_i`` with junk factors ``B_i`` and logical Paulis ``P_i``."""

    junk_ops: tuple[np.ndarray, ...]
    logical_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        junk = tuple(np.asarray(b, dtype=complex) for b in self.junk_ops)
        logical = tuple(np.asarray(p, dtype=complex) for p in self.logical_ops)
        if len(junk) != len(logical) or not junk:
            raise ValueError("junk and logical families must have equal nonzero length")
        if len({b.shape for b in junk}) != 1 or len({p.shape for p in logical}) != 1:
            raise DimensionError("factor shapes must agree across the physical index")
        if logical[0].shape != (2, 2):
            raise DimensionError("logical factors must be 2x2")
        object.__setattr__(self, "junk_ops", junk)
        object.__setattr__(self, "logical_ops", logical)

    @classmethod
    def aklt(cls, junk: Optional[Sequence[np.ndarray]] = None) -> "FactorizedTensor":
        logical = (qmath.X, qmath.Y, qmath.Z)
        if junk is None:
            junk = [np.eye(1)] * 3
        return cls(tuple(junk), logical)

    @property
    def junk_dim(self) -> int:
        return self.junk_ops[0].shape[0]

    def combined(self) -> SiteTensor:
        ops = np.stack([np.kron(b, p) for b, p in zip(self.junk_ops, self.logical_ops)])
        return SiteTensor(ops, 1 / math.sqrt(len(ops)), name="factorized")


class FactorizationError(ValueError):
    """The induced operator is not a product of junk and logical parts."""


@dataclass(frozen=True)
class TiltReport:
    induced_op: np.ndarray = field(repr=False)
    herald: str
    logical_factor: np.ndarray = field(repr=False)
    corrected: np.ndarray = field(repr=False)
    defect: float
    rotation_error: float
    rotated: bool


def operator_schmidt(op: np.ndarray, m: int, q: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Best product approximation ``op ~ J (x) K`` with ``J`` m x m and ``K`` q x q.

    Returns ``(J, K, defect)`` with ``defect`` the relative Frobenius weight
    outside the leading operator-Schmidt term.
    """
    r = op.reshape(m, q, m, q).transpose(0, 2, 1, 3).reshape(m * m, q * q)
    u, s, vh = np.linalg.svd(r)
    norm = math.sqrt(float(np.sum(s**2)))
    defect = math.sqrt(float(np.sum(s[1:] ** 2))) / norm if norm > 0 else 0.0
    j = (u[:, 0] * s[0]).reshape(m, m)
    k = vh[0].reshape(q, q)
    return j, k, defect


_LABELS = ("X", "Y", "Z")


def logical_action_tilted(
    f: FactorizedTensor,
    basis: BasisSpec,
    outcome: Optional[int] = None,
    tol: float = FACTORIZATION_TOL,
) -> TiltReport:
    """Logical action of one slightly tilted measurement on a factorized spin-1 site.

    The measured outcome ``o`` heralds ``P_o``.  When ``P_o`` anticommutes with
    the tilt axis ``P`` the logical factor is ``exp(i theta P) P_o``; on the
    commuting branch no rotation is applied.  ``logical_factor`` keeps the
    herald, ``corrected = logical_factor P_o^-1`` strips it.  ``outcome=None`` picks the first
    anticommuting branch.
    """
    if len(f.logical_ops) != 3:
        raise DimensionError("tilted logical action needs a three-outcome (spin-1) site")
    if abs(basis.theta) > MAX_TILT:
        raise ValueError(f"tilt {basis.theta} exceeds {MAX_TILT}")
    target = qmath.PAULIS[basis.axis]
    if outcome is None:
        outcome = next(k for k, lab in enumerate(_LABELS) if lab != basis.axis)
    t = f.combined()
    op = induced_op(t, basis, outcome)
    junk, logical, defect = operator_schmidt(op, f.junk_dim, 2)
    if defect > tol:
        raise FactorizationError(f"induced operator does not factorize (defect {defect:.2e})")
    herald = f.logical_ops[outcome]
    logical = logical * math.sqrt(2) / np.linalg.norm(logical)
    rotated = _LABELS[outcome] != basis.axis
    logical = logical / qmath.phase_align(logical, herald)
    corrected = logical @ herald.conj().T
    expected = qmath.expi(basis.theta, target) if rotated else np.eye(2)
    corrected = corrected / qmath.phase_align(corrected, expected)
    err = float(np.linalg.norm(corrected - expected, 2))
    return TiltReport(op, _LABELS[outcome], logical, corrected, defect, err, rotated)
