"""Teleportation protocols with explicit byproduct bookkeeping.

Every protocol runs on the dense simulator, can be driven branch-by-branch with
``forced_outcomes`` and returns the *raw* output together with the Pauli frame
needed to correct it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import pauli, qmath
from .qmath import CircuitIR, DenseState, Gate

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")
_BELL_ALIASES = {
    "Φ+": "phi+", "Φ⁺": "phi+", "Φ-": "phi-", "Φ⁻": "phi-",
    "Ψ+": "psi+", "Ψ⁺": "psi+", "Ψ-": "psi-", "Ψ⁻": "psi-",
}

DATA_DIR = Path(__file__).with_name("data")
HYPER_GOLDEN = DATA_DIR / "hyper_ccz.circuit"


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class ByproductFrame:
    """Per-logical-qubit Pauli byproduct ``X^x Z^z`` sitting on a raw output."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    @classmethod
    def trivial(cls, n: int) -> "ByproductFrame":
        return cls((0,) * n, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.x_bits)

    def byproduct(self) -> np.ndarray:
        """Matrix of ``prod_k X_k^{x_k} Z_k^{z_k}``."""
        return qmath.kron(*[
            np.linalg.matrix_power(qmath.X, x) @ np.linalg.matrix_power(qmath.Z, z)
            for x, z in zip(self.x_bits, self.z_bits)
        ]) if self.n else np.eye(1)

    def correction(self) -> np.ndarray:
        return self.byproduct().conj().T

    def correct(self, raw: DenseState) -> DenseState:
        return qmath.apply_unitary(raw, self.correction(), range(self.n))

    def compose(self, later: "ByproductFrame") -> "ByproductFrame":
        """Frame of ``later`` applied after ``self`` (global phases dropped)."""
        return ByproductFrame(
            tuple(a ^ b for a, b in zip(self.x_bits, later.x_bits)),
            tuple(a ^ b for a, b in zip(self.z_bits, later.z_bits)),
        )

    def as_pauli(self) -> pauli.PauliOp:
        return pauli.PauliOp(self.x_bits, self.z_bits)


@dataclass(frozen=True)
class OutcomeRecord:
    entries: tuple[tuple[str, int], ...] = ()

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.entries)

    def __getitem__(self, label: str) -> int:
        for k, o in self.entries:
            if k == label:
                return o
        raise KeyError(label)


@dataclass(frozen=True)
class QuantumChannel:
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        if len({k.shape for k in ops}) != 1:
            raise ValueError("Kraus operators must share a shape")
        object.__setattr__(self, "kraus_ops", ops)
        if self.tp_defect() > qmath.UNITARY_TOL:
            raise ValueError(f"not trace preserving (defect {self.tp_defect():.2e})")

    def tp_defect(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.abs(s - np.eye(s.shape[0])).max())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)


@dataclass(frozen=True)
class TeleportResult:
    raw_output: DenseState
    outcomes: OutcomeRecord
    frame: ByproductFrame
    probability: float = 1.0
    intended_gate: Optional[np.ndarray] = field(default=None, repr=False)

    def corrected(self) -> DenseState:
        return self.frame.correct(self.raw_output)


# ---------------------------------------------------------------------------
# Bell pairs and one-bit teleportation


def bell_pair(kind: str) -> DenseState:
    """``|Phi±> = (|00> ± |11>)/sqrt2``, ``|Psi±> = (|01> ± |10>)/sqrt2``."""
    key = _BELL_ALIASES.get(kind, str(kind).lower())
    if key not in BELL_KINDS:
        raise ValueError(f"unknown Bell kind {kind!r}")
    vec = np.zeros(4, dtype=complex)
    if key.startswith("phi"):
        vec[0], vec[3] = 1, (1 if key.endswith("+") else -1)
    else:
        vec[1], vec[2] = 1, (1 if key.endswith("+") else -1)
    return DenseState.from_vector(vec)


def _check_qubit(state: DenseState) -> None:
    if state.site_dims != (2,):
        raise qmath.DimensionError("input must be a single qubit")


def _forced(forced: Optional[Sequence[int]], k: int) -> Optional[int]:
    return None if forced is None else int(forced[k])


def _measure_chain(state, steps, forced, rng):
    """Measure ``steps = [(label, site, basis), ...]`` in order (sites index the current register)."""
    record = []
    prob = 1.0
    for k, (label, site, basis) in enumerate(steps):
        res = qmath.measure(state, site, basis, _forced(forced, k), rng)
        state = res.post_state
        prob *= res.probability
        record.append((label, res.outcome))
    return state, OutcomeRecord(tuple(record)), prob


def _rng(rng):
    return rng if rng is not None else np.random.default_rng()


def teleport(
    input_state: DenseState,
    variant: str = "bell",
    forced_outcomes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> TeleportResult:
    """Teleport one qubit.

    Variants:
        ``bell``: CNOT(input→A), measure input in X (``a``) and A in Z (``b``);
            B carries ``X^b Z^a |psi>``.
        ``one_bit_z``: ancilla ``|0>``, CNOT(input→ancilla), measure input in X;
            ancilla carries ``Z^m |psi>``.
        ``one_bit_x``: ancilla ``|+>``, CNOT(ancilla→input), measure input in Z;
            ancilla carries ``X^m |psi>``.
    """
    _check_qubit(input_state)
    rng = None if forced_outcomes is not None else _rng(rng)
    if variant == "bell":
        st = input_state.kron(bell_pair("phi+"))
        st = qmath.apply_unitary(st, qmath.CNOT, [0, 1])
        out, rec, prob = _measure_chain(
            st, [("a", 0, qmath.X_BASIS), ("b", 0, qmath.Z_BASIS)], forced_outcomes, rng
        )
        frame = ByproductFrame((rec["b"],), (rec["a"],))
    elif variant == "one_bit_z":
        st = input_state.kron(DenseState.product(qmath.KET0))
        st = qmath.apply_unitary(st, qmath.CNOT, [0, 1])
        out, rec, prob = _measure_chain(st, [("m", 0, qmath.X_BASIS)], forced_outcomes, rng)
        frame = ByproductFrame((0,), (rec["m"],))
    elif variant == "one_bit_x":
        st = input_state.kron(DenseState.product(qmath.KET_PLUS))
        st = qmath.apply_unitary(st, qmath.CNOT, [1, 0])
        out, rec, prob = _measure_chain(st, [("m", 0, qmath.Z_BASIS)], forced_outcomes, rng)
        frame = ByproductFrame((rec["m"],), (0,))
    else:
        raise ValueError(f"unknown teleport variant {variant!r}")
    return TeleportResult(out, rec, frame, prob)


def branches(num_outcomes: int, dim: int = 2):
    return itertools.product(range(dim), repeat=num_outcomes)


def entanglement_swap(forced_outcomes: Optional[Sequence[int]] = None, rng=None):
    """Bell-teleport half of a Bell pair; returns (raw pair state, frame on the second qubit).

    Register: ``R`` (reference) ⊗ ``S`` (teleported half of |Phi+>_RS) ⊗ ``A B``.
    """
    st = bell_pair("phi+").kron(bell_pair("phi+"))
    st = qmath.apply_unitary(st, qmath.CNOT, [1, 2])
    rng = None if forced_outcomes is not None else _rng(rng)
    out, rec, prob = _measure_chain(
        st, [("a", 1, qmath.X_BASIS), ("b", 1, qmath.Z_BASIS)], forced_outcomes, rng
    )
    frame = ByproductFrame((0, rec["b"]), (0, rec["a"]))
    return TeleportResult(out, rec, frame, prob)


# ---------------------------------------------------------------------------
# gate teleportation


def rotated_basis(axis: str, theta: float) -> np.ndarray:
    """Columns of the basis obtained by rotating about ``axis`` by ``exp(-i theta P)``.

    ``axis='Z'`` rotates the X basis, ``axis='X'`` rotates the Z basis (the other
    choice would only produce phases).
    """
    if axis == "Z":
        return qmath.expi(-theta, qmath.Z) @ qmath.X_BASIS
    if axis == "X":
        return qmath.expi(-theta, qmath.X) @ qmath.Z_BASIS
    raise ValueError(f"axis must be 'X' or 'Z', got {axis!r}")


def gate_teleport(
    input_state: DenseState,
    theta: float,
    variant: str = "z_axis",
    forced_outcomes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> TeleportResult:
    """One-bit teleportation with the measured qubit read out in a rotated basis.

    ``z_axis`` builds on ``one_bit_z`` and teleports ``exp(i theta Z)``;
    ``x_axis`` builds on ``one_bit_x`` and teleports ``exp(i theta X)``.  In both
    cases the rotation commutes with the byproduct, so the frame is the plain
    one-bit frame.
    """
    _check_qubit(input_state)
    rng = None if forced_outcomes is not None else _rng(rng)
    if variant == "z_axis":
        st = input_state.kron(DenseState.product(qmath.KET0))
        st = qmath.apply_unitary(st, qmath.CNOT, [0, 1])
        basis = rotated_basis("Z", theta)
        out, rec, prob = _measure_chain(st, [("m", 0, basis)], forced_outcomes, rng)
        frame = ByproductFrame((0,), (rec["m"],))
        gate = qmath.expi(theta, qmath.Z)
    elif variant == "x_axis":
        st = input_state.kron(DenseState.product(qmath.KET_PLUS))
        st = qmath.apply_unitary(st, qmath.CNOT, [1, 0])
        basis = rotated_basis("X", theta)
        out, rec, prob = _measure_chain(st, [("m", 0, basis)], forced_outcomes, rng)
        frame = ByproductFrame((rec["m"],), (0,))
        gate = qmath.expi(theta, qmath.X)
    else:
        raise ValueError(f"unknown gate-teleport variant {variant!r}")
    return TeleportResult(out, rec, frame, prob, gate)


# ---------------------------------------------------------------------------
# CCZ hyper-teleportation

HYPER_WIRES = 5
HYPER_INPUT = 0
HYPER_MEASURED = (1, 2, 3)
HYPER_OUTPUT = 4
RESOURCES = ("plus", "ghz")


def _resource_vector(resource: str) -> np.ndarray:
    if resource == "plus":
        return np.ones(16, dtype=complex) / 4
    if resource == "ghz":
        v = np.zeros(16, dtype=complex)
        v[0] = v[15] = 1 / math.sqrt(2)
        return v
    raise ValueError(f"unknown resource {resource!r}")


def _resource_prep(resource: str) -> list[Gate]:
    if resource == "plus":
        return [Gate("H", (w,)) for w in range(1, 5)]
    return [Gate("H", (1,)), Gate("CNOT", (1, 2)), Gate("CNOT", (1, 3)), Gate("CNOT", (1, 4))]


def hyper_expected(psi: DenseState, parity: int) -> DenseState:
    """Target two-qubit output for outcome parity ``a⊕b⊕c``.

    ``|C> = CZ |psi>|+>``; the byproduct ``Z^parity`` on the second qubit is
    applied before the ``H`` (operators taken in application order), i.e.
    ``(1⊗H)(1⊗Z^p)|C>``.
    """
    c = qmath.apply_unitary(psi.kron(DenseState.product(qmath.KET_PLUS)), qmath.CZ, [0, 1])
    if parity:
        c = qmath.apply_unitary(c, qmath.Z, [1])
    return qmath.apply_unitary(c, qmath.H, [1])


def hyper_expected_literal(psi: DenseState, parity: int) -> DenseState:
    """``(1⊗Z^p)(1⊗H)|C>`` read as a matrix product (H applied first)."""
    c = qmath.apply_unitary(psi.kron(DenseState.product(qmath.KET_PLUS)), qmath.CZ, [0, 1])
    c = qmath.apply_unitary(c, qmath.H, [1])
    if parity:
        c = qmath.apply_unitary(c, qmath.Z, [1])
    return c


def _run_hyper_circuit(circuit: CircuitIR, psi: DenseState, outcomes, rng=None):
    """Prepare ``psi ⊗ |0000>``, run ``circuit``, measure the X-measured wires."""
    st = psi.kron(DenseState.zeros(HYPER_WIRES - 1))
    st = qmath.apply_circuit(circuit, st)
    measured = [int(w) for w in (circuit.meta("measure-x") or "1 2 3").split()]
    steps = []
    # measuring removes a site, so later indices shift down
    for k, w in enumerate(measured):
        shift = sum(1 for m in measured[:k] if m < w)
        steps.append((chr(ord("a") + k), w - shift, qmath.X_BASIS))
    out, rec, prob = _measure_chain(st, steps, outcomes, rng)
    return out, rec, prob


def _candidate_circuit(resource: str, ccz: Sequence[tuple[int, int, int]], final_h: bool) -> CircuitIR:
    gates = _resource_prep(resource) + [Gate("CCZ", t) for t in ccz]
    if final_h:
        gates.append(Gate("H", (HYPER_OUTPUT,)))
    meta = (
        ("resource", resource),
        ("measure-x", " ".join(map(str, HYPER_MEASURED))),
        ("input", str(HYPER_INPUT)),
        ("output", f"{HYPER_INPUT} {HYPER_OUTPUT}"),
        ("outcome-order", "a b c = wires 1 2 3 (top to bottom)"),
    )
    return CircuitIR(HYPER_WIRES, tuple(gates), meta)


@dataclass(frozen=True)
class HyperSearchReport:
    circuit: Optional[CircuitIR]
    output_order: Optional[str]
    reading: Optional[str]
    candidates_tried: int
    literal_solutions: int


def _hyper_ok(circuit: CircuitIR, target, psis, swap_outputs: bool) -> bool:
    for psi in psis:
        for abc in branches(3):
            try:
                out, _, _ = _run_hyper_circuit(circuit, psi, abc)
            except qmath.ZeroProbabilityError:
                return False
            if swap_outputs:
                out = qmath.apply_unitary(out, qmath.SWAP, [0, 1])
            if qmath.fidelity(out, target(psi, sum(abc) % 2)) < 1 - 1e-10:
                return False
    return True


def search_hyper_circuit(max_ccz: int = 4, seed: int = 0) -> HyperSearchReport:
    """Exhaustive search for a CCZ hyper-teleportation circuit.

    Wires: 0 = input, 1-3 = ancillas measured in X (outcomes a, b, c),
    4 = output ancilla.  Candidates are a resource preparation (``plus``: all
    ancillas in |+>; ``ghz``: ancillas 1-4 in a GHZ state) followed by up to
    ``max_ccz`` CCZ gates on distinct wire triples, with or without a trailing
    H on the output wire.  Both output orders are tried.  Candidates are tested
    against the application-order reading of the target (``hyper_expected``);
    solutions of the literal reading are counted separately.
    """
    rng = np.random.default_rng(seed)
    psis = [qmath.random_state(1, rng) for _ in range(3)]
    triples = list(itertools.combinations(range(HYPER_WIRES), 3))
    tried = 0
    literal = 0
    found = None
    for resource in RESOURCES:
        for k in range(max_ccz + 1):
            for ccz in itertools.combinations(triples, k):
                for final_h in (False, True):
                    circ = _candidate_circuit(resource, ccz, final_h)
                    tried += 1
                    for swap in (False, True):
                        if _hyper_ok(circ, hyper_expected_literal, psis, swap):
                            literal += 1
                        if found is None and _hyper_ok(circ, hyper_expected, psis, swap):
                            found = (circ, "last,first" if swap else "first,last")
    if found is None:
        return HyperSearchReport(None, None, None, tried, literal)
    return HyperSearchReport(found[0], found[1], "application-order", tried, literal)


@lru_cache(maxsize=1)
def hyper_circuit() -> CircuitIR:
    """The frozen hyper-teleportation circuit (golden file)."""
    return CircuitIR.parse(HYPER_GOLDEN.read_text())


def write_hyper_golden(path: Path = HYPER_GOLDEN) -> CircuitIR:
    report = search_hyper_circuit()
    if report.circuit is None:
        raise RuntimeError("search found no circuit")
    meta = report.circuit.metadata + (
        ("output-order", report.output_order),
        ("target", "(1⊗H)(1⊗Z^(a⊕b⊕c)) CZ|psi>|+>, operators in application order"),
    )
    circ = CircuitIR(report.circuit.num_wires, report.circuit.gates, meta)
    path.write_text(circ.to_text())
    hyper_circuit.cache_clear()
    return circ


def hyper_teleport_ccz(
    input_state: DenseState,
    forced_outcomes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> TeleportResult:
    """Run the golden hyper-teleportation circuit; output is the (first, last) wire pair."""
    _check_qubit(input_state)
    rng = None if forced_outcomes is not None else _rng(rng)
    circ = hyper_circuit()
    out, rec, prob = _run_hyper_circuit(circ, input_state, forced_outcomes, rng)
    if circ.meta("output-order") == "last,first":
        out = qmath.apply_unitary(out, qmath.SWAP, [0, 1])
    return TeleportResult(out, rec, ByproductFrame.trivial(2), prob)


# ---------------------------------------------------------------------------
# magic-state injection

MAGIC_STATE = np.array([1, np.exp(1j * math.pi / 4)], dtype=complex) / math.sqrt(2)
INJECTION_GATES = {"CNOT": qmath.CNOT, "S": qmath.S, "X": qmath.X}


def inject_T(
    input_state: DenseState,
    forced_outcomes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
):
    """Apply ``T`` by consuming the magic state ``(|0> + e^{i pi/4}|1>)/sqrt2``.

    CNOT(magic→input), measure the input wire in Z.  Outcome 0 leaves
    ``T|psi>`` on the magic wire; outcome 1 leaves ``X T^†|psi>`` up to phase,
    which the Clifford ``S X`` maps back to ``T|psi>``.
    Returns ``(result, correction)`` where ``result.raw_output`` is already
    corrected and ``correction`` is the Clifford that was applied.
    """
    _check_qubit(input_state)
    rng = None if forced_outcomes is not None else _rng(rng)
    st = input_state.kron(DenseState.product(MAGIC_STATE))
    st = qmath.apply_unitary(st, qmath.CNOT, [1, 0])
    out, rec, prob = _measure_chain(st, [("m", 0, qmath.Z_BASIS)], forced_outcomes, rng)
    correction = qmath.S @ qmath.X if rec["m"] else np.eye(2, dtype=complex)
    out = qmath.apply_unitary(out, correction, [0])
    return TeleportResult(out, rec, ByproductFrame.trivial(1), prob, qmath.T), correction


# ---------------------------------------------------------------------------
# Stinespring dilation


def kraus_from_dilation(u: np.ndarray, ancilla_dim: int) -> QuantumChannel:
    """Kraus operators ``A_i = (1⊗<i|) U (1⊗|0>)`` with the ancilla as the second factor."""
    u = qmath.check_unitary(u, "dilation")
    total = u.shape[0]
    if total % ancilla_dim:
        raise ValueError("ancilla dimension does not divide the unitary dimension")
    d = total // ancilla_dim
    u4 = u.reshape(d, ancilla_dim, d, ancilla_dim)
    ops = tuple(u4[:, i, :, 0] for i in range(ancilla_dim))
    return QuantumChannel(ops)


def dilation_output(u: np.ndarray, ancilla_dim: int, rho: np.ndarray) -> np.ndarray:
    """Reference: run ``U`` on ``rho ⊗ |0><0|`` densely and trace out the ancilla."""
    d = rho.shape[0]
    anc = np.zeros((ancilla_dim, ancilla_dim), dtype=complex)
    anc[0, 0] = 1
    full = u @ np.kron(rho, anc) @ u.conj().T
    return np.einsum("aibi->ab", full.reshape(d, ancilla_dim, d, ancilla_dim))
