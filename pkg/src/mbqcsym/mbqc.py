"""Coupled-wire MBQC: circuit-to-pattern compiler, executor and the AKLT logical wire.

Each circuit wire becomes a cluster chain whose head qubit carries the input.
Measuring a chain qubit in the basis ``(|0> + (-1)^m e^{-i a}|1>)/sqrt(2)``
moves the logical state one site along as ``X^m J(a)`` with ``J(a) = H P(a)``
and ``P(a) = diag(1, e^{i a})``.  Byproducts are tracked as XOR sets of earlier
outcomes and folded into adaptive angle signs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import mps, qmath
from .mps import BasisSpec
from .qmath import CircuitIR, DenseState, DimensionError, Gate
from .teleport import ByproductFrame

MAX_WIRES = 4
MAX_DENSE_QUBITS = 20
SUPPORTED_GATES = ("H", "RZ", "RX", "CZ")
SIGN_RULES = Path(__file__).with_name("data") / "sign_rules.json"


class UnsupportedGateError(ValueError):
    """Gate kind outside the compiler's instruction set."""


def j_gate(alpha: float) -> np.ndarray:
    """``J(a) = H diag(1, e^{i a})``."""
    return qmath.H @ np.diag([1.0, np.exp(1j * alpha)])


def j_basis(alpha: float) -> BasisSpec:
    """Basis whose outcome ``m`` projects on ``(|0> + (-1)^m e^{-i a}|1>)/sqrt(2)``."""
    return BasisSpec("Z", -alpha / 2)


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Step:
    """Measure ``site`` with angle ``(-1)^s alpha``, ``s`` the XOR of outcomes in ``sign_deps``."""

    site: int
    alpha: float
    sign_deps: tuple[int, ...] = ()

    def basis(self, outcomes: Sequence[int]) -> BasisSpec:
        s = sum(outcomes[k] for k in self.sign_deps) % 2
        return j_basis(-self.alpha if s else self.alpha)


@dataclass(frozen=True)
class MeasurementPattern:
    num_qubits: int
    edges: tuple[tuple[int, int], ...]
    input_sites: tuple[int, ...]
    steps: tuple[Step, ...]
    output_sites: tuple[int, ...]
    x_deps: tuple[tuple[int, ...], ...]
    z_deps: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        measured = [s.site for s in self.steps]
        if len(set(measured)) != len(measured):
            raise ValueError("a site is measured more than once")
        if set(measured) & set(self.output_sites):
            raise ValueError("output sites must stay unmeasured")
        for k, step in enumerate(self.steps):
            if any(d >= k or d < 0 for d in step.sign_deps):
                raise ValueError(f"step {k} depends on a later or invalid step")
        for a, b in self.edges:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits) or a == b:
                raise ValueError(f"invalid edge ({a}, {b})")

    @property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.num_qubits, self.num_qubits), dtype=int)
        for a, b in self.edges:
            adj[a, b] = adj[b, a] = 1
        return adj

    def frame(self, outcomes: Sequence[int]) -> ByproductFrame:
        def bit(deps):
            return sum(outcomes[k] for k in deps) % 2

        return ByproductFrame(
            tuple(bit(d) for d in self.x_deps),
            tuple(bit(d) for d in self.z_deps),
        )

    def to_json(self) -> str:
        doc = {
            "num_qubits": self.num_qubits,
            "edges": [list(e) for e in self.edges],
            "input_sites": list(self.input_sites),
            "steps": [
                {"site": s.site, "axis": "Z", "alpha": s.alpha, "sign_deps": list(s.sign_deps)}
                for s in self.steps
            ],
            "output_sites": list(self.output_sites),
            "x_deps": [list(d) for d in self.x_deps],
            "z_deps": [list(d) for d in self.z_deps],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementPattern":
        doc = json.loads(text)
        return cls(
            doc["num_qubits"],
            tuple(tuple(e) for e in doc["edges"]),
            tuple(doc["input_sites"]),
            tuple(Step(s["site"], s["alpha"], tuple(s["sign_deps"])) for s in doc["steps"]),
            tuple(doc["output_sites"]),
            tuple(tuple(d) for d in doc["x_deps"]),
            tuple(tuple(d) for d in doc["z_deps"]),
        )


def _lower(gate: Gate) -> list[float]:
    """Angles of the J steps for one single-qubit gate, in application order."""
    if gate.kind == "H":
        return [0.0]
    if gate.kind == "RZ":
        return [gate.angle, 0.0]
    if gate.kind == "RX":
        return [0.0, gate.angle]
    raise UnsupportedGateError(f"unsupported gate {gate.kind}")


def compile(circuit: CircuitIR) -> MeasurementPattern:  # noqa: A001 - domain name
    """Lower a {H, RZ, RX, CZ} circuit to a cluster-wire measurement pattern.

    ``H`` is one J step, ``RZ(t)`` is ``J(0) J(t)`` and ``RX(t)`` is
    ``J(t) J(0)`` (rightmost applied first); both equal the rotation up to a
    global phase.  ``CZ`` toggles a junction edge between the current heads of
    the two wires.
    """
    if circuit.num_wires > MAX_WIRES:
        raise ValueError(f"at most {MAX_WIRES} wires are supported")
    for g in circuit.gates:
        if g.kind not in SUPPORTED_GATES:
            raise UnsupportedGateError(f"unsupported gate {g.kind}")
    nw = circuit.num_wires
    heads = list(range(nw))
    num = nw
    edges: set[tuple[int, int]] = set()
    steps: list[Step] = []
    xd = [frozenset() for _ in range(nw)]
    zd = [frozenset() for _ in range(nw)]
    for g in circuit.gates:
        if g.kind == "CZ":
            a, b = g.wires
            if a == b:
                raise ValueError("CZ needs two distinct wires")
            e = tuple(sorted((heads[a], heads[b])))
            edges ^= {e}
            zd[a], zd[b] = zd[a] ^ xd[b], zd[b] ^ xd[a]
            continue
        (w,) = g.wires
        for alpha in _lower(g):
            nxt = num
            num += 1
            edges ^= {(heads[w], nxt)}
            k = len(steps)
            steps.append(Step(heads[w], float(alpha), tuple(sorted(xd[w]))))
            xd[w], zd[w] = zd[w] ^ {k}, xd[w]
            heads[w] = nxt
    return MeasurementPattern(
        num,
        tuple(sorted(edges)),
        tuple(range(nw)),
        tuple(steps),
        tuple(heads),
        tuple(tuple(sorted(d)) for d in xd),
        tuple(tuple(sorted(d)) for d in zd),
    )


# ---------------------------------------------------------------------------
# execution


@dataclass(frozen=True)
class ExecutionResult:
    raw_output: DenseState
    frame: ByproductFrame
    outcomes: tuple[int, ...]
    probability: float

    def corrected(self) -> DenseState:
        return self.frame.correct(self.raw_output)


def _apply_cz(vec: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    t = vec.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return t.reshape(-1)


def execute(
    pattern: MeasurementPattern,
    input_state: DenseState,
    rng: Optional[np.random.Generator] = None,
    forced_outcomes: Optional[Sequence[int]] = None,
) -> ExecutionResult:
    """Run a pattern on the dense simulator and return the raw output and frame."""
    n = pattern.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise DimensionError(f"resource of {n} qubits exceeds the dense limit")
    if input_state.site_dims != (2,) * len(pattern.input_sites):
        raise DimensionError("input register does not match the pattern's input sites")
    if forced_outcomes is not None and len(forced_outcomes) != len(pattern.steps):
        raise ValueError(f"need {len(pattern.steps)} forced outcomes")
    if forced_outcomes is None and rng is None and pattern.steps:
        raise ValueError("need either forced_outcomes or rng")
    # Register order: input sites first (in wire order), then the rest in index order.
    rest = [q for q in range(n) if q not in pattern.input_sites]
    order = list(pattern.input_sites) + rest
    vec = np.kron(input_state.amplitudes, np.full(2 ** len(rest), 2 ** (-len(rest) / 2)))
    pos = {q: k for k, q in enumerate(order)}
    for a, b in pattern.edges:
        vec = _apply_cz(vec, n, pos[a], pos[b])
    state = DenseState((2,) * n, vec)
    alive = list(order)
    outcomes: list[int] = []
    prob = 1.0
    for k, step in enumerate(pattern.steps):
        basis = step.basis(outcomes).matrix(2)
        forced = None if forced_outcomes is None else forced_outcomes[k]
        res = qmath.measure(state, alive.index(step.site), basis, forced_outcome=forced, rng=rng)
        outcomes.append(res.outcome)
        prob *= res.probability
        alive.remove(step.site)
        state = res.post_state
    perm = [alive.index(q) for q in pattern.output_sites]
    out = np.transpose(state.tensor(), perm).reshape(-1)
    return ExecutionResult(DenseState(state.site_dims, out), pattern.frame(outcomes), tuple(outcomes), prob)


@dataclass(frozen=True)
class CompareReport:
    min_fidelity: float
    mean_fidelity: float
    trials: int
    max_correction_level: int

    def to_dict(self) -> dict:
        return {
            "min_fidelity": self.min_fidelity,
            "mean_fidelity": self.mean_fidelity,
            "trials": self.trials,
            "max_correction_level": self.max_correction_level,
        }


def simulate_and_compare(circuit: CircuitIR, trials: int, seed: int = 0) -> CompareReport:
    """Execute the compiled pattern on random inputs and compare with direct simulation."""
    from .pauli import ch_level

    rng = np.random.default_rng(seed)
    pattern = compile(circuit)
    fids = []
    level = 1
    for _ in range(trials):
        psi = qmath.random_state(circuit.num_wires, rng)
        res = execute(pattern, psi, rng=rng)
        fids.append(qmath.fidelity(res.corrected(), qmath.apply_circuit(circuit, psi)))
        lvl = ch_level(res.frame.correction()).level
        level = max(level, lvl if isinstance(lvl, int) else 99)
    return CompareReport(float(min(fids)), float(np.mean(fids)), trials, level)


def random_circuit(num_wires: int, depth: int, rng: np.random.Generator) -> CircuitIR:
    """Layered random circuit over {H, RZ, RX, CZ}."""
    gates = []
    for _ in range(depth):
        if num_wires > 1 and rng.random() < 0.3:
            a, b = rng.choice(num_wires, size=2, replace=False)
            gates.append(Gate("CZ", (int(a), int(b))))
            continue
        for w in range(num_wires):
            kind = ("H", "RZ", "RX")[int(rng.integers(3))]
            angle = float(rng.uniform(-math.pi, math.pi)) if kind != "H" else None
            gates.append(Gate(kind, (w,), angle))
    return CircuitIR(num_wires, tuple(gates))


# ---------------------------------------------------------------------------
# adaptive sign rules


def derive_sign_rules(angles: Sequence[float] = (0.37, 1.1, -2.3)) -> dict:
    """Derive byproduct propagation through one J step by brute force.

    For each incoming frame ``X^x Z^z`` find the sign ``s`` and outgoing frame
    with ``J((-1)^s a) X^x Z^z = X^x' Z^z' J(a)`` up to phase for all sampled
    angles.  The measurement byproduct ``X^m`` is added on top of ``x'``.
    """
    rules = []
    for x in (0, 1):
        for z in (0, 1):
            frame_in = np.linalg.matrix_power(qmath.X, x) @ np.linalg.matrix_power(qmath.Z, z)
            found = None
            for s in (0, 1):
                for xo in (0, 1):
                    for zo in (0, 1):
                        frame_out = np.linalg.matrix_power(qmath.X, xo) @ np.linalg.matrix_power(qmath.Z, zo)
                        if all(
                            qmath.equal_up_to_phase(
                                j_gate(-a if s else a) @ frame_in, frame_out @ j_gate(a)
                            )
                            for a in angles
                        ):
                            found = (s, xo, zo)
            if found is None:
                raise RuntimeError(f"no sign rule for frame x={x} z={z}")
            s, xo, zo = found
            rules.append({"x": x, "z": z, "negate_angle": bool(s), "x_out": xo, "z_out": zo})
    cz = []
    for xa in (0, 1):
        for xb in (0, 1):
            before = qmath.kron(np.linalg.matrix_power(qmath.X, xa), np.linalg.matrix_power(qmath.X, xb))
            after = qmath.CZ @ before @ qmath.CZ
            cz.append({"x_a": xa, "x_b": xb, "after": _pauli_label(after)})
    return {"measure": rules, "measure_byproduct": "x_out ^= m", "cz": cz}


def _pauli_label(u: np.ndarray) -> str:
    from .pauli import as_phased_pauli

    p = as_phased_pauli(u)
    return str(p)[1:] if p is not None else "?"


def write_sign_rules(path: Path = SIGN_RULES) -> dict:
    rules = derive_sign_rules()
    path.write_text(json.dumps(rules, indent=1, sort_keys=True) + "\n")
    return rules


@lru_cache(maxsize=1)
def sign_rules() -> dict:
    return json.loads(SIGN_RULES.read_text())


# ---------------------------------------------------------------------------
# AKLT heralded wire

_HERALD_LABELS = ("X", "Y", "Z")


@dataclass(frozen=True)
class HeraldRecord:
    """Per step: outcome, heralded Pauli label, and the rotation axis applied (or ``None``)."""

    entries: tuple[tuple[int, str], ...]
    rotations: tuple[Optional[tuple[str, float]], ...] = ()

    def __post_init__(self) -> None:
        if any(lab not in ("I", "X", "Y", "Z") for _, lab in self.entries):
            raise ValueError("herald labels must be I, X, Y or Z")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for _, lab in self.entries)

    def herald_op(self) -> np.ndarray:
        out = np.eye(2, dtype=complex)
        for _, lab in self.entries:
            out = qmath.PAULIS[lab] @ out
        return out

    def reconstruct(self) -> np.ndarray:
        """``prod_k R_k P_k`` from the record alone (latest step leftmost)."""
        out = np.eye(2, dtype=complex)
        for (_, lab), rot in zip(self.entries, self.rotations or [None] * len(self.entries)):
            r = np.eye(2) if rot is None else qmath.expi(rot[1], qmath.PAULIS[rot[0]])
            out = r @ qmath.PAULIS[lab] @ out
        return out


@dataclass(frozen=True)
class AKLTRun:
    logical: np.ndarray = field(repr=False)
    herald: HeraldRecord
    probability: float
    oracle_error: Optional[float] = None


def aklt_logical_run(
    n: int,
    bases: Sequence[BasisSpec],
    rng: Optional[np.random.Generator] = None,
    forced_outcomes: Optional[Sequence[int]] = None,
    verify: bool = False,
) -> AKLTRun:
    """Measure ``n`` sites of the AKLT chain and record the heralded logical action.

    Outcome ``o`` heralds the Pauli ``(X, Y, Z)[o]``.  A step tilted by ``e``
    about ``P`` additionally applies ``exp(i e P)`` when the herald
    anticommutes with ``P``.
    """
    if n > 8:
        raise ValueError("AKLT runs are limited to n <= 8")
    bases = list(bases)
    if len(bases) != n:
        raise ValueError(f"need {n} bases, got {len(bases)}")
    if n == 0:
        return AKLTRun(np.eye(2, dtype=complex), HeraldRecord(()), 1.0, 0.0 if verify else None)
    t = mps.aklt_tensor()
    res = mps.wire_measure(t, n, bases, forced_outcomes=forced_outcomes, rng=rng)
    entries, rots = [], []
    for o, spec in zip(res.outcomes, bases):
        lab = _HERALD_LABELS[o]
        entries.append((o, lab))
        rots.append((spec.axis, spec.theta) if spec.theta != 0 and lab != spec.axis else None)
    err = None
    if verify:
        ora = mps.wire_oracle(t, bases, res.outcomes, res.buffer)
        err = float(np.abs(ora - res.logical_op).max())
    return AKLTRun(res.logical_op, HeraldRecord(tuple(entries), tuple(rots)), res.probability, err)
