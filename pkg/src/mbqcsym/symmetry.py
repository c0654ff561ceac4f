"""Symmetry actions on site tensors.

A global action satisfies ``sum_j U_ij A_j = V A_i V^dag``.  Gauge actions act
on a single virtual leg, and the two-sided form ``sum_j U_ij A_j = L A_i R``
yields local stabilizers of the contracted chain.  Residuals are maximum
entrywise magnitudes.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import pauli, qmath
from .mps import SiteTensor, contract

SYMMETRY_TOL = 1e-12
PROJECTIVE_TOL = 1e-10


@dataclass(frozen=True)
class SymmetryAction:
    """Group generator with physical and virtual representatives.

    ``virtual_right`` is only used by two-sided (gauge-type) relations; when it
    is ``None`` the right action is ``virtual_left^dag``.
    """

    label: str
    physical_op: np.ndarray = field(repr=False)
    virtual_left: np.ndarray = field(repr=False)
    virtual_right: Optional[np.ndarray] = field(default=None, repr=False)
    blocking: int = 1

    def __post_init__(self) -> None:
        if self.blocking not in (1, 2):
            raise ValueError(f"blocking must be 1 or 2, got {self.blocking}")
        for name in ("physical_op", "virtual_left", "virtual_right"):
            op = getattr(self, name)
            if op is None:
                continue
            op = np.asarray(op, dtype=complex)
            qmath.check_unitary(op, name)
            object.__setattr__(self, name, op)

    @property
    def right(self) -> np.ndarray:
        if self.virtual_right is None:
            return self.virtual_left.conj().T
        return self.virtual_right

    def compose(self, other: "SymmetryAction") -> "SymmetryAction":
        """Action of ``self`` followed by ``other`` (global conjugation form).

        Mixing the physical index reverses the order on the bond: physical
        ``U_h U_g`` pairs with virtual ``V_g V_h``.
        """
        if self.blocking != other.blocking:
            raise ValueError("cannot compose actions with different blocking")
        return SymmetryAction(
            f"{self.label}*{other.label}",
            other.physical_op @ self.physical_op,
            self.virtual_left @ other.virtual_left,
            blocking=self.blocking,
        )


def blocked_ops(t: SiteTensor, blocking: int) -> np.ndarray:
    """Effective tensor ``A_{i_1...i_b} = A_{i_1} ... A_{i_b}`` (row-major index)."""
    ops = t.ops
    bond = t.bond_dim
    out = np.eye(bond, dtype=complex)[None]
    for _ in range(blocking):
        out = np.einsum("mab,ibc->miac", out, ops).reshape(-1, bond, bond)
    return out


def _mix(u: np.ndarray, ops: np.ndarray) -> np.ndarray:
    if u.shape != (len(ops), len(ops)):
        raise qmath.DimensionError(
            f"physical operator shape {u.shape} does not match {len(ops)} physical indices"
        )
    return np.einsum("ij,jab->iab", u, ops)


def _check_bond(op: np.ndarray, bond: int) -> None:
    if op.shape != (bond, bond):
        raise qmath.DimensionError(f"virtual operator shape {op.shape} != bond {bond}")


def global_residual(t: SiteTensor, act: SymmetryAction) -> float:
    """``max_i |sum_j U_ij A_j - V A_i V^dag|`` on the blocked tensor."""
    ops = blocked_ops(t, act.blocking)
    v = act.virtual_left
    _check_bond(v, t.bond_dim)
    lhs = _mix(act.physical_op, ops)
    rhs = np.einsum("ab,ibc,dc->iad", v, ops, v.conj())
    return float(np.abs(lhs - rhs).max())


def gauge_residual(
    t: SiteTensor,
    physical_op: np.ndarray,
    virtual_side: str,
    virtual_op: Optional[np.ndarray] = None,
) -> float:
    """Residual of the one-leg relation ``sum_j U_ij A_j = A_i W`` (right) or ``W A_i`` (left).

    With ``virtual_op=None`` the best unconstrained ``W`` is fitted by least
    squares, so a large value certifies that no one-leg action exists.
    """
    ops = t.ops
    bond = t.bond_dim
    lhs = _mix(np.asarray(physical_op, dtype=complex), ops)
    if virtual_side not in ("left", "right"):
        raise ValueError(f"virtual_side must be 'left' or 'right', got {virtual_side!r}")
    if virtual_op is None:
        virtual_op = _fit_one_leg(ops, lhs, virtual_side)
    virtual_op = np.asarray(virtual_op, dtype=complex)
    _check_bond(virtual_op, bond)
    if virtual_side == "right":
        rhs = ops @ virtual_op
    else:
        rhs = virtual_op @ ops
    return float(np.abs(lhs - rhs).max())


def _fit_one_leg(ops: np.ndarray, target: np.ndarray, side: str) -> np.ndarray:
    bond = ops.shape[1]
    if side == "right":
        # rows of A_i W: stack A_i vertically
        a = ops.reshape(-1, bond)
        b = target.reshape(-1, bond)
        w, *_ = np.linalg.lstsq(a, b, rcond=None)
        return w
    a = ops.transpose(2, 0, 1).reshape(-1, bond)  # columns of A_i as rows of A_i^T
    b = target.transpose(2, 0, 1).reshape(-1, bond)
    wt, *_ = np.linalg.lstsq(a, b, rcond=None)
    return wt.T


class ProjectivePhaseError(ValueError):
    """The group commutator is not proportional to the identity."""


def projective_phase(v_g: np.ndarray, v_h: np.ndarray) -> complex:
    """Phase ``w`` with ``V_g V_h = w V_h V_g``."""
    v_g = np.asarray(v_g, dtype=complex)
    v_h = np.asarray(v_h, dtype=complex)
    comm = v_g @ v_h @ v_g.conj().T @ v_h.conj().T
    w = comm[0, 0]
    if np.abs(comm - w * np.eye(len(comm))).max() > PROJECTIVE_TOL or abs(abs(w) - 1) > PROJECTIVE_TOL:
        raise ProjectivePhaseError("commutator is not a scalar phase")
    return complex(w)


def discover_actions(t: SiteTensor, blocking: int = 1) -> list[SymmetryAction]:
    """Verified (U, V) pairs with U a product of single-site Paulis and V a Pauli.

    For each physical operator the first Pauli ``V`` in I, X, Y, Z order is
    recorded; for non-injective tensors ``V`` is only fixed up to the
    commutant of the tensor algebra, and this choice makes it canonical.
    """
    if t.phys_dim != 2:
        raise ValueError("Pauli search needs qubit sites")
    nb = int(round(math.log2(t.bond_dim)))
    if 2**nb != t.bond_dim:
        raise ValueError("bond dimension must be a power of two")
    found = []
    virtuals = pauli.pauli_basis(nb) if nb else []
    for phys in pauli.pauli_basis(blocking)[1:]:
        u = phys.matrix()
        for virt in virtuals or [None]:
            v = virt.matrix() if virt is not None else np.eye(1, dtype=complex)
            act = SymmetryAction(str(phys)[1:], u, v, blocking=blocking)
            if global_residual(t, act) < SYMMETRY_TOL:
                found.append(act)
                break
    return found


def find_action(t: SiteTensor, label: str) -> Optional[SymmetryAction]:
    """Verified action whose physical op is the Pauli string ``label``."""
    for act in discover_actions(t, blocking=len(label)):
        if act.label == label:
            return act
    return None


# ---------------------------------------------------------------------------
# symmetry-derived stabilizers


def realize_right(t: SiteTensor, m: np.ndarray) -> Optional[np.ndarray]:
    """Physical ``O`` with ``sum_j O_ij A_j = A_i M``, or ``None`` if none exists."""
    return _realize(t, np.einsum("iab,bc->iac", t.ops, m))


def realize_left(t: SiteTensor, m: np.ndarray) -> Optional[np.ndarray]:
    """Physical ``O`` with ``sum_j O_ij A_j = M A_i``, or ``None`` if none exists."""
    return _realize(t, np.einsum("ab,ibc->iac", m, t.ops))


def _realize(t: SiteTensor, target: np.ndarray) -> Optional[np.ndarray]:
    flat = t.ops.reshape(t.phys_dim, -1)
    tgt = target.reshape(t.phys_dim, -1)
    sol, *_ = np.linalg.lstsq(flat.T, tgt.T, rcond=None)
    o = sol.T
    if np.abs(o @ flat - tgt).max() > 1e-10:
        return None
    return o


@dataclass(frozen=True)
class StabilizerReport:
    holds: bool
    worst_expectation: float
    expectations: tuple[float, ...]
    left_op: Optional[np.ndarray] = field(default=None, repr=False)
    right_op: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "worst_expectation": self.worst_expectation,
            "expectations": list(self.expectations),
        }


def symmetry_stabilizer_check(
    t: SiteTensor, act: SymmetryAction, n: int, tol: float = 1e-10
) -> StabilizerReport:
    """Check the three-site operator built from ``sum_j U_ij A_j = L A_i R``.

    ``L`` is cancelled by a physical operator on site ``k-1`` realizing right
    multiplication by ``L^-1``, and ``R`` by one on site ``k+1`` realizing left
    multiplication by ``R^-1``.  The product must have expectation 1 on every
    bulk site of the open chain.
    """
    if act.blocking != 1:
        raise ValueError("stabilizer check works on unblocked actions")
    if n > 10 or n < 3:
        raise ValueError("chain length must be in 3..10")
    left, right = act.virtual_left, act.right
    lhs = _mix(act.physical_op, t.ops)
    rhs = np.einsum("ab,ibc,cd->iad", left, t.ops, right)
    if np.abs(lhs - rhs).max() > tol:
        return StabilizerReport(False, 0.0, ())
    o_prev = realize_right(t, np.linalg.inv(left))
    o_next = realize_left(t, np.linalg.inv(right))
    if o_prev is None or o_next is None:
        return StabilizerReport(False, 0.0, ())
    state = contract(t, n)
    op = qmath.kron(o_prev, act.physical_op, o_next)
    vals = tuple(
        float(np.real(state.expectation(op, [k - 1, k, k + 1]))) for k in range(1, n - 1)
    )
    worst = min(vals, key=lambda v: abs(v - 1))
    holds = all(abs(v - 1) < tol for v in vals)
    return StabilizerReport(holds, worst, vals, o_prev, o_next)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class SymmetryReport:
    tensor: str
    actions: tuple[tuple[str, float], ...]
    projective_phases: tuple[tuple[str, str, float, float], ...]
    stabilizer: Optional[dict] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def symmetry_report(t: SiteTensor, blocking: int = 2, n: int = 6) -> SymmetryReport:
    acts = discover_actions(t, blocking)
    residuals = tuple((a.label, global_residual(t, a)) for a in acts)
    phases = []
    for a, b in itertools.combinations(acts, 2):
        w = projective_phase(a.virtual_left, b.virtual_left)
        phases.append((a.label, b.label, float(w.real), float(w.imag)))
    return SymmetryReport(t.name, residuals, tuple(phases))
