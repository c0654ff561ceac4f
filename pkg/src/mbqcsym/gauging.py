"""Spin chains, the toric code and the gauging maps to cluster states.

Toric-code conventions on an ``L x L`` torus: vertices ``(i, j)``; the
horizontal edge ``h(i, j)`` joins ``(i, j)`` and ``(i, j+1)``; the vertical
edge ``v(i, j)`` joins ``(i, j)`` and ``(i+1, j)``; plaquette ``p(i, j)`` has
corners ``(i, j)`` and ``(i+1, j+1)``.  X-cells are vertex stars and Z-cells are
plaquettes.

The gauged lattice sits on a ``2L x 2L`` grid: vertex ``(2i, 2j)``, ``h(i, j)``
at ``(2i, 2j+1)``, ``v(i, j)`` at ``(2i+1, 2j)`` and plaquette ``(2i+1, 2j+1)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import mps, qmath
from .pauli import (
    PauliOp,
    StabilizerGroup,
    canonicalize,
    graph_state,
    graph_state_group,
    groups_equal,
    membership_sign,
    product,
    relabel,
)


# ---------------------------------------------------------------------------
# Hamiltonians


@dataclass(frozen=True)
class Hamiltonian:
    """``H = sum_k c_k P_k`` with Pauli terms on a common register."""

    terms: tuple[tuple[float, PauliOp], ...]

    def __post_init__(self) -> None:
        terms = tuple((float(c), p) for c, p in self.terms)
        if not terms:
            raise ValueError("Hamiltonian needs at least one term")
        if len({p.n for _, p in terms}) != 1:
            raise ValueError("terms act on different register sizes")
        if not all(math.isfinite(c) for c, _ in terms):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    @property
    def ops(self) -> list[PauliOp]:
        return [p for _, p in self.terms]

    def commuting(self) -> bool:
        ops = self.ops
        return all(a.commutes(b) for k, a in enumerate(ops) for b in ops[k + 1:])

    def energy(self, state: qmath.DenseState) -> float:
        return float(sum(c * np.real(state.expectation(p.matrix(), range(self.n))) for c, p in self.terms))

    def term_expectations(self, state: qmath.DenseState) -> list[float]:
        return [float(np.real(state.expectation(p.matrix(), range(self.n)))) for p in self.ops]

    def to_dict(self) -> dict:
        return {"terms": [[c, str(p)] for c, p in self.terms]}


def spin_chain_model(kind: str, n: int, periodic: bool = True) -> Hamiltonian:
    """Ising ``-sum X_i X_{i+1}`` or cluster ``-sum X_{i-1} Z_i X_{i+1}``."""
    if n < 3:
        raise ValueError("chain length must be at least 3")
    terms = []
    if kind == "ising":
        last = n if periodic else n - 1
        for i in range(last):
            terms.append((-1.0, PauliOp.from_sites(n, {i: "X", (i + 1) % n: "X"})))
    elif kind == "cluster":
        centers = range(n) if periodic else range(1, n - 1)
        for i in centers:
            terms.append((-1.0, PauliOp.from_sites(n, {(i - 1) % n: "X", i: "Z", (i + 1) % n: "X"})))
    else:
        raise ValueError(f"kind must be 'ising' or 'cluster', got {kind!r}")
    return Hamiltonian(tuple(terms))


@dataclass(frozen=True)
class Gauge1DReport:
    pre_model: Hamiltonian
    post_model: Hamiltonian
    ghz_check: tuple[float, ...]
    cluster_check: tuple[float, ...]
    symmetry_map: dict

    @property
    def ok(self) -> bool:
        return (
            all(abs(v - 1) < 1e-10 for v in self.ghz_check)
            and all(abs(v - 1) < 1e-10 for v in self.cluster_check)
            and all(self.symmetry_map.values())
        )

    def to_dict(self) -> dict:
        return {
            "pre_model": self.pre_model.to_dict(),
            "post_model": self.post_model.to_dict(),
            "ghz_check": list(self.ghz_check),
            "cluster_check": list(self.cluster_check),
            "symmetry_map": self.symmetry_map,
            "ok": self.ok,
        }


def gauge_1d(n: int) -> Gauge1DReport:
    """Ising chain vs cluster chain on a ring of ``n`` sites."""
    if n < 4:
        raise ValueError("gauge_1d needs n >= 4")
    ising = spin_chain_model("ising", n, True)
    cluster = spin_chain_model("cluster", n, True)
    ghz_state = mps.contract(mps.ghz_tensor(), n, "periodic")
    cluster_state = mps.contract(mps.cluster_tensor(), n, "periodic")
    all_z = PauliOp.from_sites(n, {i: "Z" for i in range(n)})
    even_z = PauliOp.from_sites(n, {i: "Z" for i in range(0, n, 2)})
    odd_z = PauliOp.from_sites(n, {i: "Z" for i in range(1, n, 2)})
    smap = {
        "global_z_commutes_with_ising": all(all_z.commutes(p) for p in ising.ops),
        "global_z_commutes_with_cluster": all(all_z.commutes(p) for p in cluster.ops),
        "global_z_is_sublattice_product": even_z * odd_z == all_z,
        "even_sublattice_commutes": n % 2 == 0 and all(even_z.commutes(p) for p in cluster.ops),
        "odd_sublattice_commutes": n % 2 == 0 and all(odd_z.commutes(p) for p in cluster.ops),
    }
    return Gauge1DReport(
        ising,
        cluster,
        tuple(ising.term_expectations(ghz_state)),
        tuple(cluster.term_expectations(cluster_state)),
        smap,
    )


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class Line:
    name: str
    z_support: tuple[int, ...]
    x_support: tuple[int, ...]


@dataclass(frozen=True)
class CellLattice:
    """Qubit registry of a periodic cell lattice.

    Keys are ``(kind, n, m)`` with kind in ``edge_h``, ``edge_v``, ``x_cell``
    and ``z_cell``; values are qubit indices.
    """

    L_x: int
    L_y: int
    periodic: bool
    registry: dict = field(repr=False)
    kind: str = "toric"

    def __post_init__(self) -> None:
        idx = sorted(self.registry.values())
        if idx != list(range(len(idx))):
            raise ValueError("registry must be a bijection onto 0..N-1")

    @property
    def num_qubits(self) -> int:
        return len(self.registry)

    def index(self, kind: str, n: int, m: int) -> int:
        return self.registry[(kind, n % self.L_x, m % self.L_y)]

    def grid_position(self, key) -> tuple[int, int]:
        kind, i, j = key
        return {
            "x_cell": (2 * i, 2 * j),
            "edge_h": (2 * i, 2 * j + 1),
            "edge_v": (2 * i + 1, 2 * j),
            "z_cell": (2 * i + 1, 2 * j + 1),
        }[kind]

    def grid_map(self) -> list[int]:
        """Qubit index -> vertex index ``x * 2L + y`` of the ``2L x 2L`` grid."""
        side = 2 * self.L_x
        out = [0] * self.num_qubits
        for key, q in self.registry.items():
            x, y = self.grid_position(key)
            out[q] = x * side + y
        return out

    def lines(self) -> list[Line]:
        if self.kind == "toric":
            return self._toric_lines()
        return self._gauged_lines()

    def _toric_lines(self) -> list[Line]:
        L = self.L_x
        out = []
        for i in range(L):
            out.append(Line(
                f"horizontal {i}",
                tuple(self.index("edge_h", i, j) for j in range(L)),
                tuple(self.index("edge_v", i, j) for j in range(L)),
            ))
        for j in range(L):
            out.append(Line(
                f"vertical {j}",
                tuple(self.index("edge_v", i, j) for i in range(L)),
                tuple(self.index("edge_h", i, j) for i in range(L)),
            ))
        return out

    def _gauged_lines(self) -> list[Line]:
        # Rows and columns of the 45-degree rotated frame are grid diagonals.
        side = 2 * self.L_x
        pos = {self.grid_position(k): q for k, q in self.registry.items()}
        out = []
        for c in range(side):
            diag = tuple(pos[(x, (x - c) % side)] for x in range(side))
            anti = tuple(pos[(x, (c - x) % side)] for x in range(side))
            out.append(Line(f"horizontal {c}", diag, diag))
            out.append(Line(f"vertical {c}", anti, anti))
        return out

    def to_json(self) -> str:
        reg = [
            {"kind": k, "n": n, "m": m, "qubit": q, "grid": list(self.grid_position((k, n, m)))}
            for (k, n, m), q in sorted(self.registry.items(), key=lambda kv: kv[1])
        ]
        return json.dumps(
            {"L_x": self.L_x, "L_y": self.L_y, "periodic": self.periodic, "kind": self.kind, "registry": reg},
            sort_keys=True,
        )


def _edge_registry(L: int) -> dict:
    reg = {}
    for i in range(L):
        for j in range(L):
            reg[("edge_h", i, j)] = len(reg)
    for i in range(L):
        for j in range(L):
            reg[("edge_v", i, j)] = len(reg)
    return reg


def _star_edges(lat: CellLattice, i: int, j: int) -> list[int]:
    return [
        lat.index("edge_h", i, j),
        lat.index("edge_h", i, j - 1),
        lat.index("edge_v", i, j),
        lat.index("edge_v", i - 1, j),
    ]


def _plaquette_edges(lat: CellLattice, i: int, j: int) -> list[int]:
    return [
        lat.index("edge_h", i, j),
        lat.index("edge_h", i + 1, j),
        lat.index("edge_v", i, j),
        lat.index("edge_v", i, j + 1),
    ]


def _ops(n: int, sites: dict) -> PauliOp:
    return PauliOp.from_sites(n, sites)


def toric_code(L: int) -> tuple[CellLattice, StabilizerGroup]:
    """Toric code on the ``L x L`` torus with one dependent star and plaquette dropped.

    The full set of ``L^2`` star and ``L^2`` plaquette operators obeys the two
    global relations (product of all stars, product of all plaquettes), so the
    independent generator set has ``2L^2 - 2`` elements.
    """
    if L < 2:
        raise ValueError("toric code needs L >= 2")
    lat = CellLattice(L, L, True, _edge_registry(L), "toric")
    stars, plaqs = toric_cells(lat)
    return lat, StabilizerGroup(lat.num_qubits, tuple(stars[:-1] + plaqs[:-1]))


def toric_cells(lat: CellLattice) -> tuple[list[PauliOp], list[PauliOp]]:
    """All ``L^2`` star (X-cell) and ``L^2`` plaquette (Z-cell) operators."""
    L, n = lat.L_x, lat.num_qubits
    stars, plaqs = [], []
    for i in range(L):
        for j in range(L):
            stars.append(_ops(n, {e: "X" for e in _star_edges(lat, i, j)}))
            plaqs.append(_ops(n, {e: "Z" for e in _plaquette_edges(lat, i, j)}))
    return stars, plaqs


# ---------------------------------------------------------------------------
# 2D gauging


@dataclass(frozen=True)
class StageRecord:
    stage: int
    action: str
    cell: str
    before: Optional[str]
    after: str

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("stage", "action", "cell", "before", "after")}


class GaugingError(RuntimeError):
    """An intermediate generator set fails to commute."""


def _check_commuting(ops: Sequence[PauliOp], stage: int) -> None:
    for k, a in enumerate(ops):
        for b in ops[k + 1:]:
            if not a.commutes(b):
                raise GaugingError(f"stage {stage}: {a} and {b} anticommute")


def _edge_ends(lat: CellLattice, kind: str, i: int, j: int):
    """Stars at both ends and plaquettes on both sides of an edge."""
    L = lat.L_x
    if kind == "edge_h":
        stars = [(i, j), (i, (j + 1) % L)]
        plaqs = [(i, j), ((i - 1) % L, j)]
    else:
        stars = [(i, j), ((i + 1) % L, j)]
        plaqs = [(i, j), (i, (j - 1) % L)]
    return stars, plaqs


def gauge_2d(L: int) -> tuple[CellLattice, StabilizerGroup, list[StageRecord]]:
    """Two-stage gauging of the ``L x L`` toric code into a 2D cluster state."""
    if L < 2:
        raise ValueError("gauge_2d needs L >= 2")
    reg = _edge_registry(L)
    for i in range(L):
        for j in range(L):
            reg[("x_cell", i, j)] = len(reg)
    for i in range(L):
        for j in range(L):
            reg[("z_cell", i, j)] = len(reg)
    lat = CellLattice(L, L, True, reg, "gauged")
    n = lat.num_qubits
    log: list[StageRecord] = []

    # Toric generators embedded in the enlarged register.
    base = CellLattice(L, L, True, _edge_registry(L), "toric")
    stars, plaqs = toric_cells(base)
    edge_ids = list(range(2 * L * L))
    stars = [s.embedded(n, edge_ids) for s in stars]
    plaqs = [p.embedded(n, edge_ids) for p in plaqs]

    # Stage 1: gauge qubit in every X-cell.
    star_terms = []
    for k, (i, j) in enumerate(_cells(L)):
        new = stars[k] * _ops(n, {lat.index("x_cell", i, j): "Z"})
        log.append(StageRecord(1, "modify", f"x_cell {i} {j}", str(stars[k]), str(new)))
        star_terms.append(new)
    edge_terms = {}
    for kind in ("edge_h", "edge_v"):
        for i, j in _cells(L):
            s_ends, _ = _edge_ends(lat, kind, i, j)
            sites = {lat.index(kind, i, j): "Z"}
            for si, sj in s_ends:
                sites[lat.index("x_cell", si, sj)] = "X"
            term = _ops(n, sites)
            edge_terms[(kind, i, j)] = term
            log.append(StageRecord(1, "add", f"{kind} {i} {j}", None, str(term)))
    for k, (i, j) in enumerate(_cells(L)):
        around = [
            edge_terms[("edge_h", i, j)],
            edge_terms[("edge_h", (i + 1) % L, j)],
            edge_terms[("edge_v", i, j)],
            edge_terms[("edge_v", i, (j + 1) % L)],
        ]
        if product(around, n) != plaqs[k]:
            raise GaugingError(f"Z-cell {i} {j}: plaquette is not the product of its gauge terms")
        log.append(StageRecord(1, "check", f"z_cell {i} {j}", str(plaqs[k]), "product of 4 gauge terms"))
    _check_commuting(star_terms + list(edge_terms.values()) + plaqs, 1)

    # Stage 2: gauge qubit in every Z-cell.
    final = list(star_terms)
    for (kind, i, j), term in edge_terms.items():
        _, p_sides = _edge_ends(lat, kind, i, j)
        extra = _ops(n, {lat.index("z_cell", pi, pj): "X" for pi, pj in p_sides})
        new = term * extra
        log.append(StageRecord(2, "modify", f"{kind} {i} {j}", str(term), str(new)))
        final.append(new)
    for i, j in _cells(L):
        sites = {e: "X" for e in _plaquette_edges(lat, i, j)}
        sites[lat.index("z_cell", i, j)] = "Z"
        term = _ops(n, sites)
        log.append(StageRecord(2, "add", f"z_cell {i} {j}", None, str(term)))
        final.append(term)
    _check_commuting(final, 2)
    group = StabilizerGroup(n, tuple(final))
    if group.rank != n:
        raise GaugingError(f"final group has rank {group.rank}, expected {n}")
    log.append(StageRecord(0, "identify", "grid", None, json.dumps(lat.grid_map())))
    return lat, group, log


def _cells(L: int):
    return [(i, j) for i in range(L) for j in range(L)]


def torus_adjacency(side: int) -> np.ndarray:
    n = side * side
    adj = np.zeros((n, n), dtype=int)
    for x in range(side):
        for y in range(side):
            a = x * side + y
            for dx, dy in ((1, 0), (0, 1)):
                b = ((x + dx) % side) * side + (y + dy) % side
                adj[a, b] = adj[b, a] = 1
    return adj


def cluster_2d_group(L2: int) -> StabilizerGroup:
    """Graph-state group ``X_v Z_{N(v)}`` of the ``L2 x L2`` periodic square lattice."""
    if L2 % 2:
        raise ValueError("L2 must be even")
    if L2 <= 2:
        raise ValueError("L2 = 2 gives multi-edges on the torus")
    return graph_state_group(torus_adjacency(L2))


def identified_group(lat: CellLattice, group: StabilizerGroup) -> StabilizerGroup:
    """Relabel onto grid vertices and apply a global Hadamard (Z-X swap).

    The gauged generators have the form ``Z_a X_{N(a)}``; the Hadamard dual
    brings them to the standard graph-state form ``X_a Z_{N(a)}``.
    """
    mapping = lat.grid_map()
    ops = tuple(relabel(g, mapping, group.n).hadamard_dual() for g in group.generators)
    return StabilizerGroup(group.n, ops)


def gauged_matches_cluster(L: int) -> bool:
    lat, group, _ = gauge_2d(L)
    return groups_equal(identified_group(lat, group), cluster_2d_group(2 * L))


def dense_cross_check(L: int = 2) -> float:
    """Fidelity between the gauged stabilizer state and the CZ-built cluster state."""
    lat, group, _ = gauge_2d(L)
    ident = identified_group(lat, group)
    target = graph_state(torus_adjacency(2 * L))
    return qmath.fidelity(ident.state(), target)


# ---------------------------------------------------------------------------
# line operators


@dataclass(frozen=True)
class LineReport:
    name: str
    z_line_in_group: bool
    z_line_commutes: bool
    x_line_commutes: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "z_line_in_group": self.z_line_in_group,
            "z_line_commutes": self.z_line_commutes,
            "x_line_commutes": self.x_line_commutes,
        }


def line_symmetry_report(group: StabilizerGroup, lattice: CellLattice) -> list[LineReport]:
    out = []
    gens = canonicalize(group)
    for line in lattice.lines():
        zl = _ops(group.n, {q: "Z" for q in line.z_support})
        xl = _ops(group.n, {q: "X" for q in line.x_support})
        out.append(LineReport(
            line.name,
            membership_sign(group, zl) == 1,
            all(zl.commutes(g) for g in gens),
            all(xl.commutes(g) for g in gens),
        ))
    return out
