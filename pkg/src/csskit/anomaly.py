"""Defects in spacetime, their partition functions, and anomaly inflow.

Time is a periodic circle of L_tau intervals. A chain on the product complex
is split into time slices: cells times a point {k} and cells times an
interval [k, k+1]. Half-integer times k+1/2 are stored at index k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import (
    ComplexError,
    CssComplex,
    FoliatedComplex,
    GradedComplex,
    circle,
    foliate,
    intersection,
    tensor_product,
)
from .f2 import BitVector, kernel_basis
from .pauli import PauliOperator, StabilizerSet, cluster_stabilizers, css_stabilizers
from .statesim import DEFAULT_CAP, StateVector, build_cluster_state, check_cap, pauli_on_rows


class DefectError(ValueError):
    """A chain fails a (relative) cycle condition; ``slice_index`` names the time step."""

    def __init__(self, message: str, slice_index: int | None = None):
        super().__init__(message if slice_index is None else f"{message} (time slice {slice_index})")
        self.slice_index = slice_index


class TraceCapExceeded(ValueError):
    pass


DENSE_TRACE_LIMIT = 12


def _time_labels(L_tau: int):
    circ = circle(L_tau)
    return circ, circ.grades[0], circ.grades[1]  # intervals, points


class _SlicedProduct:
    """Index bookkeeping for base ⊗ circle(L_tau)."""

    def __init__(self, base: GradedComplex, L_tau: int):
        if L_tau < 1:
            raise ComplexError("L_tau must be at least 1")
        self.base = base
        self.L_tau = L_tau
        circ, ints, pts = _time_labels(L_tau)
        self.complex = tensor_product(base, circ)
        # where[(base_grade, 'pt'|'int')][i, k] = index in product grade base_grade + (1 or 0)
        self.where: dict[tuple[int, str], np.ndarray] = {}
        for g, cells in enumerate(base.grades):
            for kind, tlabels, shift in (("pt", pts, 1), ("int", ints, 0)):
                pg = g + shift
                arr = np.empty((len(cells), L_tau), dtype=np.int64)
                for i, c in enumerate(cells):
                    for k, t in enumerate(tlabels):
                        arr[i, k] = self.complex.index(pg, c.product(t))
                self.where[(g, kind)] = arr

    def grade_of(self, base_grade: int, kind: str) -> int:
        return base_grade + (1 if kind == "pt" else 0)

    def slice(self, v: BitVector, base_grade: int, kind: str, k: int) -> BitVector:
        bits = v.bits()
        return BitVector.from_bits(bits[self.where[(base_grade, kind)][:, k % self.L_tau]])

    def place(self, grade: int, parts: Sequence[tuple[int, str, int, BitVector]]) -> BitVector:
        """Assemble a product chain from (base grade, time kind, k, base chain) pieces."""
        bits = np.zeros(self.complex.size(grade), dtype=np.uint8)
        for bg, kind, k, v in parts:
            if self.grade_of(bg, kind) != grade:
                raise ComplexError("piece does not live in the requested grade")
            bits[self.where[(bg, kind)][v.support(), k % self.L_tau]] ^= 1
        return BitVector.from_bits(bits)


# Boundary spacetime: CSS ⊗ circle


@dataclass
class BoundarySlices:
    """z = sum c_q[k] x {k} + z_x[k] x [k,k+1];  z* = sum zs_z[k] x {k} + cs_q[k] x [k,k+1]."""

    c_q: list[BitVector]
    z_x: list[BitVector]
    zs_z: list[BitVector]
    cs_q: list[BitVector]


class BoundarySpacetime(_SlicedProduct):
    """CSS ⊗ circle. Grade 2 = q x pt ⊕ X x int holds z; grade 1 = Z x pt ⊕ q x int holds z*."""

    def __init__(self, css: CssComplex, L_tau: int):
        super().__init__(css, L_tau)
        self.css = css

    def decompose(self, z: BitVector, zs: BitVector) -> BoundarySlices:
        c = self.complex
        if not c.differentiate(2, z).is_zero():
            bad = self._first_bad(c.differentiate(2, z), 2, "pt")
            raise DefectError("boundary defect z is not a cycle", bad)
        if not c.codifferentiate(1, zs).is_zero():
            bad = self._first_bad(c.codifferentiate(1, zs), 0, "int")
            raise DefectError("boundary defect z* is not a dual cycle", bad)
        L = self.L_tau
        return BoundarySlices(
            [self.slice(z, 1, "pt", k) for k in range(L)],
            [self.slice(z, 2, "int", k) for k in range(L)],
            [self.slice(zs, 0, "pt", k) for k in range(L)],
            [self.slice(zs, 1, "int", k) for k in range(L)],
        )

    def _first_bad(self, v: BitVector, base_grade: int, kind: str) -> int | None:
        idx = self.where[(base_grade, kind)]
        bits = v.bits()
        for k in range(self.L_tau):
            if bits[idx[:, k]].any():
                return k
        return None

    def gauge_z(self, a_z: Sequence[BitVector], b_q: Sequence[BitVector]) -> BitVector:
        """d of sum a_z[k] x {k} + b_q[k] x [k,k+1]."""
        L = self.L_tau
        c = self.place(1, [(0, "pt", k, a_z[k]) for k in range(L)] + [(1, "int", k, b_q[k]) for k in range(L)])
        return self.complex.differentiate(1, c)

    def gauge_zs(self, a_q: Sequence[BitVector], b_x: Sequence[BitVector]) -> BitVector:
        """d* of sum a_q[k] x {k} + b_x[k] x [k,k+1]."""
        L = self.L_tau
        c = self.place(2, [(1, "pt", k, a_q[k]) for k in range(L)] + [(2, "int", k, b_x[k]) for k in range(L)])
        return self.complex.codifferentiate(2, c)


def build_boundary_spacetime(css: CssComplex, L_tau: int) -> BoundarySpacetime:
    return BoundarySpacetime(css, L_tau)


def boundary_projector_stabilizers(css: CssComplex, z_x0: BitVector, zs_z0: BitVector) -> StabilizerSet:
    """Signed CSS stabilizers fixing the initial excitations."""
    st = css_stabilizers(css)
    flips = list(z_x0.bits()) + list(zs_z0.bits())
    return st.with_signs(flips)


def boundary_operator_sequence(css: CssComplex, s: BoundarySlices) -> list[PauliOperator]:
    """Insertions applied to the initial projector, earliest first."""
    n = css.num_qubits
    L = len(s.c_q)
    ops = []
    for k in range(1, L + 1):
        ops.append(PauliOperator.X(n, s.cs_q[k - 1]))
        ops.append(PauliOperator.Z(n, s.c_q[k % L]))
    return ops


def boundary_partition_trace(css: CssComplex, z: BitVector, zs: BitVector, L_tau: int,
                             route: str = "dense") -> float:
    """Tr[Z(c_q^(L)) X(c*^(L-1/2)) ... Z(c_q^(1)) X(c*^(1/2)) P(z_X^(0), z*_Z^(0))]."""
    bst = BoundarySpacetime(css, L_tau)
    s = bst.decompose(z, zs)
    ops = boundary_operator_sequence(css, s)
    if route == "dense":
        return _dense_boundary_trace(css, s, ops)
    if route == "stabilizer":
        return _stabilizer_boundary_trace(css, s, ops)
    raise ValueError(f"unknown route {route!r}")


def _dense_boundary_trace(css: CssComplex, s: BoundarySlices, ops: Sequence[PauliOperator]) -> float:
    n = css.num_qubits
    if n > DENSE_TRACE_LIMIT:
        raise TraceCapExceeded(f"dense boundary trace limited to {DENSE_TRACE_LIMIT} qubits")
    m = np.eye(1 << n, dtype=complex)
    for g in boundary_projector_stabilizers(css, s.z_x[0], s.zs_z[0]).generators:
        m = 0.5 * (m + pauli_on_rows(g, m))
    for op in ops:
        m = pauli_on_rows(op, m)
    tr = np.trace(m)
    return float(tr.real)


def _stabilizer_boundary_trace(css: CssComplex, s: BoundarySlices, ops: Sequence[PauliOperator]) -> float:
    """Tr[P Proj] = 2^{n - rank} * (sign of P in the signed group), or 0."""
    from .f2 import solve

    n = css.num_qubits
    stabs = boundary_projector_stabilizers(css, s.z_x[0], s.zs_z[0])
    p = PauliOperator.identity(n)
    for op in ops:
        p = op * p
    gens = stabs.generators
    r = stabs.symplectic_rank()
    if not gens:
        return float(2 ** n) if p == PauliOperator.identity(n) else 0.0
    mat = stabs.symplectic_matrix()
    # the projector vanishes when the signed generators are inconsistent
    for rel in kernel_basis(mat.T):
        prod = PauliOperator.identity(n)
        for i in rel.support():
            prod = prod * gens[i]
        if prod != PauliOperator.identity(n):
            return 0.0
    coeffs = solve(mat.T, p.symplectic())
    if coeffs is None:
        return 0.0
    member = PauliOperator.identity(n)
    for i in coeffs.support():
        member = member * gens[i]
    diff = (p.phase - member.phase) % 4
    value = 2 ** (n - r) * (1j ** diff)
    return float(value.real)


def boundary_gauge_ratio(css: CssComplex, z: BitVector, zs: BitVector, L_tau: int,
                         c_gauge: BitVector | None = None, cs_gauge: BitVector | None = None,
                         route: str = "dense") -> tuple[float, int]:
    """(Z[shifted]/Z[original], closed-form phase) for a boundary gauge shift."""
    bst = BoundarySpacetime(css, L_tau)
    z2, zs2 = z, zs
    phase = 0
    if c_gauge is not None:
        z2 = z ^ bst.complex.differentiate(1, c_gauge)
        phase ^= intersection(c_gauge, zs)
    if cs_gauge is not None:
        zs2 = zs ^ bst.complex.codifferentiate(2, cs_gauge)
        # pairs with z after its own shift, which picks up the cross term dc . c*
        phase ^= intersection(z2, cs_gauge)
    before = boundary_partition_trace(css, z, zs, L_tau, route)
    after = boundary_partition_trace(css, z2, zs2, L_tau, route)
    if before == 0:
        raise ZeroDivisionError("boundary partition function vanishes for these defects")
    return after / before, (-1) ** phase


# Bulk spacetime: foliation ⊗ circle


@dataclass
class DefectChain:
    kind: str                   # "relative" or "dual"
    support: BitVector          # grade-2 chain of the spacetime complex
    space: list[BitVector]      # relative: c_Q1[k];  dual: zs_Q1[k]
    time: list[BitVector]       # relative: z_Q2[k] on [k,k+1];  dual: cs_Q2[k] at k+1/2
    boundary: list[BoundarySlices | None] = field(default_factory=list)  # traces at w=0, w=L_w


class SpacetimeComplex(_SlicedProduct):
    """Foliated complex ⊗ circle. Grade 2 = Q1 x pt ⊕ Q2 x int."""

    def __init__(self, fol: FoliatedComplex, L_tau: int):
        super().__init__(fol, L_tau)
        self.fol = fol
        self.boundary = fol.boundary
        self._layer_mask = self._boundary_layer_mask()

    @property
    def sizes(self) -> list[int]:
        return self.complex.sizes()

    def _boundary_layer_mask(self) -> np.ndarray:
        """Grade-3 cells q.pt x {k} and X.pt x [k,k+1] at w = 0 or L_w (open case only)."""
        mask = np.zeros(self.complex.size(3), dtype=bool)
        if self.fol.boundary != "open":
            return mask
        for g, kind, fk in ((2, "pt", "q.pt"), (3, "int", "X.pt")):
            for i, p in enumerate(self.fol.provenance[g]):
                if p.kind == fk and p.w in (0, self.fol.L_w):
                    mask[self.where[(g, kind)][i]] = True
        return mask

    def boundary_trace_of(self, dz: BitVector, w: int) -> BitVector:
        """Read d'z at the layer w as a chain of the boundary spacetime."""
        fol, L = self.fol, self.L_tau
        bst = BoundarySpacetime(fol.base, L)
        parts = []
        for k in range(L):
            parts.append((1, "pt", k, fol.restrict(2, "q.pt", w, self.slice(dz, 2, "pt", k))))
            parts.append((2, "int", k, fol.restrict(3, "X.pt", w, self.slice(dz, 3, "int", k))))
        return bst.place(2, parts)

    def restrict_dual_to_layer(self, zs: BitVector, w: int) -> BitVector:
        """Read z* on the Z.pt and q.pt cells at layer w as a boundary dual chain."""
        fol, L = self.fol, self.L_tau
        bst = BoundarySpacetime(fol.base, L)
        parts = []
        for k in range(L):
            parts.append((0, "pt", k, fol.restrict(1, "Z.pt", w, self.slice(zs, 1, "pt", k))))
            parts.append((1, "int", k, fol.restrict(2, "q.pt", w, self.slice(zs, 2, "int", k))))
        return bst.place(1, parts)

    def lift_boundary_gauge(self, c: BitVector, w: int) -> BitVector:
        """c ⊗ {w}: a boundary grade-1 chain placed on the layer w as a grade-2 chain."""
        fol, L = self.fol, self.L_tau
        bst = BoundarySpacetime(fol.base, L)
        parts = []
        for k in range(L):
            parts.append((1, "pt", k, fol.embed(1, "Z.pt", w, bst.slice(c, 0, "pt", k))))
            parts.append((2, "int", k, fol.embed(2, "q.pt", w, bst.slice(c, 1, "int", k))))
        return self.place(2, parts)

    def decompose_relative(self, z: BitVector) -> DefectChain:
        dz = self.complex.differentiate(2, z)
        stray = dz.bits().astype(bool) & ~self._layer_mask
        if stray.any():
            bad = None
            for k in range(self.L_tau):
                cols = np.concatenate([self.where[(2, "pt")][:, k], self.where[(3, "int")][:, k]])
                if stray[cols].any():
                    bad = k
                    break
            raise DefectError("chain is not a relative cycle", bad)
        L = self.L_tau
        c_q1 = [self.slice(z, 1, "pt", k) for k in range(L)]
        z_q2 = [self.slice(z, 2, "int", k) for k in range(L)]
        d = self.fol.diffs[1]
        bounds: list[BoundarySlices | None] = []
        traces = []
        if self.fol.boundary == "open":
            for w in (0, self.fol.L_w):
                tr = self.boundary_trace_of(dz, w)
                traces.append(tr)
                bst = BoundarySpacetime(self.fol.base, L)
                bounds.append(bst.decompose(tr, BitVector.zeros(bst.complex.size(1))))
        # slice recursion: z_Q2[k] = z_Q2[k-1] + d c_Q1[k] + boundary insertions
        for k in range(L):
            lhs = z_q2[k] ^ z_q2[k - 1] ^ (d @ c_q1[k])
            rhs = BitVector.zeros(self.fol.size(2))
            for b, w in zip(bounds, (0, self.fol.L_w)):
                rhs = rhs ^ self.fol.embed(2, "q.pt", w, b.c_q[k])
            if lhs != rhs:
                raise DefectError("slice recursion fails", k)
        return DefectChain("relative", z, c_q1, z_q2, bounds)

    def decompose_dual(self, zs: BitVector) -> DefectChain:
        if not self.complex.codifferentiate(2, zs).is_zero():
            bad = None
            dzs = self.complex.codifferentiate(2, zs).bits()
            for k in range(self.L_tau):
                cols = np.concatenate([self.where[(0, "pt")][:, k], self.where[(1, "int")][:, k]])
                if dzs[cols].any():
                    bad = k
                    break
            raise DefectError("chain is not a dual cycle", bad)
        L = self.L_tau
        zs_q1 = [self.slice(zs, 1, "pt", k) for k in range(L)]
        cs_q2 = [self.slice(zs, 2, "int", k) for k in range(L)]
        dt = self.fol.diffs[1].T
        for k in range(L):
            if zs_q1[(k + 1) % L] != zs_q1[k] ^ (dt @ cs_q2[k]):
                raise DefectError("dual slice recursion fails", k)
        return DefectChain("dual", zs, zs_q1, cs_q2)

    def gauge_relative(self, c: BitVector) -> BitVector:
        return self.complex.differentiate(1, c)

    def gauge_dual(self, cs: BitVector) -> BitVector:
        return self.complex.codifferentiate(3, cs)


def build_spacetime(css: CssComplex, L_w: int, w_boundary: str, L_tau: int) -> SpacetimeComplex:
    return SpacetimeComplex(foliate(css, L_w, w_boundary), L_tau)


def decompose_defect(st: SpacetimeComplex, chain: BitVector, kind: str) -> DefectChain:
    if kind == "relative":
        return st.decompose_relative(chain)
    if kind == "dual":
        return st.decompose_dual(chain)
    raise ValueError(f"unknown defect kind {kind!r}")


def partition_intersection(z: DefectChain | BitVector, zs: DefectChain | BitVector) -> int:
    a = z.support if isinstance(z, DefectChain) else z
    b = zs.support if isinstance(zs, DefectChain) else zs
    return (-1) ** intersection(a, b)


def bulk_operator_sequence(st: SpacetimeComplex, z: DefectChain, zs: DefectChain) -> tuple[PauliOperator, list[PauliOperator]]:
    """Excitation operator for the initial state and the time-ordered insertions, earliest first."""
    fol = st.fol
    n1, n = fol.size(1), fol.num_qubits
    L = st.L_tau

    def on_q1(v: BitVector) -> BitVector:
        return BitVector.from_support(n, v.support())

    def on_q2(v: BitVector) -> BitVector:
        return BitVector.from_support(n, [n1 + i for i in v.support()])

    excite = PauliOperator.Z(n, on_q2(z.time[0])) * PauliOperator.Z(n, on_q1(zs.space[0]))
    ops = []
    for k in range(1, L + 1):
        ops.append(PauliOperator.X(n, on_q2(zs.time[k - 1])))
        for b, w in zip(z.boundary, (0, fol.L_w)):
            if b is not None:
                ops.append(PauliOperator.Z(n, on_q2(fol.embed(2, "q.pt", w, b.c_q[k % L]))))
        ops.append(PauliOperator.X(n, on_q1(z.space[k % L])))
    return excite, ops


def partition_operator_trace(st: SpacetimeComplex, z: DefectChain, zs: DefectChain, route: str = "statevector",
                             cap: int = DEFAULT_CAP, state: StateVector | None = None) -> float:
    """<E| O_inserted |E> with |E> the excited cluster state."""
    excite, ops = bulk_operator_sequence(st, z, zs)
    if route == "statevector":
        check_cap(st.fol.num_qubits, cap)
        psi = state if state is not None else build_cluster_state(st.fol, cap, verify=False)
        e = psi.copy().apply_pauli(excite)
        out = e.copy()
        for op in ops:
            out.apply_pauli(op)
        return float(e.inner(out).real)
    if route == "stabilizer":
        total = PauliOperator.identity(st.fol.num_qubits)
        for op in ops:
            total = op * total
        return float(cluster_stabilizers(st.fol).expectation(excite * total * excite))
    raise ValueError(f"unknown route {route!r}")


def bulk_gauge_ratio(st: SpacetimeComplex, z: BitVector, zs: BitVector, c: BitVector | None = None,
                     c0: BitVector | None = None, c1: BitVector | None = None, cs: BitVector | None = None,
                     route: str = "stabilizer", state: StateVector | None = None) -> tuple[float, int]:
    """Ratio of bulk partition functions under z -> z + dc + c0 x {0} + c1 x {L_w} and z* -> z* + d*c*.

    Returns the re-evaluated ratio and the closed-form phase.
    """
    z2, zs2 = z, zs
    phase = 0
    if c is not None:
        z2 = z2 ^ st.gauge_relative(c)
    for piece, w in ((c0, 0), (c1, st.fol.L_w)):
        if piece is not None:
            lifted = st.lift_boundary_gauge(piece, w)
            z2 = z2 ^ lifted
            phase ^= intersection(lifted, zs)
    if cs is not None:
        zs2 = zs2 ^ st.gauge_dual(cs)
        # the phase comes from the boundary traces of the shifted z paired with c*
        if st.fol.boundary == "open":
            phase ^= intersection(st.complex.differentiate(2, z2), cs)
    before = partition_operator_trace(st, st.decompose_relative(z), st.decompose_dual(zs), route, state=state)
    after = partition_operator_trace(st, st.decompose_relative(z2), st.decompose_dual(zs2), route, state=state)
    if before == 0:
        raise ZeroDivisionError("bulk partition function vanishes")
    return after / before, (-1) ** phase


@dataclass
class InflowReport:
    bulk_ratio: float
    bulk_phase: int
    boundary_ratios: tuple[float, float]
    boundary_phases: tuple[int, int]

    @property
    def ok(self) -> bool:
        prod = self.boundary_ratios[0] * self.boundary_ratios[1]
        return (abs(self.bulk_ratio - self.bulk_phase) < 1e-9
                and abs(prod - self.bulk_ratio) < 1e-9
                and all(abs(r - p) < 1e-9 for r, p in zip(self.boundary_ratios, self.boundary_phases)))


def random_chain(n: int, rng: np.random.Generator) -> BitVector:
    return BitVector.from_bits(rng.integers(0, 2, size=n))


def random_pure_gauge_defects(st: SpacetimeComplex, rng: np.random.Generator) -> tuple[BitVector, BitVector]:
    """z = d c + c0 x {0} + c1 x {L_w} and z* = d* c* from random chains."""
    cx = st.complex
    z = cx.differentiate(1, random_chain(cx.size(1), rng))
    if st.fol.boundary == "open":
        bst = BoundarySpacetime(st.fol.base, st.L_tau)
        for w in (0, st.fol.L_w):
            z = z ^ st.lift_boundary_gauge(random_chain(bst.complex.size(1), rng), w)
    zs = cx.codifferentiate(3, random_chain(cx.size(3), rng))
    return z, zs


def inflow_check(st: SpacetimeComplex, seed: int, route: str = "stabilizer", boundary_route: str = "dense",
                 state: StateVector | None = None) -> InflowReport:
    """Random boundary gauge shifts: bulk ratio against the product of the two boundary ratios."""
    if st.fol.boundary != "open":
        raise ValueError("inflow needs an open w direction")
    rng = np.random.Generator(np.random.Philox(seed))
    z, zs = random_pure_gauge_defects(st, rng)
    bst = BoundarySpacetime(st.fol.base, st.L_tau)
    c0 = random_chain(bst.complex.size(1), rng)
    c1 = random_chain(bst.complex.size(1), rng)
    bulk_ratio, bulk_phase = bulk_gauge_ratio(st, z, zs, c0=c0, c1=c1, route=route, state=state)
    dz = st.complex.differentiate(2, z)
    ratios, phases = [], []
    for w, c in ((0, c0), (st.fol.L_w, c1)):
        zb = st.boundary_trace_of(dz, w)
        zsb = st.restrict_dual_to_layer(zs, w)
        r, p = boundary_gauge_ratio(st.fol.base, zb, zsb, st.L_tau, c_gauge=c, route=boundary_route)
        ratios.append(r)
        phases.append(p)
    return InflowReport(bulk_ratio, bulk_phase, tuple(ratios), tuple(phases))
