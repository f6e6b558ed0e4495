"""Chain complexes over F2 with labeled cells.

Differentials run in the cochain direction: ``diffs[i]`` maps grade ``i`` to
grade ``i + 1`` and has shape ``(|grade i+1|, |grade i|)``. A CSS code is the
three-grade complex Z-checks -> qubits -> X-checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .f2 import BitMatrix, BitVector, DimensionMismatch, kernel_matrix, pivot_columns, rank, solve


@dataclass(frozen=True)
class CellLabel:
    coords: tuple[int, ...]
    extended_axes: tuple[int, ...] = ()
    type_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        object.__setattr__(self, "extended_axes", tuple(sorted(int(a) for a in self.extended_axes)))

    def sort_key(self):
        return (self.type_tag, self.coords, self.extended_axes)

    def product(self, other: "CellLabel") -> "CellLabel":
        shift = len(self.coords)
        return CellLabel(
            self.coords + other.coords,
            self.extended_axes + tuple(a + shift for a in other.extended_axes),
            self.type_tag + other.type_tag,
        )

    def __str__(self) -> str:
        parts = []
        for axis, c in enumerate(self.coords):
            parts.append(f"[{c},{c}+1]" if axis in self.extended_axes else f"{{{c}}}")
        body = "x".join(parts) if parts else "pt"
        return f"{body}{'^' + self.type_tag if self.type_tag else ''}"

    def to_json(self):
        return [self.type_tag, list(self.coords), list(self.extended_axes)]

    @classmethod
    def from_json(cls, data) -> "CellLabel":
        tag, coords, ext = data
        return cls(tuple(coords), tuple(ext), tag)


class ComplexError(ValueError):
    pass


@dataclass
class ValidationReport:
    ok: bool
    grade: int | None = None
    source: CellLabel | None = None
    target: CellLabel | None = None

    def __bool__(self) -> bool:
        return self.ok

    def message(self) -> str:
        if self.ok:
            return "ok"
        return (
            f"nilpotency fails from grade {self.grade} to {self.grade + 2}: "
            f"cell {self.source} reaches {self.target} an odd number of times"
        )


class GradedComplex:
    """Sequence of labeled cell sets joined by F2 differentials."""

    def __init__(
        self,
        grades: Sequence[Sequence[CellLabel]],
        diffs: Sequence[BitMatrix],
        names: Sequence[str] | None = None,
    ):
        self.grades = [list(g) for g in grades]
        self.diffs = list(diffs)
        self.names = list(names) if names is not None else [str(i) for i in range(len(self.grades))]
        if len(self.diffs) != max(len(self.grades) - 1, 0):
            raise ComplexError("need exactly one differential between consecutive grades")
        if len(self.names) != len(self.grades):
            raise ComplexError("one name per grade required")
        for i, d in enumerate(self.diffs):
            if d.shape != (len(self.grades[i + 1]), len(self.grades[i])):
                raise ComplexError(
                    f"differential {i} has shape {d.shape}, expected "
                    f"{(len(self.grades[i + 1]), len(self.grades[i]))}"
                )
        self._index = []
        for g, cells in enumerate(self.grades):
            idx = {c: i for i, c in enumerate(cells)}
            if len(idx) != len(cells):
                raise ComplexError(f"duplicate cell labels in grade {g}")
            self._index.append(idx)

    @property
    def num_grades(self) -> int:
        return len(self.grades)

    def size(self, grade: int) -> int:
        return len(self.grades[grade])

    def sizes(self) -> list[int]:
        return [len(g) for g in self.grades]

    def index(self, grade: int, label: CellLabel) -> int:
        return self._index[grade][label]

    def has_cell(self, grade: int, label: CellLabel) -> bool:
        return label in self._index[grade]

    def chain(self, grade: int, labels: Iterable[CellLabel]) -> BitVector:
        return BitVector.from_support(self.size(grade), [self.index(grade, c) for c in labels])

    def cells_of(self, grade: int, v: BitVector) -> list[CellLabel]:
        return [self.grades[grade][i] for i in v.support()]

    def outgoing(self, grade: int) -> BitMatrix:
        if grade < len(self.diffs):
            return self.diffs[grade]
        return BitMatrix(0, self.size(grade))

    def incoming(self, grade: int) -> BitMatrix:
        if grade > 0:
            return self.diffs[grade - 1]
        return BitMatrix(self.size(grade), 0)

    def differentiate(self, grade: int, v: BitVector) -> BitVector:
        return self.outgoing(grade) @ v

    def codifferentiate(self, grade: int, v: BitVector) -> BitVector:
        """Transpose of the incoming differential: grade -> grade - 1."""
        return self.incoming(grade).T @ v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedComplex):
            return NotImplemented
        return self.grades == other.grades and self.diffs == other.diffs

    def __repr__(self) -> str:
        return f"{type(self).__name__}(sizes={self.sizes()})"

    # serialization

    def to_json(self) -> str:
        data = {
            "grades": [
                {"name": n, "cells": [c.to_json() for c in cells]} for n, cells in zip(self.names, self.grades)
            ],
            "diffs": [{"rows": d.rows, "cols": d.cols, "row_supports": d.row_supports()} for d in self.diffs],
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GradedComplex":
        data = json.loads(text)
        grades = [[CellLabel.from_json(c) for c in g["cells"]] for g in data["grades"]]
        names = [g["name"] for g in data["grades"]]
        diffs = [BitMatrix.from_row_supports(d["cols"], d["row_supports"]) for d in data["diffs"]]
        for d, spec in zip(diffs, data["diffs"]):
            if d.rows != spec["rows"]:
                raise ComplexError("row count mismatch in serialized differential")
        return GradedComplex(grades, diffs, names)


class CssComplex(GradedComplex):
    """Three grades: Z checks, qubits, X checks."""

    def __init__(self, cells_z, cells_q, cells_x, delta_z: BitMatrix, delta_x: BitMatrix, name: str = ""):
        super().__init__([cells_z, cells_q, cells_x], [delta_z, delta_x], ["Z", "q", "X"])
        self.name = name

    @classmethod
    def from_graded(cls, c: GradedComplex, name: str = "") -> "CssComplex":
        if c.num_grades != 3:
            raise ComplexError("a CSS complex has exactly three grades")
        return cls(c.grades[0], c.grades[1], c.grades[2], c.diffs[0], c.diffs[1], name)

    @property
    def cells_z(self):
        return self.grades[0]

    @property
    def cells_q(self):
        return self.grades[1]

    @property
    def cells_x(self):
        return self.grades[2]

    @property
    def delta_z(self) -> BitMatrix:
        return self.diffs[0]

    @property
    def delta_x(self) -> BitMatrix:
        return self.diffs[1]

    @property
    def num_qubits(self) -> int:
        return self.size(1)

    def dual(self) -> "CssComplex":
        """The code with the roles of X and Z exchanged."""
        return CssComplex(self.cells_x, self.cells_q, self.cells_z, self.delta_x.T, self.delta_z.T, self.name + "*")


def validate(c: GradedComplex) -> ValidationReport:
    for i in range(len(c.diffs) - 1):
        prod = c.diffs[i + 1] @ c.diffs[i]
        if not prod.is_zero():
            dense = prod.dense()
            t, s = (int(v) for v in np.argwhere(dense)[0])
            return ValidationReport(False, i, c.grades[i][s], c.grades[i + 2][t])
    return ValidationReport(True)


def require_valid(c: GradedComplex) -> GradedComplex:
    report = validate(c)
    if not report:
        raise ComplexError(report.message())
    return c


def dualize(c: GradedComplex) -> GradedComplex:
    grades = list(reversed(c.grades))
    diffs = [d.T for d in reversed(c.diffs)]
    names = [n[:-1] if n.endswith("*") else n + "*" for n in reversed(c.names)]
    return GradedComplex(grades, diffs, names)


def _sorted_grade(cells: list[CellLabel]) -> list[int]:
    return sorted(range(len(cells)), key=lambda i: cells[i].sort_key())


def canonical(c: GradedComplex) -> GradedComplex:
    """Reorder every grade by (type_tag, coords, extended_axes)."""
    orders = [_sorted_grade(g) for g in c.grades]
    grades = [[g[i] for i in o] for g, o in zip(c.grades, orders)]
    diffs = [d.permute(orders[i + 1], orders[i]) for i, d in enumerate(c.diffs)]
    return GradedComplex(grades, diffs, c.names)


def tensor_product(a: GradedComplex, b: GradedComplex) -> GradedComplex:
    """Tensor product with differential c⊗c' -> (dc)⊗c' + c⊗(dc'), canonically ordered."""
    ng = a.num_grades + b.num_grades - 1
    a_cols = [d.column_supports() for d in a.diffs]
    b_cols = [d.column_supports() for d in b.diffs]
    blocks: list[list[tuple[CellLabel, int, int, int]]] = []
    for i in range(ng):
        cells = []
        for j in range(max(0, i - b.num_grades + 1), min(a.num_grades, i + 1)):
            for ia, ca in enumerate(a.grades[j]):
                for ib, cb in enumerate(b.grades[i - j]):
                    cells.append((ca.product(cb), j, ia, ib))
        cells.sort(key=lambda t: t[0].sort_key())
        blocks.append(cells)
    grades = [[t[0] for t in cells] for cells in blocks]
    pos = [{(t[1], t[2], t[3]): k for k, t in enumerate(cells)} for cells in blocks]
    for g, cells in enumerate(grades):
        if len(set(cells)) != len(cells):
            raise ComplexError(f"product labels collide in grade {g}")
    diffs = []
    for i in range(ng - 1):
        supports = []
        for _, j, ia, ib in blocks[i]:
            col = []
            if j < len(a.diffs):
                col += [pos[i + 1][(j + 1, r, ib)] for r in a_cols[j][ia]]
            if i - j < len(b.diffs):
                col += [pos[i + 1][(j, ia, r)] for r in b_cols[i - j][ib]]
            supports.append(col)
        diffs.append(BitMatrix.from_column_supports(len(grades[i + 1]), supports))
    names = []
    for i in range(ng):
        names.append("+".join(
            f"{a.names[j]}.{b.names[i - j]}"
            for j in range(max(0, i - b.num_grades + 1), min(a.num_grades, i + 1))
        ))
    return require_valid(GradedComplex(grades, diffs, names))


def circle(L: int) -> GradedComplex:
    """Periodic 1d cell complex: grade 0 intervals, grade 1 points, d[j,j+1] = {j}+{j+1}."""
    if L < 1:
        raise ComplexError("a circle needs at least one interval")
    ints = [CellLabel((j,), (0,)) for j in range(L)]
    pts = [CellLabel((j,)) for j in range(L)]
    d = BitMatrix.from_column_supports(L, [[j, (j + 1) % L] for j in range(L)])
    return GradedComplex([ints, pts], [d], ["int", "pt"])


def segment(L: int) -> GradedComplex:
    """Open 1d complex with points 0..L and intervals 0..L-1."""
    if L < 1:
        raise ComplexError("a segment needs at least one interval")
    ints = [CellLabel((j,), (0,)) for j in range(L)]
    pts = [CellLabel((j,)) for j in range(L + 1)]
    d = BitMatrix.from_column_supports(L + 1, [[j, j + 1] for j in range(L)])
    return GradedComplex([ints, pts], [d], ["int", "pt"])


# Foliation

Q1_FROM_Z = "Z.pt"
Q1_FROM_Q = "q.int"
Q2_FROM_Q = "q.pt"
Q2_FROM_X = "X.int"


@dataclass(frozen=True)
class Provenance:
    kind: str      # "Z.int", "Z.pt", "q.int", "q.pt", "X.int", "X.pt"
    base: int      # index of the cell in the CSS grade
    w: int         # point or interval start


class FoliatedComplex(GradedComplex):
    """Four grades (Z,w) -> Q1 -> Q2 -> X built from a CSS complex and a w axis."""

    def __init__(self, grades, diffs, provenance, base: CssComplex, L_w: int, boundary: str):
        super().__init__(grades, diffs, ["Zw", "Q1", "Q2", "Xw"])
        self.provenance = provenance
        self.base = base
        self.L_w = L_w
        self.boundary = boundary
        self._by_prov = [{(p.kind, p.base, p.w): i for i, p in enumerate(g)} for g in provenance]

    def cell(self, grade: int, kind: str, base: int, w: int) -> int:
        return self._by_prov[grade][(kind, base, w)]

    @property
    def num_points(self) -> int:
        return self.L_w if self.boundary == "periodic" else self.L_w + 1

    @property
    def num_qubits(self) -> int:
        return self.size(1) + self.size(2)

    def qubit_of(self, grade: int, index: int) -> int:
        """Qubit numbering: Q1 cells first, then Q2 cells."""
        return index if grade == 1 else self.size(1) + index

    def boundary_layer(self, w: int) -> list[int]:
        """Q2 indices of the q x {w} cells, in base qubit order."""
        return [self.cell(2, Q2_FROM_Q, i, w) for i in range(self.base.size(1))]

    def embed(self, grade: int, kind: str, w: int, v: BitVector) -> BitVector:
        """Place a base chain as kind x {w} (or x [w,w+1]) inside a foliated grade."""
        return BitVector.from_support(self.size(grade), [self.cell(grade, kind, i, w) for i in v.support()])

    def restrict(self, grade: int, kind: str, w: int, v: BitVector) -> BitVector:
        n = len(self.base.grades[_BASE_GRADE[kind]])
        bits = v.bits()
        return BitVector.from_bits([bits[self.cell(grade, kind, i, w)] for i in range(n)])


_BASE_GRADE = {"Z.int": 0, "Z.pt": 0, "q.int": 1, "q.pt": 1, "X.int": 2, "X.pt": 2}


def foliate(css: CssComplex, L_w: int, boundary: str = "periodic") -> FoliatedComplex:
    """Foliated complex of a CSS code along a new w axis, built cell by cell.

    Intervals [w,w+1] and points {w} are appended as the last coordinate.
    """
    if L_w < 1:
        raise ComplexError("L_w must be at least 1")
    if boundary not in ("periodic", "open"):
        raise ComplexError(f"unknown boundary {boundary!r}")
    require_valid(css)
    periodic = boundary == "periodic"
    npts = L_w if periodic else L_w + 1
    nint = L_w
    dim = max((len(c.coords) for g in css.grades for c in g), default=0)

    def pt(label: CellLabel, w: int) -> CellLabel:
        return label.product(CellLabel((w,)))

    def interval(label: CellLabel, w: int) -> CellLabel:
        return label.product(CellLabel((w,), (0,)))

    def ends(w: int) -> list[int]:
        return [w, (w + 1) % L_w] if periodic else [w, w + 1]

    for g in css.grades:
        for c in g:
            if len(c.coords) != dim:
                raise ComplexError("all base cells need the same number of coordinates")

    # cells per grade, with provenance
    layout = [
        [("Z.int", 0, w, nint) for w in range(nint)],
        [("Z.pt", 0, w, npts) for w in range(npts)] + [("q.int", 1, w, nint) for w in range(nint)],
        [("q.pt", 1, w, npts) for w in range(npts)] + [("X.int", 2, w, nint) for w in range(nint)],
        [("X.pt", 2, w, npts) for w in range(npts)],
    ]
    entries = []
    for grade_layout in layout:
        cells = []
        for kind, bg, w, _ in grade_layout:
            make = interval if kind.endswith("int") else pt
            for i, c in enumerate(css.grades[bg]):
                cells.append((make(c, w), Provenance(kind, i, w)))
        cells.sort(key=lambda t: t[0].sort_key())
        entries.append(cells)
    grades = [[t[0] for t in e] for e in entries]
    prov = [[t[1] for t in e] for e in entries]
    where = [{(p.kind, p.base, p.w): k for k, p in enumerate(pg)} for pg in prov]

    dz_cols = css.delta_z.column_supports()
    dx_cols = css.delta_x.column_supports()

    def image(p: Provenance) -> list[tuple[str, int, int]]:
        # the six rules of the foliated differential
        if p.kind == "Z.int":
            return [("q.int", r, p.w) for r in dz_cols[p.base]] + [("Z.pt", p.base, e) for e in ends(p.w)]
        if p.kind == "Z.pt":
            return [("q.pt", r, p.w) for r in dz_cols[p.base]]
        if p.kind == "q.int":
            return [("X.int", r, p.w) for r in dx_cols[p.base]] + [("q.pt", p.base, e) for e in ends(p.w)]
        if p.kind == "q.pt":
            return [("X.pt", r, p.w) for r in dx_cols[p.base]]
        if p.kind == "X.int":
            return [("X.pt", p.base, e) for e in ends(p.w)]
        return []

    diffs = []
    for g in range(3):
        supports = [[where[g + 1][key] for key in image(p)] for p in prov[g]]
        diffs.append(BitMatrix.from_column_supports(len(grades[g + 1]), supports))
    fol = FoliatedComplex(grades, diffs, prov, css, L_w, boundary)
    return require_valid(fol)


# Homology


@dataclass
class HomologyBasis:
    grade: int
    representatives: list[BitVector]
    dimension: int
    cycle_space: BitMatrix = field(repr=False, default=None)
    boundary_space: BitMatrix = field(repr=False, default=None)


def homology_basis(c: GradedComplex, grade: int) -> HomologyBasis:
    """Cycles at ``grade`` independent modulo boundaries, chosen by echelon pivoting."""
    if not 0 <= grade < c.num_grades:
        raise IndexError(f"grade {grade} out of range")
    kernel = kernel_matrix(c.outgoing(grade))
    incoming = c.incoming(grade)
    combined = incoming.hstack(kernel.T) if kernel.rows else incoming
    piv = pivot_columns(combined) if combined.cols else []
    reps = [kernel.row(j - incoming.cols) for j in piv if j >= incoming.cols]
    dim = kernel.rows - rank(incoming)
    if len(reps) != dim:
        raise ComplexError("homology dimension mismatch; complex is not nilpotent")
    return HomologyBasis(grade, reps, dim, kernel, incoming)


def homology_dims(c: GradedComplex) -> list[int]:
    return [c.size(g) - rank(c.outgoing(g)) - rank(c.incoming(g)) for g in range(c.num_grades)]


def intersection(c: BitVector, c2: BitVector) -> int:
    if c.length != c2.length:
        raise DimensionMismatch("chains live on different cell sets")
    return c.dot(c2)


def pairing_matrix(h: HomologyBasis, hdual: HomologyBasis) -> BitMatrix:
    if h.dimension != hdual.dimension:
        raise ComplexError(
            f"homology dimensions {h.dimension} and {hdual.dimension} differ; complexes are inconsistent"
        )
    entries = [[intersection(a, b) for b in hdual.representatives] for a in h.representatives]
    return BitMatrix.from_dense(np.array(entries, dtype=np.uint8).reshape(h.dimension, hdual.dimension))


def dual_grade(c: GradedComplex, grade: int) -> int:
    return c.num_grades - 1 - grade


class NotACycle(ValueError):
    pass


def is_boundary(c: GradedComplex, grade: int, v: BitVector) -> BitVector | None:
    """A preimage under the incoming differential, or None for a nontrivial class."""
    if not c.differentiate(grade, v).is_zero():
        raise NotACycle(f"chain is not a cycle at grade {grade}")
    return solve(c.incoming(grade), v)
