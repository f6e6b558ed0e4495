"""Translation-invariant generating maps and ground-state degeneracy.

A map between unit-cell modules is a matrix of Laurent polynomials over F2.
On a torus with periods (L_1, ..., L_d) every entry becomes a circulant
block, and log2 GSD is a cokernel dimension of the expanded matrix.

Expanded indices are site-major: index = site * blocks + block, with sites
in row-major order over the periods. This matches the cell order produced by
the chain module for cubical models.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Iterable, Sequence

import numpy as np

from .chain import homology_dims
from .f2 import BitMatrix, BitVector, in_span, kernel_basis, rank
from .models import ConstraintViolation, build_model, parse_model, qc_constraint

GSD_BUDGET = 5000


class BudgetExceeded(ValueError):
    pass


class LaurentPoly:
    """Sum of monomials x^a with a in Z^d; exponents reduce only at expansion."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Iterable[Sequence[int]] = ()):
        self.d = d
        acc: set[tuple[int, ...]] = set()
        for t in terms:
            t = tuple(int(e) for e in t)
            if len(t) != d:
                raise ValueError(f"exponent {t} has wrong length for d={d}")
            acc ^= {t}
        self.terms = frozenset(acc)

    @classmethod
    def zero(cls, d: int) -> "LaurentPoly":
        return cls(d)

    @classmethod
    def one(cls, d: int) -> "LaurentPoly":
        return cls(d, [(0,) * d])

    @classmethod
    def monomial(cls, d: int, exponent: Sequence[int]) -> "LaurentPoly":
        return cls(d, [exponent])

    @classmethod
    def var(cls, d: int, axis: int, power: int = 1) -> "LaurentPoly":
        e = [0] * d
        e[axis] = power
        return cls(d, [e])

    @classmethod
    def one_plus(cls, d: int, axis: int) -> "LaurentPoly":
        return cls.one(d) + cls.var(d, axis)

    @classmethod
    def line_sum(cls, d: int, axis: int, length: int) -> "LaurentPoly":
        """s = 1 + x + ... + x^(L-1) along one axis."""
        return cls(d, [tuple(i if a == axis else 0 for a in range(d)) for i in range(length)])

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        return LaurentPoly(self.d, self.terms ^ other.terms)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        return LaurentPoly(self.d, (tuple(a + b for a, b in zip(s, t)) for s in self.terms for t in other.terms))

    def antipode(self) -> "LaurentPoly":
        return LaurentPoly(self.d, (tuple(-e for e in t) for t in self.terms))

    def reduce(self, periods: Sequence[int]) -> "LaurentPoly":
        return LaurentPoly(self.d, (tuple(e % p for e, p in zip(t, periods)) for t in self.terms))

    def _check(self, other: "LaurentPoly") -> None:
        if self.d != other.d:
            raise ValueError(f"variable counts differ: {self.d} vs {other.d}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LaurentPoly) and self.d == other.d and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.d, self.terms))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        names = [f"x{i + 1}" for i in range(self.d)]
        parts = []
        for t in sorted(self.terms):
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, t) if e]
            parts.append("*".join(factors) or "1")
        return " + ".join(parts)


def product_of_one_plus(d: int, axes: Iterable[int]) -> LaurentPoly:
    p = LaurentPoly.one(d)
    for a in axes:
        p = p * LaurentPoly.one_plus(d, a)
    return p


class PolyMatrix:
    def __init__(self, d: int, entries: Sequence[Sequence[LaurentPoly]]):
        self.d = d
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged polynomial matrix")
            for p in row:
                if p.d != d:
                    raise ValueError(f"entry has d={p.d}, matrix has d={d}")

    @classmethod
    def zeros(cls, d: int, rows: int, cols: int) -> "PolyMatrix":
        return cls(d, [[LaurentPoly.zero(d) for _ in range(cols)] for _ in range(rows)])

    def __getitem__(self, ij: tuple[int, int]) -> LaurentPoly:
        return self.entries[ij[0]][ij[1]]

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shapes {self.rows}x{self.cols} and {other.rows}x{other.cols} do not compose")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = LaurentPoly.zero(self.d)
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(self.d, out)

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(self.d, [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def adjoint(self) -> "PolyMatrix":
        """Transpose followed by x -> 1/x."""
        return PolyMatrix(self.d, [[self.entries[i][j].antipode() for i in range(self.rows)] for j in range(self.cols)])

    def select_columns(self, idx: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix(self.d, [[row[j] for j in idx] for row in self.entries])

    def is_zero(self) -> bool:
        return all(p.is_zero() for row in self.entries for p in row)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PolyMatrix) and self.d == other.d and self.entries == other.entries

    def __repr__(self) -> str:
        return "PolyMatrix([" + ",\n            ".join("[" + ", ".join(map(repr, r)) + "]" for r in self.entries) + "])"


def _site_shift_table(periods: Sequence[int]) -> np.ndarray:
    """coords[i] for every site index i, row-major."""
    return np.array(list(itertools.product(*(range(p) for p in periods))), dtype=np.int64).reshape(-1, len(periods))


def _ravel(coords: np.ndarray, periods: Sequence[int]) -> np.ndarray:
    return np.ravel_multi_index(tuple((coords % np.array(periods)).T), tuple(periods))


def expand(m: PolyMatrix, periods: Sequence[int]) -> BitMatrix:
    """Each entry p becomes the matrix of multiplication by p on F2[Z_L1 x ... x Z_Ld]."""
    periods = tuple(int(p) for p in periods)
    if len(periods) != m.d:
        raise ValueError(f"need {m.d} periods, got {len(periods)}")
    if any(p < 1 for p in periods):
        raise ValueError(f"periods must be positive, got {periods}")
    n = prod(periods)
    coords = _site_shift_table(periods)
    sites = np.arange(n)
    dense = np.zeros((m.rows * n, m.cols * n), dtype=np.uint8)
    for r in range(m.rows):
        for c in range(m.cols):
            for t in m.entries[r][c].reduce(periods).terms:
                targets = _ravel(coords + np.array(t), periods)
                dense[targets * m.rows + r, sites * m.cols + c] ^= 1
    return BitMatrix.from_dense(dense)


def expand_vector(entries: Sequence[LaurentPoly], periods: Sequence[int]) -> BitVector:
    """A column of polynomials as a concrete F2 vector in site-major layout."""
    periods = tuple(periods)
    blocks = len(entries)
    bits = np.zeros(prod(periods) * blocks, dtype=np.uint8)
    for b, p in enumerate(entries):
        for t in p.reduce(periods).terms:
            bits[int(np.ravel_multi_index(t, periods)) * blocks + b] ^= 1
    return BitVector.from_bits(bits)


# Cubical generating maps


def axis_subsets(d: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(d), k))


def complement_order(d: int, k: int) -> list[tuple[int, ...]]:
    """k-subsets ordered by their complements, ascending."""
    return [tuple(a for a in range(d) if a not in drop) for drop in itertools.combinations(range(d), d - k)]


def inclusion_map(d: int, low: Sequence[tuple[int, ...]], high: Sequence[tuple[int, ...]]) -> PolyMatrix:
    """Rows: low cells; columns: high cells. A high cell at the origin contains
    low cells at offsets prod_{i in high \\ low} (1 + x_i)."""
    entries = []
    for a in low:
        row = []
        for b in high:
            if set(a) <= set(b):
                row.append(product_of_one_plus(d, [i for i in b if i not in a]))
            else:
                row.append(LaurentPoly.zero(d))
        entries.append(row)
    return PolyMatrix(d, entries)


def sigma_cc(d: int, k: int, column_axes: Sequence[tuple[int, ...]] | None = None) -> PolyMatrix:
    """Ising-interaction map: (d-k)-cells into k-cells. Columns default to lexicographic axis order."""
    if not 0 <= k or not 2 * k < d:
        raise ConstraintViolation(f"cc({d},{k}) needs 0 <= k and 2k < d")
    cols = list(column_axes) if column_axes is not None else axis_subsets(d, d - k)
    if sorted(cols) != axis_subsets(d, d - k):
        raise ValueError(f"column_axes must list every {d - k}-subset of axes once")
    return inclusion_map(d, axis_subsets(d, k), cols)


def sigma_qc(d: int, k: int, l: int) -> tuple[PolyMatrix, PolyMatrix]:
    """(delta_Z, delta_X): (d-k)-cells -> k-cells -> l-cells."""
    if not 2 * k < d:
        raise ConstraintViolation(f"qc({d},{k},{l}) needs 2k < d")
    if not 0 <= l < k:
        raise ConstraintViolation(f"qc({d},{k},{l}) needs 0 <= l < k")
    b = qc_constraint(d, k, l)
    if b % 2:
        raise ConstraintViolation(f"binom({d - k - l},{k - l}) = {b} is odd")
    dz = inclusion_map(d, axis_subsets(d, k), axis_subsets(d, d - k))
    dx = inclusion_map(d, axis_subsets(d, l), axis_subsets(d, k))
    return dz, dx


def _budget(blocks: int, periods: Sequence[int], budget: int) -> None:
    size = blocks * prod(periods)
    if size > budget:
        raise BudgetExceeded(f"expanded dimension {size} exceeds budget {budget}")


def _periods(d: int, periods: Sequence[int] | int) -> tuple[int, ...]:
    if isinstance(periods, int):
        periods = (periods,) * d
    periods = tuple(int(p) for p in periods)
    if len(periods) == 1:
        periods = periods * d
    if len(periods) != d:
        raise ValueError(f"need {d} periods, got {len(periods)}")
    if any(p < 2 for p in periods):
        raise ValueError(f"periods must be at least 2, got {periods}")
    return periods


def gsd_cc(d: int, k: int, periods: Sequence[int] | int, budget: int = GSD_BUDGET) -> int:
    """log2 GSD of the classical self-dual model: dim coker of the expanded Ising map."""
    periods = _periods(d, periods)
    _budget(max(comb(d, k), comb(d, d - k)), periods, budget)
    m = expand(sigma_cc(d, k), periods)
    return m.rows - rank(m)


def gsd_from_maps(delta_z: PolyMatrix, delta_x: PolyMatrix | None, periods: Sequence[int]) -> int:
    """coker(delta_X^dagger) + coker(delta_Z) - #qubits."""
    ez = expand(delta_z, periods)
    nq = ez.rows
    coker_z = nq - rank(ez)
    if delta_x is None or delta_x.rows == 0:
        return coker_z
    ex_dag = expand(delta_x.adjoint(), periods)
    return (nq - rank(ex_dag)) + coker_z - nq


def gsd_qc(d: int, k: int, l: int, periods: Sequence[int] | int, budget: int = GSD_BUDGET) -> int:
    periods = _periods(d, periods)
    _budget(max(comb(d, k), comb(d, d - k)), periods, budget)
    dz, dx = sigma_qc(d, k, l)
    return gsd_from_maps(dz, dx, periods)


# Tabulated polynomials, coefficients of L^0, L^1, ...

CC_POLYNOMIALS = {
    (3, 1): [2, 0, 0, 1],
    (4, 1): [-8, 16, -12, 8],
    (5, 1): [14, -40, 40, -20, 10, 1],
    (5, 2): [6, 0, 0, 0, 0, 4],
    (6, 1): [-24, 96, -150, 120, -60, 24],
    (6, 2): [-74, 204, -240, 160, -60, 24, 1],
}

QC_POLYNOMIALS = {
    (3, 1, 0): [3],
    (5, 1, 0): [15, -40, 40, -20, 10],
    (5, 2, 1): [10],
    (6, 2, 0): [-79, 210, -240, 160, -60, 24],
}


def evaluate_polynomial(coeffs: Sequence[int], periods: Sequence[int]) -> int:
    """L^k becomes the mean of L_i1...L_ik over k-subsets of axes."""
    d = len(periods)
    total = Fraction(0)
    for k, c in enumerate(coeffs):
        if not c:
            continue
        if k > d:
            raise ValueError(f"degree {k} exceeds dimension {d}")
        sym = sum(prod(periods[i] for i in s) for s in itertools.combinations(range(d), k))
        total += c * Fraction(sym, comb(d, k))
    if total.denominator != 1:
        raise ValueError(f"polynomial gives non-integer {total} at {tuple(periods)}")
    return int(total)


@dataclass
class GsdReport:
    model: str
    periods: tuple[int, ...]
    computed: int
    expected: int | None
    note: str = ""

    @property
    def match(self) -> bool:
        return self.expected is not None and self.computed == self.expected

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "periods": list(self.periods),
            "computed": self.computed,
            "expected": self.expected,
            "match": self.match,
            "note": self.note,
        }


def gsd_report(model: str, periods: Sequence[int] | int, budget: int = GSD_BUDGET) -> GsdReport:
    """``model`` is ``cc:d,k`` or ``qc:d,k,l``; compares with the tabulated polynomial."""
    spec = parse_model(model)
    if spec.name == "cc":
        d, k = spec.params
        per = _periods(d, periods)
        coeffs = CC_POLYNOMIALS.get((d, k))
        value = gsd_cc(d, k, per, budget)
    elif spec.name == "qc":
        d, k, l = spec.params
        per = _periods(d, periods)
        coeffs = QC_POLYNOMIALS.get((d, k, l))
        value = gsd_qc(d, k, l, per, budget)
    else:
        raise ValueError(f"gsd reports cover cc:d,k and qc:d,k,l models, not {model!r}")
    expected = evaluate_polynomial(coeffs, per) if coeffs is not None else None
    return GsdReport(model, per, value, expected, "" if coeffs else "no tabulated polynomial")


# Other catalog models as generating maps


def _xcube_maps() -> tuple[PolyMatrix, PolyMatrix, int]:
    d = 3
    edges = [(a,) for a in range(3)]
    dz = inclusion_map(d, edges, [(0, 1, 2)])
    # vertex term t lives in the plane normal to t; an edge along a != t touches it at both ends
    entries = [[LaurentPoly.zero(d) if a == t else LaurentPoly.one_plus(d, a) for a in range(3)] for t in range(3)]
    return dz, PolyMatrix(d, entries), 1


def _checkerboard_maps() -> tuple[PolyMatrix, PolyMatrix, int]:
    """2x2x2 supercell: eight vertices, four shaded cubes."""
    d = 3
    subs = list(itertools.product((0, 1), repeat=3))
    shaded = [c for c in subs if sum(c) % 2 == 0]
    entries = [[LaurentPoly.zero(d) for _ in shaded] for _ in subs]
    for j, c in enumerate(shaded):
        for e in subs:
            p = [ci + ei for ci, ei in zip(c, e)]
            i = subs.index(tuple(x % 2 for x in p))
            entries[i][j] = entries[i][j] + LaurentPoly.monomial(d, [x // 2 for x in p])
    dz = PolyMatrix(d, entries)
    return dz, dz.adjoint(), 2


def _haah_maps() -> tuple[PolyMatrix, PolyMatrix, int]:
    from .models import HAAH_X_B, HAAH_X_R, HAAH_Z_B, HAAH_Z_R

    d = 3

    def poly(offsets):
        return LaurentPoly(d, offsets)

    dz = PolyMatrix(d, [[poly(HAAH_Z_R)], [poly(HAAH_Z_B)]])
    dx = PolyMatrix(d, [[poly(HAAH_X_R), poly(HAAH_X_B)]])
    return dz, dx, 1


def generating_maps(model: str) -> tuple[PolyMatrix, PolyMatrix | None, int]:
    """(delta_Z, delta_X or None, supercell factor) for a catalog model."""
    spec = parse_model(model)
    if spec.name == "toric":
        d = spec.params[0]
        return (
            inclusion_map(d, axis_subsets(d, 1), axis_subsets(d, 2)),
            inclusion_map(d, axis_subsets(d, 0), axis_subsets(d, 1)),
            1,
        )
    if spec.name == "qpim2d":
        return sigma_cc(2, 0), None, 1
    if spec.name == "cc":
        return sigma_cc(*spec.params), None, 1
    if spec.name == "qc":
        dz, dx = sigma_qc(*spec.params)
        return dz, dx, 1
    if spec.name == "xcube":
        return _xcube_maps()
    if spec.name == "checkerboard":
        return _checkerboard_maps()
    if spec.name == "haah":
        return _haah_maps()
    raise ValueError(f"no generating map for {model!r}")


@dataclass
class CrossCheck:
    model: str
    periods: tuple[int, ...]
    algebraic: int
    homological: int
    expected: int | None = None

    @property
    def ok(self) -> bool:
        return self.algebraic == self.homological and (self.expected is None or self.expected == self.homological)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "periods": list(self.periods),
            "algebraic": self.algebraic,
            "homological": self.homological,
            "expected": self.expected,
            "pass": self.ok,
        }


def gsd_cross_check(model: str, periods: Sequence[int], expected: int | None = None,
                    budget: int = GSD_BUDGET) -> CrossCheck:
    """log2 GSD from the expanded generating maps against qubit-grade homology of the built complex."""
    dz, dx, cell = generating_maps(model)
    periods = tuple(int(p) for p in periods)
    if len(periods) == 1:
        periods = periods * dz.d
    if any(p % cell for p in periods):
        raise ValueError(f"{model} needs periods divisible by {cell}")
    lattice = tuple(p // cell for p in periods)
    _budget(max(dz.rows, dz.cols), lattice, budget)
    algebraic = gsd_from_maps(dz, dx, lattice)
    css = build_model(model, periods)
    homological = homology_dims(css)[1]
    return CrossCheck(model, periods, algebraic, homological, expected)


# Symmetries


@dataclass
class SymmetryBasis:
    d: int
    k: int
    periods: tuple[int, ...]
    basis: list[BitVector] = field(repr=False)
    adjoint: BitMatrix = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def contains(self, v: BitVector) -> bool:
        return self.adjoint.apply(v).is_zero() and in_span(self.basis, v)

    def contains_generator(self, column: Sequence[LaurentPoly], shift: Sequence[int] | None = None) -> bool:
        """Place a polynomial column at ``shift`` and test membership."""
        if shift is not None:
            mono = LaurentPoly.monomial(self.d, shift)
            column = [p * mono for p in column]
        return self.contains(expand_vector(column, self.periods))


def symmetry_generators(d: int, k: int, periods: Sequence[int] | int, budget: int = GSD_BUDGET) -> SymmetryBasis:
    """Basis of Ker sigma_Z^dagger: X-type operators on k-cells commuting with every Ising term."""
    periods = _periods(d, periods)
    _budget(max(comb(d, k), comb(d, d - k)), periods, budget)
    adj = expand(sigma_cc(d, k).adjoint(), periods)
    return SymmetryBasis(d, k, periods, kernel_basis(adj), adj)
