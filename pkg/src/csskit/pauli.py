"""Multi-qubit Pauli operators in symplectic form.

An operator is ``i^phase`` times a tensor product of single-qubit letters,
where qubit ``j`` carries I, X, Z or Y according to bits ``x[j]`` and
``z[j]``, and Y is the Hermitian Pauli matrix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .chain import CssComplex, FoliatedComplex
from .f2 import BitMatrix, BitVector, DimensionMismatch, rank, solve

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}
_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class PauliOperator:
    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: BitVector | None = None, z: BitVector | None = None, phase: int = 0):
        self.n = int(n)
        self.x = x if x is not None else BitVector(n)
        self.z = z if z is not None else BitVector(n)
        if self.x.length != n or self.z.length != n:
            raise DimensionMismatch("mask lengths must equal the qubit count")
        self.phase = int(phase) % 4

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def X(cls, n: int, support: Iterable[int] | BitVector) -> "PauliOperator":
        v = support if isinstance(support, BitVector) else BitVector.from_support(n, support)
        return cls(n, x=v)

    @classmethod
    def Z(cls, n: int, support: Iterable[int] | BitVector) -> "PauliOperator":
        v = support if isinstance(support, BitVector) else BitVector.from_support(n, support)
        return cls(n, z=v)

    @classmethod
    def from_letters(cls, n: int, letters: dict[int, str], phase: int = 0) -> "PauliOperator":
        xb = np.zeros(n, dtype=np.uint8)
        zb = np.zeros(n, dtype=np.uint8)
        for q, letter in letters.items():
            xb[q], zb[q] = _BITS[letter.upper()]
        return cls(n, BitVector.from_bits(xb), BitVector.from_bits(zb), phase)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def letters(self) -> dict[int, str]:
        xb, zb = self.x.bits(), self.z.bits()
        return {q: _LETTER[(int(xb[q]), int(zb[q]))] for q in np.flatnonzero(xb | zb).tolist()}

    def weight(self) -> int:
        return (self.x.bits() | self.z.bits()).sum().item()

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise DimensionMismatch("operators act on different qubit counts")
        x1, z1 = self.x.bits().astype(np.int64), self.z.bits().astype(np.int64)
        x2, z2 = other.x.bits().astype(np.int64), other.z.bits().astype(np.int64)
        # per-qubit power of i picked up by sigma(x1,z1) * sigma(x2,z2)
        g = np.where(
            (x1 == 1) & (z1 == 1),
            z2 - x2,
            np.where(x1 == 1, z2 * (2 * x2 - 1), np.where(z1 == 1, x2 * (1 - 2 * z2), 0)),
        )
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + int(g.sum()))

    def scaled(self, power_of_i: int) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, self.phase + power_of_i)

    def __neg__(self) -> "PauliOperator":
        return self.scaled(2)

    def dagger(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, -self.phase)

    def symplectic(self) -> BitVector:
        """(x | z) as one vector of length 2n."""
        return self.x.concat(self.z)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (self.n, self.x, self.z, self.phase) == (other.n, other.x, other.z, other.phase)

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z, self.phase))

    def to_string(self) -> str:
        body = "".join(f"{letter}{q}" for q, letter in sorted(self.letters().items()))
        return _PREFIX[self.phase] + (body or "I")

    __str__ = to_string

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_string()!r}, n={self.n})"

    @classmethod
    def from_string(cls, n: int, text: str) -> "PauliOperator":
        m = re.fullmatch(r"([+-])(i?)((?:[XYZ]\d+)*|I)", text.strip())
        if not m:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        phase = (2 if m.group(1) == "-" else 0) + (1 if m.group(2) else 0)
        letters = {} if m.group(3) == "I" else {int(q): a for a, q in re.findall(r"([XYZ])(\d+)", m.group(3))}
        return cls.from_letters(n, letters, phase)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix with qubit j on bit j of the basis index."""
        if self.n > 14:
            raise ValueError("dense Pauli matrices are limited to 14 qubits")
        dim = 1 << self.n
        idx = np.arange(dim, dtype=np.int64)
        xm, zm = self.x.to_int(), self.z.to_int()
        signs = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
        out = np.zeros((dim, dim), dtype=complex)
        # sigma = i^{|x&z|} X^x Z^z
        coeff = 1j ** ((self.phase + bin(xm & zm).count("1")) % 4)
        out[idx ^ xm, idx] = coeff * signs
        return out


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    if a.n != b.n:
        raise DimensionMismatch("operators act on different qubit counts")
    return (a.z.dot(b.x) + a.x.dot(b.z)) % 2 == 0


def product(ops: Sequence[PauliOperator], n: int | None = None) -> PauliOperator:
    """ops[0] * ops[1] * ... (left to right)."""
    if not ops:
        if n is None:
            raise ValueError("empty product needs a qubit count")
        return PauliOperator.identity(n)
    out = ops[0]
    for op in ops[1:]:
        out = out * op
    return out


class StabilizerError(ValueError):
    pass


@dataclass
class StabilizerSet:
    n: int
    generators: list[PauliOperator]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [str(i) for i in range(len(self.generators))]

    def symplectic_matrix(self) -> BitMatrix:
        """Generators as rows of (x | z)."""
        if not self.generators:
            return BitMatrix(0, 2 * self.n)
        return BitMatrix.from_rows([g.symplectic() for g in self.generators])

    def symplectic_rank(self) -> int:
        return rank(self.symplectic_matrix())

    def first_anticommuting_pair(self) -> tuple[int, int] | None:
        if not self.generators:
            return None
        m = self.symplectic_matrix().dense().astype(np.int64)
        x, z = m[:, : self.n], m[:, self.n :]
        form = (x @ z.T + z @ x.T) & 1
        bad = np.argwhere(np.triu(form))
        return (int(bad[0][0]), int(bad[0][1])) if bad.size else None

    def all_commute(self) -> bool:
        return self.first_anticommuting_pair() is None

    def is_independent(self) -> bool:
        return self.symplectic_rank() == len(self.generators)

    def check(self) -> "StabilizerSet":
        pair = self.first_anticommuting_pair()
        if pair is not None:
            i, j = pair
            raise StabilizerError(f"generators {self.labels[i]} and {self.labels[j]} anticommute")
        return self

    def with_signs(self, flips: Sequence[int]) -> "StabilizerSet":
        gens = [g.scaled(2) if f else g for g, f in zip(self.generators, flips)]
        return StabilizerSet(self.n, gens, list(self.labels))

    def conjugated_by(self, op: PauliOperator) -> "StabilizerSet":
        """Stabilizers of op|psi> given those of |psi>."""
        return self.with_signs([0 if commutes(g, op) else 1 for g in self.generators])

    def expectation(self, op: PauliOperator) -> int:
        """<psi|op|psi> for the stabilizer state of a full-rank commuting set: +1, -1 or 0."""
        if len(self.generators) != self.n or not self.is_independent():
            raise StabilizerError("expectations need n independent generators")
        for g in self.generators:
            if not commutes(g, op):
                return 0
        coeffs = solve(self.symplectic_matrix().T, op.symplectic())
        if coeffs is None:
            raise StabilizerError("operator commutes with a full stabilizer group but lies outside it")
        member = product([self.generators[i] for i in coeffs.support()], self.n)
        diff = (op.phase - member.phase) % 4
        if diff % 2:
            raise StabilizerError("non-Hermitian operator has no real expectation")
        return 1 if diff == 0 else -1

    def projected_eigenvalue(self, op: PauliOperator, measured: Sequence[int]) -> int | None:
        """Eigenvalue of op on the state with ``measured`` qubits projected onto <+|.

        Returns +1 or -1 when op times some X string on the measured qubits is in
        the stabilizer group up to sign, otherwise None.
        """
        measured = list(measured)
        cols = [g.symplectic() for g in self.generators]
        cols += [PauliOperator.X(self.n, [q]).symplectic() for q in measured]
        coeffs = solve(BitMatrix.from_columns(cols), op.symplectic())
        if coeffs is None:
            return None
        chosen = [i - len(self.generators) for i in coeffs.support() if i >= len(self.generators)]
        xs = PauliOperator.X(self.n, [measured[i] for i in chosen])
        val = self.expectation(op * xs)
        return val if val != 0 else None


def css_stabilizers(css: CssComplex) -> StabilizerSet:
    n = css.num_qubits
    gens, labels = [], []
    dx = css.delta_x
    for a in range(css.size(2)):
        gens.append(PauliOperator.X(n, dx.row(a)))
        labels.append(f"A{css.cells_x[a]}")
    dz = css.delta_z
    for b in range(css.size(0)):
        gens.append(PauliOperator.Z(n, dz.column(b)))
        labels.append(f"B{css.cells_z[b]}")
    return StabilizerSet(n, gens, labels).check()


def cluster_stabilizers(fol: FoliatedComplex) -> StabilizerSet:
    """K(s) = X(s) Z(ds) for Q1 cells and K(t) = X(t) Z(d*t) for Q2 cells; Q1 qubits come first."""
    n1, n2 = fol.size(1), fol.size(2)
    n = n1 + n2
    d = fol.diffs[1]
    d_cols = d.column_supports()
    d_rows = d.row_supports()
    gens, labels = [], []
    for s in range(n1):
        gens.append(PauliOperator(n, BitVector.from_support(n, [s]), BitVector.from_support(n, [n1 + t for t in d_cols[s]])))
        labels.append(f"K{fol.grades[1][s]}")
    for t in range(n2):
        gens.append(PauliOperator(n, BitVector.from_support(n, [n1 + t]), BitVector.from_support(n, d_rows[t])))
        labels.append(f"K{fol.grades[2][t]}")
    return StabilizerSet(n, gens, labels).check()


def chamon_stabilizers(model) -> StabilizerSet:
    n = model.num_vertices
    gens = [PauliOperator.from_letters(n, letters) for letters in model.letters]
    return StabilizerSet(n, gens, [f"O{c}" for c in model.cubes]).check()


def chamon_from_maps(model) -> list[PauliOperator]:
    """-Z(delta_c s) X(delta'_c s) per cube, built from the two F2 maps."""
    n = model.num_vertices
    out = []
    for b in range(model.num_cubes):
        z = PauliOperator.Z(n, model.delta_c.column(b))
        x = PauliOperator.X(n, model.delta_c_prime.column(b))
        out.append(-(z * x))
    return out


class NotASymmetry(ValueError):
    pass


def symmetry_operator(chain: BitVector, kind: str, context, grade: int | None = None) -> PauliOperator:
    """Pauli operator supported on a (dual) cycle.

    For a foliated complex, ``grade`` 1 needs a cycle (d z = 0) and ``grade`` 2
    a dual cycle (d* z = 0); the operator acts on the Q1 or Q2 qubits. For a CSS
    code, an X string needs d*_Z z = 0 and a Z string needs d_X z = 0.
    """
    kind = kind.upper()
    if kind not in ("X", "Z"):
        raise ValueError("kind must be X or Z")
    if isinstance(context, FoliatedComplex):
        if kind != "X" or grade not in (1, 2):
            raise ValueError("foliated symmetries are X strings on grade 1 or 2")
        d = context.diffs[1]
        residue = d @ chain if grade == 1 else d.T @ chain
        if not residue.is_zero():
            raise NotASymmetry("chain is not a (dual) cycle")
        n1 = context.size(1)
        n = context.num_qubits
        offset = 0 if grade == 1 else n1
        return PauliOperator.X(n, [offset + i for i in chain.support()])
    if isinstance(context, CssComplex):
        residue = context.delta_z.T @ chain if kind == "X" else context.delta_x @ chain
        if not residue.is_zero():
            raise NotASymmetry("chain does not commute with the checks")
        n = context.num_qubits
        return PauliOperator.X(n, chain) if kind == "X" else PauliOperator.Z(n, chain)
    raise TypeError("unsupported context")
