"""Linear algebra over the two-element field on bit-packed matrices.

Bits are packed little-endian into 64-bit words: bit ``j`` of a row lives in
word ``j // 64`` at position ``j % 64``. All elimination routines pivot on the
first nonzero column and keep rows in a fixed order, so bases are reproducible.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
_WORD = np.dtype("<u8")


def word_count(nbits: int) -> int:
    return (nbits + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., n) array of 0/1 values into (..., ceil(n/64)) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8) & 1
    n = bits.shape[-1]
    nw = word_count(n)
    padded = np.zeros(bits.shape[:-1] + (nw * WORD_BITS,), dtype=np.uint8)
    padded[..., :n] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(_WORD).reshape(bits.shape[:-1] + (nw,))


def unpack_bits(words: np.ndarray, nbits: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=_WORD)
    as_bytes = words.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :nbits]


def _parity(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x).sum(axis=-1, dtype=np.int64) & 1


class DimensionMismatch(ValueError):
    """Raised when operand shapes do not agree."""


class BitVector:
    """Immutable vector over F2 of fixed length."""

    __slots__ = ("length", "words")

    def __init__(self, length: int, words: np.ndarray | None = None):
        self.length = int(length)
        nw = word_count(self.length)
        if words is None:
            words = np.zeros(nw, dtype=_WORD)
        else:
            words = np.array(words, dtype=_WORD).reshape(nw)
        self.words = words
        self.words.setflags(write=False)

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> "BitVector":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        arr = arr.reshape(-1)
        return cls(arr.size, pack_bits(arr))

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "BitVector":
        bits = np.zeros(length, dtype=np.uint8)
        for i in support:
            if not 0 <= i < length:
                raise IndexError(f"bit {i} out of range for length {length}")
            bits[i] ^= 1
        return cls(length, pack_bits(bits))

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        return cls.from_bits([int(ch) for ch in text.strip()])

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.length)

    def support(self) -> list[int]:
        return np.flatnonzero(self.bits()).tolist()

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def is_zero(self) -> bool:
        return not self.words.any()

    def to_int(self) -> int:
        """Integer whose bit j equals entry j."""
        out = 0
        for i, w in enumerate(self.words.tolist()):
            out |= int(w) << (WORD_BITS * i)
        return out

    @classmethod
    def from_int(cls, length: int, value: int) -> "BitVector":
        nw = word_count(length)
        mask = (1 << 64) - 1
        words = [(value >> (64 * i)) & mask for i in range(nw)]
        v = cls(length, np.array(words, dtype=_WORD))
        if value >> length:
            raise ValueError("integer has bits beyond the vector length")
        return v

    def _check(self, other: "BitVector") -> None:
        if self.length != other.length:
            raise DimensionMismatch(f"lengths {self.length} and {other.length} differ")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self.length, self.words ^ other.words)

    __add__ = __xor__

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self.length, self.words & other.words)

    def dot(self, other: "BitVector") -> int:
        self._check(other)
        return int(np.bitwise_count(self.words & other.words).sum() & 1)

    def concat(self, other: "BitVector") -> "BitVector":
        return BitVector.from_bits(np.concatenate([self.bits(), other.bits()]))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return int((int(self.words[i >> 6]) >> (i & 63)) & 1)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitVector('{''.join(map(str, self.bits().tolist()))}')"
        return f"BitVector(length={self.length}, weight={self.weight()})"


class BitMatrix:
    """Immutable dense matrix over F2, rows stored as packed words."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        nw = word_count(self.cols)
        if words is None:
            words = np.zeros((self.rows, nw), dtype=_WORD)
        else:
            words = np.array(words, dtype=_WORD).reshape(self.rows, nw)
        self.words = words
        self.words.setflags(write=False)

    # construction

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, a) -> "BitMatrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2d array")
        a = (a.astype(np.int64) & 1).astype(np.uint8)
        return cls(a.shape[0], a.shape[1], pack_bits(a))

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector], cols: int | None = None) -> "BitMatrix":
        if not rows:
            return cls(0, cols or 0)
        n = rows[0].length
        for r in rows:
            if r.length != n:
                raise DimensionMismatch("rows of unequal length")
        return cls(len(rows), n, np.stack([r.words for r in rows]))

    @classmethod
    def from_columns(cls, columns: Sequence[BitVector], rows: int | None = None) -> "BitMatrix":
        if not columns:
            return cls(rows or 0, 0)
        return cls.from_rows(columns).T

    @classmethod
    def from_column_supports(cls, rows: int, supports: Sequence[Iterable[int]]) -> "BitMatrix":
        """Column j has ones at the listed rows; repeated rows cancel."""
        dense = np.zeros((rows, len(supports)), dtype=np.int64)
        for j, supp in enumerate(supports):
            for i in supp:
                dense[i, j] += 1
        return cls.from_dense(dense)

    @classmethod
    def from_row_supports(cls, cols: int, supports: Sequence[Iterable[int]]) -> "BitMatrix":
        return cls.from_column_supports(cols, supports).T

    # views

    def dense(self) -> np.ndarray:
        return unpack_bits(self.words, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.words[i])

    def column(self, j: int) -> BitVector:
        return BitVector.from_bits(self.dense()[:, j])

    def row_supports(self) -> list[list[int]]:
        d = self.dense()
        return [np.flatnonzero(d[i]).tolist() for i in range(self.rows)]

    def column_supports(self) -> list[list[int]]:
        return self.T.row_supports()

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def T(self) -> "BitMatrix":
        return transpose(self)

    def is_zero(self) -> bool:
        return not self.words.any()

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    # algebra

    def apply(self, v: BitVector) -> BitVector:
        if v.length != self.cols:
            raise DimensionMismatch(f"matrix has {self.cols} columns, vector length {v.length}")
        if self.rows == 0:
            return BitVector(0)
        bits = _parity(self.words & v.words[None, :]).astype(np.uint8)
        return BitVector.from_bits(bits)

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return self.apply(other)
        if isinstance(other, BitMatrix):
            return compose(self, other)
        return NotImplemented

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")
        return BitMatrix(self.rows, self.cols, self.words ^ other.words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols}, weight={self.weight()})"

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("row counts differ")
        return BitMatrix.from_dense(np.hstack([self.dense(), other.dense()]))

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise DimensionMismatch("column counts differ")
        return BitMatrix(self.rows + other.rows, self.cols, np.vstack([self.words, other.words]))

    def select_rows(self, idx: Sequence[int]) -> "BitMatrix":
        idx = list(idx)
        return BitMatrix(len(idx), self.cols, self.words[idx] if idx else None)

    def select_columns(self, idx: Sequence[int]) -> "BitMatrix":
        idx = list(idx)
        return BitMatrix.from_dense(self.dense()[:, idx].reshape(self.rows, len(idx)))

    def permute(self, row_perm: Sequence[int] | None = None, col_perm: Sequence[int] | None = None) -> "BitMatrix":
        """Return M' with M'[i, j] = M[row_perm[i], col_perm[j]]."""
        d = self.dense()
        if row_perm is not None:
            d = d[list(row_perm)]
        if col_perm is not None:
            d = d[:, list(col_perm)]
        return BitMatrix.from_dense(d)


def transpose(m: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(m.dense().T)


def compose(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product a·b over F2."""
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot compose {a.shape} with {b.shape}")
    if a.rows == 0 or b.cols == 0:
        return BitMatrix(a.rows, b.cols)
    # float64 products of 0/1 entries are exact well beyond desk sizes
    prod = a.dense().astype(np.float64) @ b.dense().astype(np.float64)
    return BitMatrix.from_dense(np.rint(prod).astype(np.int64) & 1)


def _eliminate(words: np.ndarray, pivot_cols: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form, pivoting only on the first ``pivot_cols`` columns."""
    w = np.array(words, dtype=_WORD, copy=True)
    nrows = w.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(pivot_cols):
        if r == nrows:
            break
        wi = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        below = np.flatnonzero(w[r:, wi] & bit)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            w[[r, p]] = w[[p, r]]
        hits = np.flatnonzero(w[:, wi] & bit)
        hits = hits[hits != r]
        if hits.size:
            w[hits] ^= w[r]
        pivots.append(c)
        r += 1
    return w, pivots


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    w, piv = _eliminate(m.words, m.cols)
    return BitMatrix(m.rows, m.cols, w), piv


def rank(m: BitMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    # eliminate along the shorter side
    if m.rows > m.cols:
        m = m.T
    return len(_eliminate(m.words, m.cols)[1])


def pivot_columns(m: BitMatrix) -> list[int]:
    """Greedy independent columns, scanning left to right."""
    if m.rows == 0 or m.cols == 0:
        return []
    return _eliminate(m.words, m.cols)[1]


def kernel_matrix(m: BitMatrix) -> BitMatrix:
    """Kernel basis as the rows of a matrix, one per free column in ascending order."""
    w, piv = _eliminate(m.words, m.cols)
    r = len(piv)
    free = sorted(set(range(m.cols)) - set(piv))
    basis = np.zeros((len(free), m.cols), dtype=np.uint8)
    if free:
        basis[np.arange(len(free)), free] = 1
        if r:
            reduced = unpack_bits(w[:r], m.cols)
            basis[:, piv] = reduced[:, free].T
    return BitMatrix.from_dense(basis.reshape(len(free), m.cols))


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    k = kernel_matrix(m)
    return [k.row(i) for i in range(k.rows)]


def solve(m: BitMatrix, b: BitVector) -> BitVector | None:
    """Some x with m·x = b, or None when b is outside the image."""
    if b.length != m.rows:
        raise DimensionMismatch(f"right-hand side has length {b.length}, matrix has {m.rows} rows")
    if m.rows == 0:
        return BitVector(m.cols)
    aug = np.hstack([m.dense(), b.bits().reshape(-1, 1)])
    w, piv = _eliminate(pack_bits(aug), m.cols)
    red = unpack_bits(w, m.cols + 1)
    r = len(piv)
    if red[r:, m.cols].any():
        return None
    x = np.zeros(m.cols, dtype=np.uint8)
    if r:
        x[piv] = red[:r, m.cols]
    return BitVector.from_bits(x)


def coker_dim(m: BitMatrix) -> int:
    return m.rows - rank(m)


def image_basis(m: BitMatrix) -> list[BitVector]:
    """Independent columns spanning the image."""
    return [m.column(j) for j in pivot_columns(m)]


def in_span(vectors: Sequence[BitVector], v: BitVector) -> bool:
    if not vectors:
        return v.is_zero()
    return solve(BitMatrix.from_columns(vectors), v) is not None


def span_elements(vectors: Sequence[BitVector], length: int) -> list[BitVector]:
    """All 2^k combinations of the given vectors (for small k)."""
    out = [BitVector(length)]
    for v in vectors:
        out = out + [u ^ v for u in out]
    return out
