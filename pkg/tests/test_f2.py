import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csskit.f2 import (
    BitMatrix,
    BitVector,
    DimensionMismatch,
    coker_dim,
    compose,
    image_basis,
    in_span,
    kernel_basis,
    pivot_columns,
    rank,
    rref,
    solve,
    span_elements,
)
from oracles import gf2_rank, kernel_size, span_size


def rows(*texts):
    return BitMatrix.from_rows([BitVector.from_string(t) for t in texts])


@st.composite
def matrices(draw, max_rows=9, max_cols=9):
    r = draw(st.integers(0, max_rows))
    c = draw(st.integers(0, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=r * c, max_size=r * c))
    return BitMatrix.from_dense(np.array(bits, dtype=np.uint8).reshape(r, c))


@st.composite
def wide_matrices(draw):
    """Includes shapes that straddle the 64-bit word boundary."""
    r = draw(st.integers(1, 5))
    c = draw(st.sampled_from([63, 64, 65, 130]))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return BitMatrix.from_dense(rng.integers(0, 2, size=(r, c)))


# bit vectors


def test_vector_round_trips():
    v = BitVector.from_string("1011001")
    assert v.support() == [0, 2, 3, 6]
    assert v.weight() == 4
    assert BitVector.from_int(7, v.to_int()) == v
    assert BitVector.from_support(7, [0, 2, 3, 6]) == v
    assert repr(v) == "BitVector('1011001')"


def test_vector_arithmetic_and_errors():
    a = BitVector.from_string("1100")
    b = BitVector.from_string("0110")
    assert (a ^ b) == BitVector.from_string("1010")
    assert a.dot(b) == 1
    assert a.concat(b).length == 8
    with pytest.raises(DimensionMismatch):
        a ^ BitVector.from_string("11")
    with pytest.raises(ValueError):
        BitVector.from_int(2, 5)


def test_vector_across_word_boundary():
    v = BitVector.from_support(130, [0, 63, 64, 129])
    assert v.support() == [0, 63, 64, 129]
    assert v[64] == 1 and v[65] == 0
    assert v.dot(v) == 0


# rank


def test_rank_examples():
    assert rank(BitMatrix.identity(3)) == 3
    assert rank(BitMatrix.zeros(4, 7)) == 0
    assert rank(rows("110", "011", "101")) == 2


def test_rank_example_by_enumeration():
    # every combination of the three rows: span has 4 elements
    combos = {0}
    for r in (0b011, 0b110, 0b101):
        combos |= {c ^ r for c in combos}
    assert len(combos) == 4
    assert rank(rows("110", "011", "101")) == 2


@given(matrices())
def test_rank_matches_xor_basis_oracle(m):
    assert rank(m) == (gf2_rank(m.dense()) if m.rows and m.cols else 0)


@given(matrices())
def test_rank_of_transpose(m):
    assert rank(m) == rank(m.T)


@given(matrices(max_rows=6, max_cols=6))
def test_rank_is_log_span_size(m):
    cols = [m.column(j).to_int() for j in range(m.cols)]
    assert 2 ** rank(m) == span_size(cols)


@given(wide_matrices())
def test_rank_on_multiword_rows(m):
    assert rank(m) == gf2_rank(m.dense())


# kernel


def test_kernel_examples():
    assert kernel_basis(BitMatrix.identity(4)) == []
    assert len(kernel_basis(BitMatrix.zeros(2, 3))) == 3
    basis = kernel_basis(rows("111"))
    assert len(basis) == 2
    span = {v.to_int() for v in span_elements(basis, 3)}
    brute = {x for x in range(8) if bin(x).count("1") % 2 == 0}
    assert span == brute


@given(matrices())
def test_kernel_vectors_are_independent_solutions(m):
    basis = kernel_basis(m)
    for v in basis:
        assert (m @ v).is_zero()
    assert len(basis) == m.cols - rank(m)
    if basis:
        assert rank(BitMatrix.from_rows(basis)) == len(basis)


@given(matrices(max_rows=5, max_cols=8))
def test_kernel_size_by_enumeration(m):
    if m.rows == 0:
        assert len(kernel_basis(m)) == m.cols
        return
    assert 2 ** len(kernel_basis(m)) == kernel_size(m.dense())


# solve


def test_solve_examples():
    b = BitVector.from_string("101")
    assert solve(BitMatrix.identity(3), b) == b
    assert solve(BitMatrix.zeros(3, 3), b) is None
    m = rows("110", "011")
    target = BitVector.from_string("11")
    x = solve(m, target)
    assert m @ x == target
    brute = [c for c in range(8) if m @ BitVector.from_int(3, c) == target]
    assert x.to_int() in brute and sorted(brute) == [0b010, 0b101]


@given(matrices(), st.data())
def test_solve_consistency(m, data):
    bits = data.draw(st.lists(st.integers(0, 1), min_size=m.rows, max_size=m.rows))
    b = BitVector.from_bits(bits) if m.rows else BitVector(0)
    x = solve(m, b)
    if x is None:
        assert not in_span([m.column(j) for j in range(m.cols)], b)
    else:
        assert m @ x == b


@given(matrices(), st.data())
def test_solve_always_succeeds_on_images(m, data):
    bits = data.draw(st.lists(st.integers(0, 1), min_size=m.cols, max_size=m.cols))
    x0 = BitVector.from_bits(bits) if m.cols else BitVector(0)
    b = m @ x0 if m.rows else BitVector(0)
    x = solve(m, b)
    assert x is not None and (m @ x) == b


# cokernel, composition, echelon form


def test_coker_examples():
    assert coker_dim(BitMatrix.identity(5)) == 0
    assert coker_dim(BitMatrix.zeros(3, 4)) == 3
    assert coker_dim(rows("110", "011", "101")) == 1


@given(matrices())
def test_coker_plus_rank_is_rows(m):
    assert coker_dim(m) + rank(m) == m.rows


def test_compose_examples():
    m = rows("101", "011")
    assert BitMatrix.identity(2) @ m == m
    assert (m @ BitMatrix.zeros(3, 4)).is_zero()
    ones_row = rows("11")
    assert (ones_row @ ones_row.T).is_zero()
    with pytest.raises(DimensionMismatch):
        compose(m, m)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_compose_matches_integer_product(a, b, c, seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, size=(a, b))
    y = rng.integers(0, 2, size=(b, c))
    out = BitMatrix.from_dense(x) @ BitMatrix.from_dense(y)
    assert np.array_equal(out.dense(), (x @ y) % 2)


@given(matrices())
def test_rref_pivots_and_image(m):
    red, piv = rref(m)
    assert piv == pivot_columns(m)
    assert len(piv) == rank(m)
    d = red.dense()
    for i, p in enumerate(piv):
        assert d[:, p].sum() == 1 and d[i, p] == 1
    basis = image_basis(m)
    assert len(basis) == rank(m)
    for j in range(m.cols):
        assert in_span(basis, m.column(j))


def test_matrix_views_and_permutation():
    m = rows("100", "011")
    assert m.row_supports() == [[0], [1, 2]]
    assert m.column_supports() == [[0], [1], [1]]
    p = m.permute([1, 0], [2, 1, 0])
    assert p.dense().tolist() == [[1, 1, 0], [0, 0, 1]]
    # repeated rows cancel
    assert BitMatrix.from_column_supports(2, [[0, 0], [1]]).dense().tolist() == [[0, 0], [0, 1]]


def test_span_elements_enumerates_all_combinations():
    gens = [BitVector.from_string("100"), BitVector.from_string("010")]
    got = {v.to_int() for v in span_elements(gens, 3)}
    assert got == {0b000, 0b001, 0b010, 0b011}
