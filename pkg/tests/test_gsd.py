import itertools
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csskit.f2 import BitMatrix, BitVector, kernel_basis, rank
from csskit.gsd import (
    CC_POLYNOMIALS,
    QC_POLYNOMIALS,
    BudgetExceeded,
    LaurentPoly,
    PolyMatrix,
    complement_order,
    evaluate_polynomial,
    expand,
    expand_vector,
    gsd_cc,
    gsd_cross_check,
    gsd_qc,
    gsd_report,
    sigma_cc,
    sigma_qc,
    symmetry_generators,
)
from csskit.models import ConstraintViolation, build_model
from oracles import gf2_rank

# Printed generating maps. An entry "245" stands for (1+x2)(1+x4)(1+x5), "0" for zero.
# Rows are k-cells in lexicographic axis order; columns are as printed.

PRINTED = {
    (3, 1): [
        "2 0 3",
        "1 3 0",
        "0 2 1",
    ],
    (4, 1): [
        "0 34 24 23",
        "34 0 14 13",
        "24 14 0 12",
        "23 13 12 0",
    ],
    (5, 1): [
        "0 345 245 235 234",
        "345 0 145 135 134",
        "245 145 0 125 124",
        "235 135 125 0 123",
        "234 134 124 123 0",
    ],
    (5, 2): [
        "0 0 0 0 0 0 0 5 4 3",
        "0 0 0 0 0 5 4 0 0 2",
        "0 0 0 0 5 0 3 0 2 0",
        "0 0 0 0 4 3 0 2 0 0",
        "0 0 5 4 0 0 0 0 0 1",
        "0 5 0 3 0 0 0 0 1 0",
        "0 4 3 0 0 0 0 1 0 0",
        "5 0 0 2 0 0 1 0 0 0",
        "4 0 2 0 0 1 0 0 0 0",
        "3 2 0 0 1 0 0 0 0 0",
    ],
    (6, 1): [
        "0 3456 2456 2356 2346 2345",
        "3456 0 1456 1356 1346 1345",
        "2456 1456 0 1256 1246 1245",
        "2356 1356 1256 0 1236 1235",
        "2346 1346 1246 1236 0 1234",
        "2345 1345 1245 1235 1234 0",
    ],
    (6, 2): [
        "0 0 0 0 0 0 0 0 0 56 46 45 36 35 34",
        "0 0 0 0 0 0 56 46 45 0 0 0 26 25 24",
        "0 0 0 0 0 56 0 36 35 0 26 25 0 0 23",
        "0 0 0 0 0 46 36 0 34 26 0 24 0 23 0",
        "0 0 0 0 0 45 35 34 0 25 24 0 23 0 0",
        "0 0 56 46 45 0 0 0 0 0 0 0 16 15 14",
        "0 56 0 36 35 0 0 0 0 0 16 15 0 0 13",
        "0 46 36 0 34 0 0 0 0 16 0 14 0 13 0",
        "0 54 35 34 0 0 0 0 0 15 14 0 13 0 0",
        "56 0 0 26 25 0 0 16 15 0 0 0 0 0 12",
        "46 0 26 0 24 0 16 0 14 0 0 0 0 12 0",
        "45 0 25 24 0 0 15 14 0 0 0 0 12 0 0",
        "36 26 0 0 23 16 0 0 13 0 0 12 0 0 0",
        "35 25 0 23 0 15 0 13 0 0 12 0 0 0 0",
        "34 24 23 0 0 14 13 0 0 12 0 0 0 0 0",
    ],
}


def parse_entry(d, text):
    if text == "0":
        return LaurentPoly.zero(d)
    p = LaurentPoly.one(d)
    for ch in text:
        p = p * LaurentPoly.one_plus(d, int(ch) - 1)
    return p


def printed_matrix(d, k):
    return PolyMatrix(d, [[parse_entry(d, e) for e in row.split()] for row in PRINTED[(d, k)]])


def bar_one_plus(d, axis):
    return LaurentPoly.one(d) + LaurentPoly.var(d, axis, -1)


def line(d, axis, L):
    return LaurentPoly.line_sum(d, axis, L)


# generating maps


def test_three_one_matches_printed_columns():
    # columns printed as xy, yz, zx faces
    assert sigma_cc(3, 1, [(0, 1), (1, 2), (0, 2)]) == printed_matrix(3, 1)


@pytest.mark.parametrize("d,k", [(4, 1), (5, 1), (5, 2), (6, 1), (6, 2)])
def test_generating_map_matches_printed(d, k):
    # columns are ordered by the deleted axes
    assert sigma_cc(d, k, complement_order(d, d - k)) == printed_matrix(d, k)


def test_column_order_must_be_a_permutation():
    with pytest.raises(ValueError):
        sigma_cc(3, 1, [(0, 1), (0, 1), (1, 2)])
    with pytest.raises(ConstraintViolation):
        sigma_cc(4, 2)


def test_qc_maps_compose_to_zero():
    for d, k, l in ((3, 1, 0), (5, 2, 1), (5, 1, 0), (6, 2, 0)):
        dz, dx = sigma_qc(d, k, l)
        assert (dx @ dz).is_zero()
        assert dz.rows == comb(d, k) and dz.cols == comb(d, d - k) and dx.rows == comb(d, l)


def test_qc_constraint_errors():
    with pytest.raises(ConstraintViolation):
        sigma_qc(4, 1, 0)
    with pytest.raises(ConstraintViolation):
        sigma_qc(5, 2, 2)


# expansion


def test_expand_examples():
    one = PolyMatrix(1, [[LaurentPoly.one(1)]])
    assert expand(one, (3,)) == BitMatrix.identity(3)
    opx = PolyMatrix(1, [[LaurentPoly.one_plus(1, 0)]])
    assert expand(opx, (2,)).dense().tolist() == [[1, 1], [1, 1]]
    with pytest.raises(ValueError):
        expand(one, (2, 2))


@st.composite
def poly(draw, d=2):
    terms = draw(st.lists(st.tuples(*[st.integers(-2, 3)] * d), max_size=4))
    return LaurentPoly(d, terms)


@st.composite
def poly_matrix(draw, rows, cols, d=2):
    return PolyMatrix(d, [[draw(poly(d)) for _ in range(cols)] for _ in range(rows)])


@settings(max_examples=40)
@given(poly_matrix(2, 3), poly_matrix(3, 2), st.sampled_from([(2, 2), (2, 3), (3, 4)]))
def test_expand_is_multiplicative(a, b, periods):
    assert expand(a @ b, periods) == expand(a, periods) @ expand(b, periods)


@settings(max_examples=40)
@given(poly_matrix(2, 3), poly_matrix(2, 3), st.sampled_from([(2, 2), (3, 2)]))
def test_expand_is_additive_and_adjoint_is_transpose(a, b, periods):
    assert expand(a + b, periods) == expand(a, periods) + expand(b, periods)
    assert expand(a.adjoint(), periods) == expand(a, periods).T


@given(poly())
def test_polynomial_reduction_respects_periods(p):
    assert expand(PolyMatrix(2, [[p.reduce((2, 3))]]), (2, 3)) == expand(PolyMatrix(2, [[p]]), (2, 3))
    assert p.antipode().antipode() == p


def test_expand_vector_matches_first_column():
    m = printed_matrix(3, 1)
    col = [m[i, 0] for i in range(3)]
    assert expand_vector(col, (2, 2, 2)) == expand(m, (2, 2, 2)).column(0)


def test_cc20_expands_to_qpim():
    for per in ((2, 2), (2, 3), (3, 4)):
        assert expand(sigma_cc(2, 0), per) == build_model("qpim2d", per).delta_z


def test_cc_expansion_matches_built_model():
    for name, d, k in (("cc:3,1", 3, 1), ("cc:4,1", 4, 1)):
        css = build_model(name, (2,))
        assert rank(expand(sigma_cc(d, k), (2,) * d)) == gf2_rank(css.delta_z.dense())


def stack(top, bottom):
    return PolyMatrix(top.d, top.entries + bottom.entries)


def side_by_side(left, right):
    return PolyMatrix(left.d, [a + b for a, b in zip(left.entries, right.entries)])


def symplectic_form(d, n):
    one, zero = LaurentPoly.one(d), LaurentPoly.zero(d)
    return PolyMatrix(d, [[one if abs(i - j) == n else zero for j in range(2 * n)] for i in range(2 * n)])


def test_excitation_map_kills_generating_map():
    sz = sigma_cc(3, 1)
    sigma = stack(PolyMatrix.zeros(3, sz.rows, sz.cols), sz)
    eps = sigma.adjoint() @ symplectic_form(3, sz.rows)
    assert (eps @ sigma).is_zero()
    # quantum code: X stabilizers (d_X^dagger over 0) beside Z stabilizers (0 over d_Z)
    dz, dx = sigma_qc(3, 1, 0)
    n = dz.rows
    x_stabs = stack(dx.adjoint(), PolyMatrix.zeros(3, n, dx.rows))
    z_stabs = stack(PolyMatrix.zeros(3, n, dz.cols), dz)
    sigma = side_by_side(x_stabs, z_stabs)
    assert (sigma.adjoint() @ symplectic_form(3, n) @ sigma).is_zero()
    # a lone X on one edge does not commute with the Z stabilizers
    lone = stack(PolyMatrix(3, [[LaurentPoly.one(3)]] + [[LaurentPoly.zero(3)]] * (n - 1)),
                 PolyMatrix.zeros(3, n, 1))
    assert not (lone.adjoint() @ symplectic_form(3, n) @ z_stabs).is_zero()


@pytest.mark.parametrize("d,k,L", [(3, 1, 2), (3, 1, 3), (4, 1, 2), (5, 2, 2)])
def test_image_is_the_annihilator_of_the_adjoint_kernel(d, k, L):
    m = expand(sigma_cc(d, k), (L,) * d)
    ker = kernel_basis(m.T)
    # dim Ker sigma^dagger + dim Im sigma = number of rows
    assert len(ker) + rank(m) == m.rows
    cols = [m.column(j) for j in range(m.cols)]
    for v in ker[:20]:
        assert all(not (v & c).weight() % 2 for c in cols)


# ground-state degeneracy


@pytest.mark.parametrize("d,k,L,expected", [
    (3, 1, 2, 10), (3, 1, 3, 29), (3, 1, 4, 66), (4, 1, 2, 40), (5, 1, 2, 126),
    (5, 2, 2, 134), (6, 1, 2, 336), (6, 2, 2, 526),
])
def test_cc_values(d, k, L, expected):
    assert gsd_cc(d, k, L) == expected
    assert evaluate_polynomial(CC_POLYNOMIALS[(d, k)], (L,) * d) == expected


@pytest.mark.parametrize("params,L,expected", [((3, 1, 0), 2, 3), ((3, 1, 0), 3, 3), ((5, 2, 1), 2, 10),
                                               ((5, 1, 0), 2, 95)])
def test_qc_values(params, L, expected):
    assert gsd_qc(*params, L) == expected
    assert evaluate_polynomial(QC_POLYNOMIALS[params], (L,) * params[0]) == expected


def test_qc_620_equals_its_polynomial():
    value = gsd_qc(6, 2, 0, 2)
    assert value == 469
    assert evaluate_polynomial(QC_POLYNOMIALS[(6, 2, 0)], (2,) * 6) == 469


def test_anisotropic_three_one():
    assert gsd_cc(3, 1, (2, 3, 2)) == 2 * 3 * 2 + 2
    assert evaluate_polynomial(CC_POLYNOMIALS[(3, 1)], (2, 3, 2)) == 14
    assert gsd_cross_check("cc:3,1", (2, 3, 2), 14).ok


def test_anisotropic_four_one_polynomial():
    assert gsd_cc(4, 1, (2, 2, 2, 3)) == evaluate_polynomial(CC_POLYNOMIALS[(4, 1)], (2, 2, 2, 3))


def test_evaluate_polynomial_rejects_fractions():
    with pytest.raises(ValueError):
        evaluate_polynomial([0, 1], (2, 3))


def test_gsd_report():
    r = gsd_report("cc:3,1", 2)
    assert r.match and r.computed == 10 and r.periods == (2, 2, 2)
    r = gsd_report("cc:2,0", 2)
    assert r.expected is None and not r.match
    with pytest.raises(ValueError):
        gsd_report("toric2d", 2)


def test_budget():
    with pytest.raises(BudgetExceeded):
        gsd_cc(6, 2, 3)
    with pytest.raises(BudgetExceeded):
        gsd_cc(3, 1, 4, budget=100)


@pytest.mark.parametrize("model,periods,expected", [
    ("qpim2d", (2, 2), 3), ("qpim2d", (3, 2), 4), ("toric2d", (2,), 2), ("toric3d", (2,), 3),
    ("checkerboard", (2,), 6), ("checkerboard", (4, 2, 2), 10), ("xcube", (2,), 9), ("xcube", (2, 3, 2), 11),
    ("haah", (2,), 6), ("haah", (3,), 2), ("qc:3,1,0", (2,), 3), ("cc:3,1", (2,), 10),
])
def test_cross_check_against_homology(model, periods, expected):
    r = gsd_cross_check(model, periods, expected)
    assert r.algebraic == r.homological == expected


# symmetries


def test_three_one_symmetry_columns():
    L = 3
    sym = symmetry_generators(3, 1, L)
    d = 3
    star = [bar_one_plus(d, a) for a in range(3)]
    for shift in itertools.product(range(L), repeat=3):
        assert sym.contains_generator(star, shift)
    planes = [
        [line(d, 1, L) * line(d, 2, L), LaurentPoly.zero(d), LaurentPoly.zero(d)],
        [LaurentPoly.zero(d), line(d, 0, L) * line(d, 2, L), LaurentPoly.zero(d)],
        [LaurentPoly.zero(d), LaurentPoly.zero(d), line(d, 0, L) * line(d, 1, L)],
    ]
    for p in planes:
        assert sym.contains_generator(p)
        assert sym.contains_generator(p, (1, 2, 0))
    assert sym.contains(BitVector.zeros(3 * L ** 3))
    assert not sym.contains_generator([LaurentPoly.one(d), LaurentPoly.zero(d), LaurentPoly.zero(d)])
    assert sym.dimension == L ** 3 + 2


def test_five_two_symmetry_families():
    d, L = 5, 2
    sym = symmetry_generators(d, 2, L)
    faces = list(itertools.combinations(range(d), 2))
    phi = {f: i for i, f in enumerate(faces)}
    zero = LaurentPoly.zero(d)

    def column(entries):
        col = [zero] * len(faces)
        for face, p in entries.items():
            col[phi[tuple(sorted(face))]] = p
        return col

    # local: s_l s_m s_n on the face spanned by the two remaining axes
    for p, q in faces:
        l, m, n = [a for a in range(d) if a not in (p, q)]
        assert sym.contains_generator(column({(p, q): line(d, l, L) * line(d, m, L) * line(d, n, L)}))
    # plane: s_r s_t times (1+x_l)(1+x_m) and (1+x_l)(1+x_n) conjugated
    for l in range(d):
        for m, n in itertools.combinations([a for a in range(d) if a != l], 2):
            r, t = [a for a in range(d) if a not in (l, m, n)]
            s = line(d, r, L) * line(d, t, L)
            col = column({(l, m): s * bar_one_plus(d, l) * bar_one_plus(d, m),
                          (l, n): s * bar_one_plus(d, l) * bar_one_plus(d, n)})
            assert sym.contains_generator(col)
    # the five printed subsystem vectors: faces through one axis, entry 1 + conj of the other axis
    for a in range(d):
        col = column({(a, b): bar_one_plus(d, b) for b in range(d) if b != a})
        assert sym.contains_generator(col)
        assert sym.contains_generator(col, (1, 0, 1, 0, 0))
    assert sym.dimension == 134
