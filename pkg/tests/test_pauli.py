import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csskit.chain import dualize, foliate, homology_basis
from csskit.f2 import BitVector, DimensionMismatch
from csskit.models import build_model
from csskit.pauli import (
    NotASymmetry,
    PauliOperator,
    StabilizerError,
    StabilizerSet,
    cluster_stabilizers,
    commutes,
    css_stabilizers,
    product,
    symmetry_operator,
)
from oracles import apply_letters, pauli_dense, stabilizer_state

letters = st.sampled_from("IXYZ")


@st.composite
def paulis(draw, n=3):
    word = draw(st.lists(letters, min_size=n, max_size=n))
    phase = draw(st.integers(0, 3))
    return PauliOperator.from_letters(n, {q: a for q, a in enumerate(word) if a != "I"}, phase)


def dense(p: PauliOperator) -> np.ndarray:
    return (1j ** p.phase) * pauli_dense(p.n, p.letters())


# algebra against explicit Kronecker products


@given(paulis())
def test_matrix_matches_kron(p):
    assert np.allclose(p.to_matrix(), dense(p))


@given(paulis(), paulis())
def test_product_matches_matrix_product(a, b):
    assert np.allclose(dense(a * b), dense(a) @ dense(b))


@given(paulis(), paulis())
def test_commutes_matches_matrices(a, b):
    ma, mb = dense(a), dense(b)
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


@given(paulis(), st.integers(0, 7))
def test_vector_action_matches_kron(p, basis):
    v = np.zeros(8, dtype=complex)
    v[basis] = 1
    assert np.allclose(apply_letters(3, p.letters(), v, p.phase), dense(p) @ v)


@given(paulis())
def test_hermitian_iff_phase_even(p):
    m = dense(p)
    assert p.is_hermitian == np.allclose(m, m.conj().T)
    assert np.allclose(dense(p.dagger()), m.conj().T)


def test_commutation_examples():
    assert not commutes(PauliOperator.X(2, [0]), PauliOperator.Z(2, [0]))
    assert commutes(PauliOperator.X(2, [0]), PauliOperator.Z(2, [1]))
    with pytest.raises(DimensionMismatch):
        commutes(PauliOperator.X(2, [0]), PauliOperator.X(3, [0]))


def test_rigid_line_anticommutes_with_single_site():
    css = build_model("qpim2d", (3, 3))
    n = css.num_qubits
    x0, y0 = 1, 2
    sites = {c.coords: i for i, c in enumerate(css.cells_q)}
    line = PauliOperator.X(n, [sites[(x0, y)] for y in range(3)])
    assert not commutes(PauliOperator.Z(n, [sites[(x0, y0)]]), line)
    assert commutes(PauliOperator.Z(n, [sites[(x0 + 1, y0)]]), line)


def test_y_is_ixz():
    y = PauliOperator.from_letters(1, {0: "Y"})
    assert y == PauliOperator.X(1, [0]) * PauliOperator.Z(1, [0]) * PauliOperator.identity(1).scaled(1)


def test_string_form_round_trip():
    p = PauliOperator.from_letters(8, {3: "X", 5: "Z", 7: "Y"}, 3)
    assert p.to_string() == "-iX3Z5Y7"
    assert PauliOperator.from_string(8, p.to_string()) == p
    assert PauliOperator.identity(2).to_string() == "+I"
    with pytest.raises(ValueError):
        PauliOperator.from_string(2, "Q0")


def test_product_of_empty_list():
    assert product([], 3) == PauliOperator.identity(3)
    with pytest.raises(ValueError):
        product([])


# CSS stabilizers


def test_toric_css_stabilizers():
    s = css_stabilizers(build_model("toric2d", (2,)))
    xs = [g for g in s.generators if not g.x.is_zero()]
    zs = [g for g in s.generators if not g.z.is_zero()]
    assert len(xs) == 4 and len(zs) == 4
    assert s.all_commute()


def test_qpim_has_no_x_generators():
    s = css_stabilizers(build_model("qpim2d", (2, 2)))
    assert all(g.x.is_zero() for g in s.generators)


def test_xcube_generator_weights():
    s = css_stabilizers(build_model("xcube", (2,)))
    xs = [g.weight() for g in s.generators if not g.x.is_zero()]
    zs = [g.weight() for g in s.generators if not g.z.is_zero()]
    assert len(xs) == 24 and set(xs) == {4}
    assert len(zs) == 8 and set(zs) == {12}


@pytest.mark.parametrize("name", ["toric2d", "toric3d", "xcube", "checkerboard", "haah", "qc:3,1,0"])
def test_dual_cycles_commute_with_z_checks(name):
    css = build_model(name, (2,))
    s = css_stabilizers(css)
    h = homology_basis(dualize(css), 1)
    for zs in h.representatives:
        op = symmetry_operator(zs, "X", css)
        assert all(commutes(op, g) for g in s.generators)


def test_anticommuting_set_is_rejected():
    s = StabilizerSet(1, [PauliOperator.X(1, [0]), PauliOperator.Z(1, [0])])
    assert s.first_anticommuting_pair() == (0, 1)
    with pytest.raises(StabilizerError):
        s.check()


# cluster stabilizers


def test_qpim_cluster_stabilizers_follow_the_differential():
    fol = foliate(build_model("qpim2d", (2, 2)), 2, "periodic")
    s = cluster_stabilizers(fol)
    n1 = fol.size(1)
    assert len(s.generators) == fol.num_qubits
    d = fol.diffs[1]
    for i, g in enumerate(s.generators[:n1]):
        assert g.x.support() == [i]
        assert g.z.support() == [n1 + t for t in d.column(i).support()]
    for t, g in enumerate(s.generators[n1:]):
        assert g.x.support() == [n1 + t]
        assert g.z.support() == d.row(t).support()


def test_cluster_stabilizers_commute_exhaustively():
    fol = foliate(build_model("qpim2d", (2, 2)), 2, "periodic")
    gens = cluster_stabilizers(fol).generators
    for a, b in itertools.combinations(gens, 2):
        assert commutes(a, b)


@pytest.mark.parametrize("name,bc", [("qpim2d", "periodic"), ("toric2d", "periodic"), ("toric2d", "open")])
def test_cluster_stabilizers_have_full_rank(name, bc):
    fol = foliate(build_model(name, (2,)), 2, bc)
    s = cluster_stabilizers(fol)
    assert s.symplectic_rank() == fol.num_qubits
    assert s.is_independent()


# symmetries of the foliated qPIM state


def test_vertical_edge_line_is_a_symmetry():
    css = build_model("qpim2d", (2, 2))
    fol = foliate(css, 3, "periodic")
    gens = cluster_stabilizers(fol).generators
    for site in range(css.num_qubits):
        line = BitVector.zeros(fol.size(1))
        for w in range(3):
            line = line ^ fol.embed(1, "q.int", w, BitVector.from_support(css.num_qubits, [site]))
        op = symmetry_operator(line, "X", fol, 1)
        assert op.weight() == 3
        assert all(commutes(op, g) for g in gens)


def test_xw_plane_of_vertices_is_a_symmetry():
    css = build_model("qpim2d", (3, 3))
    fol = foliate(css, 2, "periodic")
    gens = cluster_stabilizers(fol).generators
    for y0 in range(3):
        plane = BitVector.from_support(fol.size(2), [
            i for i, p in enumerate(fol.provenance[2]) if p.kind == "q.pt" and css.cells_q[p.base].coords[1] == y0
        ])
        op = symmetry_operator(plane, "X", fol, 2)
        assert all(commutes(op, g) for g in gens)


def test_zero_chain_gives_identity():
    fol = foliate(build_model("qpim2d", (2, 2)), 2)
    op = symmetry_operator(BitVector.zeros(fol.size(1)), "X", fol, 1)
    assert op == PauliOperator.identity(fol.num_qubits)


def test_non_cycle_is_rejected():
    fol = foliate(build_model("qpim2d", (2, 2)), 2)
    with pytest.raises(NotASymmetry):
        symmetry_operator(BitVector.from_support(fol.size(1), [0]), "X", fol, 1)
    css = build_model("toric2d", (2,))
    with pytest.raises(NotASymmetry):
        symmetry_operator(BitVector.from_support(css.num_qubits, [0]), "Z", css)


# stabilizer-state expectations


def test_expectation_against_state_vector():
    fol = foliate(build_model("qpim2d", (2, 2)), 1, "periodic")
    s = cluster_stabilizers(fol)
    n = fol.num_qubits
    psi = stabilizer_state(n, [(g.letters(), g.phase) for g in s.generators])
    rng = np.random.default_rng(5)
    for _ in range(20):
        pick = rng.integers(0, 2, size=len(s.generators))
        op = product([g for g, b in zip(s.generators, pick) if b], n)
        op = op * PauliOperator.Z(n, [int(rng.integers(n))]) if rng.random() < 0.5 else op
        expect = float(np.real(psi.conj() @ apply_letters(n, op.letters(), psi, op.phase)))
        assert s.expectation(op) == pytest.approx(expect, abs=1e-9)
