"""Dense state-vector simulation and the measurement-based Kramers-Wannier map.

Qubit ``j`` is bit ``j`` of the amplitude index. Registers that combine a
target block and a control block put the targets on the low bits.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import CssComplex, FoliatedComplex
from .f2 import BitMatrix, BitVector, kernel_basis, solve
from .pauli import PauliOperator, StabilizerSet, commutes, product

DEFAULT_CAP = 24
DENSE_KW_LIMIT = 20


class CapExceeded(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class CorrectionFailed(RuntimeError):
    pass


_IDX_CACHE: dict[int, np.ndarray] = {}


def basis_indices(n: int) -> np.ndarray:
    if n not in _IDX_CACHE:
        if len(_IDX_CACHE) > 4:
            _IDX_CACHE.clear()
        _IDX_CACHE[n] = np.arange(1 << n, dtype=np.uint64)
    return _IDX_CACHE[n]


def _parity_of(idx: np.ndarray, mask: int) -> np.ndarray:
    return np.bitwise_count(idx & np.uint64(mask)) & np.uint8(1)


def check_cap(n: int, cap: int = DEFAULT_CAP) -> None:
    if n > cap:
        raise CapExceeded(f"{n} qubits exceeds the cap of {cap}")


def pauli_on_rows(p: PauliOperator, m: np.ndarray) -> np.ndarray:
    """p @ m, with m indexed by basis state along axis 0."""
    idx = basis_indices(p.n)
    xm, zm = p.x.to_int(), p.z.to_int()
    coeff = 1j ** ((p.phase + bin(xm & zm).count("1")) % 4)
    signs = 1.0 - 2.0 * _parity_of(idx, zm)
    shaped = signs.reshape((-1,) + (1,) * (m.ndim - 1)) * m
    return coeff * shaped[idx ^ np.uint64(xm)]


def matrix_times_pauli(m: np.ndarray, p: PauliOperator) -> np.ndarray:
    """m @ p, using p^T = (-1)^{#Y} p."""
    ny = bin(p.x.to_int() & p.z.to_int()).count("1")
    return pauli_on_rows(p.scaled(2 * ny), m.T).T


class StateVector:
    """Dense complex amplitudes over n qubits."""

    def __init__(self, n: int, amps: np.ndarray | None = None, cap: int = DEFAULT_CAP):
        check_cap(n, cap)
        self.n = n
        self.cap = cap
        if amps is None:
            amps = np.zeros(1 << n, dtype=complex)
            amps[0] = 1.0
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes, got {amps.shape}")
        self.amps = amps

    @classmethod
    def plus(cls, n: int, cap: int = DEFAULT_CAP) -> "StateVector":
        check_cap(n, cap)
        return cls(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex), cap)

    @classmethod
    def basis(cls, n: int, index: int, cap: int = DEFAULT_CAP) -> "StateVector":
        check_cap(n, cap)
        a = np.zeros(1 << n, dtype=complex)
        a[index] = 1.0
        return cls(n, a, cap)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy(), self.cap)

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "StateVector":
        return StateVector(self.n, self.amps / np.sqrt(self.norm2()), self.cap)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2 / (self.norm2() * other.norm2())

    def tensor(self, other: "StateVector") -> "StateVector":
        """self on the low qubits, other on the high qubits."""
        check_cap(self.n + other.n, self.cap)
        return StateVector(self.n + other.n, np.outer(other.amps, self.amps).reshape(-1), self.cap)

    # gates

    def _check_qubits(self, *qs: int) -> None:
        if len(set(qs)) != len(qs):
            raise IndexError("qubit indices must be distinct")
        for q in qs:
            if not 0 <= q < self.n:
                raise IndexError(f"qubit {q} out of range")

    def apply_pauli(self, p: PauliOperator) -> "StateVector":
        if p.n != self.n:
            raise ValueError("operator size does not match the state")
        self.amps = pauli_on_rows(p, self.amps)
        return self

    def apply_h(self, q: int) -> "StateVector":
        self._check_qubits(q)
        a = self.amps.reshape(-1, 2, 1 << q)
        lo, hi = a[:, 0, :].copy(), a[:, 1, :].copy()
        a[:, 0, :] = (lo + hi) / np.sqrt(2)
        a[:, 1, :] = (lo - hi) / np.sqrt(2)
        return self

    def apply_cz(self, q1: int, q2: int) -> "StateVector":
        self._check_qubits(q1, q2)
        idx = basis_indices(self.n)
        both = ((idx >> np.uint64(q1)) & (idx >> np.uint64(q2)) & np.uint64(1)).astype(bool)
        self.amps[both] *= -1
        return self

    def apply_controlled_pauli(self, ctrl: int, target: int, letter: str) -> "StateVector":
        self._check_qubits(ctrl, target)
        letter = letter.upper()
        if letter == "I":
            return self
        idx = basis_indices(self.n)
        on = ((idx >> np.uint64(ctrl)) & np.uint64(1)).astype(bool)
        tb = np.uint64(1 << target)
        i0 = idx[on & ((idx & tb) == 0)]
        i1 = i0 | tb
        a0, a1 = self.amps[i0].copy(), self.amps[i1].copy()
        if letter == "Z":
            self.amps[i1] = -a1
        elif letter == "X":
            self.amps[i0], self.amps[i1] = a1, a0
        elif letter == "Y":
            self.amps[i1] = 1j * a0
            self.amps[i0] = -1j * a1
        else:
            raise ValueError(f"unknown Pauli letter {letter!r}")
        return self

    def expectation(self, p: PauliOperator) -> complex:
        return complex(np.vdot(self.amps, pauli_on_rows(p, self.amps))) / self.norm2()

    # projections

    def contract(self, bras: dict[int, np.ndarray]) -> "StateVector":
        """Apply single-qubit bras to the listed qubits; the rest keep their order."""
        arr = self.amps.reshape((2,) * self.n) if self.n else self.amps
        # descending qubits give ascending axes; each contraction shifts later axes down by one
        for done, q in enumerate(sorted(bras, reverse=True)):
            axis = self.n - 1 - q - done
            arr = np.tensordot(np.asarray(bras[q], dtype=complex), arr, axes=([0], [axis]))
        rest = self.n - len(bras)
        return StateVector(rest, np.asarray(arr).reshape(-1) if rest else np.asarray(arr).reshape(1), self.cap)

    def project_plus(self, qubits: Sequence[int]) -> "StateVector":
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        return self.contract({q: plus for q in qubits})

    # binary dump: n as little-endian uint32, then 2^n complex doubles

    def dump(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<I", self.n))
            fh.write(self.amps.astype("<c16").tobytes())

    @classmethod
    def load(cls, path, cap: int = DEFAULT_CAP) -> "StateVector":
        with open(path, "rb") as fh:
            (n,) = struct.unpack("<I", fh.read(4))
            amps = np.frombuffer(fh.read(), dtype="<c16").copy()
        return cls(n, amps, cap)


def plus_bra() -> np.ndarray:
    return np.array([1.0, 1.0]) / np.sqrt(2)


def ising_bra(K: float) -> np.ndarray:
    """Components of <0| e^{K X}."""
    return np.array([np.cosh(K), np.sinh(K)])


def overlap(bras: Sequence[np.ndarray], s: StateVector) -> complex:
    """<b_0 ⊗ b_1 ⊗ ...|s> with one bra per qubit."""
    if len(bras) != s.n:
        raise ValueError(f"{len(bras)} bra factors for {s.n} qubits")
    arr = s.amps
    for q in range(s.n):
        arr = arr.reshape(-1, 2) @ np.asarray(bras[q], dtype=complex)
    return complex(arr.reshape(-1)[0]) if s.n else complex(arr[0])


# Cluster states


def cluster_state_amplitudes(fol: FoliatedComplex, cap: int = DEFAULT_CAP) -> StateVector:
    """CZ entangler on |+>, evaluated as a phase polynomial over the Q1-Q2 edges."""
    n1 = fol.size(1)
    n = fol.num_qubits
    check_cap(n, cap)
    idx = basis_indices(n)
    phase = np.zeros(1 << n, dtype=np.uint8)
    for s, targets in enumerate(fol.diffs[1].column_supports()):
        mask = sum(1 << (n1 + t) for t in targets)
        phase ^= ((idx >> np.uint64(s)) & np.uint64(1)).astype(np.uint8) & _parity_of(idx, mask)
    amps = (1.0 - 2.0 * phase.astype(np.float64)) * 2.0 ** (-n / 2)
    return StateVector(n, amps.astype(complex), cap)


def cluster_state_gates(fol: FoliatedComplex, cap: int = DEFAULT_CAP) -> StateVector:
    n1 = fol.size(1)
    s = StateVector.plus(fol.num_qubits, cap)
    for q1, targets in enumerate(fol.diffs[1].column_supports()):
        for t in targets:
            s.apply_cz(q1, n1 + t)
    return s


def build_cluster_state(fol: FoliatedComplex, cap: int = DEFAULT_CAP, verify: bool = True) -> StateVector:
    s = cluster_state_amplitudes(fol, cap)
    if verify:
        from .pauli import cluster_stabilizers

        for g, label in zip(cluster_stabilizers(fol).generators, cluster_stabilizers(fol).labels):
            if abs(s.expectation(g) - 1) > 1e-9:
                raise RuntimeError(f"cluster state is not stabilized by {label}")
    return s


def stabilizer_eigenvalues(s: StateVector, stabs: StabilizerSet) -> list[complex]:
    return [s.expectation(g) for g in stabs.generators]


# Kramers-Wannier maps from controlled-Pauli entanglers


@dataclass
class MeasurementRecord:
    measured: list[str]
    outcome: BitVector
    seed: int | None
    probability: float = 0.0


class ControlledPauliKW:
    """KW = <+|^targets U |+>^controls with U = prod_b C_b P_b.

    Each control b switches on a Pauli P_b on the target register; the P_b
    commute, so U is a product of commuting Hermitian blocks. KW maps target
    states to control states and KW^dagger maps back.
    """

    def __init__(self, n_targets: int, blocks: Sequence[PauliOperator], gates: Sequence[Sequence[tuple[int, str]]] | None = None,
                 cap: int = DEFAULT_CAP, name: str = ""):
        self.nt = n_targets
        self.nc = len(blocks)
        self.blocks = list(blocks)
        self.cap = cap
        self.name = name
        for b in self.blocks:
            if b.n != n_targets or not b.is_hermitian:
                raise ValueError("blocks must be Hermitian Paulis on the target register")
        for i, a in enumerate(self.blocks):
            for b in self.blocks[i + 1:]:
                if not commutes(a, b):
                    raise ValueError("entangler blocks must commute")
        # per-target single-qubit gates; default is the letter decomposition of each block
        if gates is None:
            gates = []
            for b in self.blocks:
                letters = b.letters()
                sign = PauliOperator.from_letters(n_targets, letters)
                if sign != b:
                    raise ValueError("blocks with a sign need explicit gate lists")
                gates.append(sorted(letters.items()))
        self.gates = [list(g) for g in gates]
        # E[i, b] = 1 when P_b anticommutes with X on target i
        self.e_map = BitMatrix.from_columns([b.z for b in self.blocks], rows=n_targets)

    # dense matrices

    def block_product(self, chain: BitVector) -> PauliOperator:
        return product([self.blocks[b] for b in chain.support()], self.nt)

    def matrix(self) -> np.ndarray:
        """Closed form: KW[s, x] = 2^{-(nc+nt)/2} <x ^ xm_s| P_s |x> summed against <+|."""
        if self.nt + self.nc > DENSE_KW_LIMIT:
            raise CapExceeded("dense KW limited to 20 qubits in total")
        idx = np.arange(1 << self.nt, dtype=np.uint64)
        out = np.zeros((1 << self.nc, 1 << self.nt), dtype=complex)
        norm = 2.0 ** (-(self.nc + self.nt) / 2)
        ps = [PauliOperator.identity(self.nt)]
        for b in self.blocks:
            ps = ps + [p * b for p in ps]
        for s, p in enumerate(ps):
            xm, zm = p.x.to_int(), p.z.to_int()
            coeff = 1j ** ((p.phase + bin(xm & zm).count("1")) % 4)
            out[s] = norm * coeff * (1.0 - 2.0 * _parity_of(idx, zm))
        return out

    def dagger_matrix(self) -> np.ndarray:
        return self.matrix().conj().T

    # gate-level action

    def _entangle(self, s: StateVector) -> StateVector:
        for b, gate_list in enumerate(self.gates):
            for t, letter in gate_list:
                s.apply_controlled_pauli(self.nt + b, t, letter)
        return s

    def apply_gates(self, psi: StateVector) -> StateVector:
        """<+|^targets U (psi ⊗ |+>^controls), simulated gate by gate."""
        full = psi.tensor(StateVector.plus(self.nc, self.cap))
        return self._entangle(full).project_plus(range(self.nt))

    def apply_dagger_gates(self, psi: StateVector) -> StateVector:
        """<+|^controls U (|+>^targets ⊗ psi)."""
        full = StateVector.plus(self.nt, self.cap).tensor(psi)
        return self._entangle(full).project_plus(range(self.nt, self.nt + self.nc))

    # block-level register

    def _entangled_register(self, target_state: np.ndarray, control_state: np.ndarray) -> np.ndarray:
        """Matrix M[c, t] of U (target ⊗ control), blockwise."""
        check_cap(self.nt + self.nc, self.cap)
        m = np.outer(control_state, target_state)
        cidx = np.arange(1 << self.nc)
        for b, p in enumerate(self.blocks):
            rows = np.flatnonzero((cidx >> b) & 1)
            m[rows] = pauli_on_rows(p, m[rows].T).T
        return m

    def symmetry_group_targets(self) -> list[BitVector]:
        """Generators z* with X(z*) commuting with every block."""
        return kernel_basis(self.e_map.T)

    def symmetry_group_controls(self) -> list[BitVector]:
        """Generators z with prod_{b in z} P_b free of Z parts."""
        return kernel_basis(self.e_map)

    def gauge(self, psi: StateVector, seed: int | None = None, forced_outcome: BitVector | None = None,
              tol: float = 1e-9) -> tuple[StateVector, MeasurementRecord, BitVector]:
        """Measure the targets in the X basis and correct on the controls."""
        _require_symmetric(psi, [PauliOperator.X(self.nt, z) for z in self.symmetry_group_targets()], tol)
        m = self._entangled_register(psi.amps, np.full(1 << self.nc, 2.0 ** (-self.nc / 2)))
        w = _hadamard_columns(m, self.nt)
        outcome, prob = _sample(np.sum(np.abs(w) ** 2, axis=0), self.nt, seed, forced_outcome)
        post = StateVector(self.nc, w[:, outcome.to_int()].copy(), self.cap)
        corr = solve(self.e_map, outcome)
        if corr is None:
            raise CorrectionFailed("measurement outcome has no preimage")
        # the product of blocks over the correction must be exactly Z(outcome)
        if self.block_product(corr) != PauliOperator.Z(self.nt, outcome):
            raise CorrectionFailed("forward correction needs pure Z blocks")
        post.apply_pauli(PauliOperator.X(self.nc, corr))
        return post, MeasurementRecord([f"t{i}" for i in range(self.nt)], outcome, seed, prob), corr

    def ungauge(self, psi: StateVector, seed: int | None = None, forced_outcome: BitVector | None = None,
                tol: float = 1e-9) -> tuple[StateVector, MeasurementRecord, BitVector]:
        """Measure the controls in the X basis and correct on the targets."""
        syms = []
        for z in self.symmetry_group_controls():
            syms.append(PauliOperator.X(self.nc, z))
        _require_symmetric(psi, syms, tol)
        m = self._entangled_register(np.full(1 << self.nt, 2.0 ** (-self.nt / 2)), psi.amps)
        w = _hadamard_columns(m.T, self.nc)  # rows now targets, columns controls
        outcome, prob = _sample(np.sum(np.abs(w) ** 2, axis=0), self.nc, seed, forced_outcome)
        post = StateVector(self.nt, w[:, outcome.to_int()].copy(), self.cap)
        corr = solve(self.e_map.T, outcome)
        if corr is None:
            raise CorrectionFailed("measurement outcome has no preimage")
        post.apply_pauli(PauliOperator.X(self.nt, corr))
        return post, MeasurementRecord([f"c{i}" for i in range(self.nc)], outcome, seed, prob), corr


def _require_symmetric(psi: StateVector, syms: Sequence[PauliOperator], tol: float) -> None:
    for g in syms:
        moved = pauli_on_rows(g, psi.amps)
        if np.max(np.abs(moved - psi.amps)) > tol * max(1.0, np.sqrt(psi.norm2())):
            raise PreconditionError(f"input is not invariant under {g}")


def _hadamard_columns(m: np.ndarray, nbits: int) -> np.ndarray:
    """Apply H on every qubit of the column index; rows untouched."""
    rows = m.shape[0]
    a = m.reshape(rows, -1).astype(complex).copy()
    for q in range(nbits):
        v = a.reshape(rows, -1, 2, 1 << q)
        lo, hi = v[:, :, 0, :].copy(), v[:, :, 1, :].copy()
        v[:, :, 0, :] = (lo + hi) / np.sqrt(2)
        v[:, :, 1, :] = (lo - hi) / np.sqrt(2)
    return a


def _sample(probs: np.ndarray, nbits: int, seed, forced: BitVector | None) -> tuple[BitVector, float]:
    total = probs.sum()
    probs = probs / total
    if forced is not None:
        k = forced.to_int()
    else:
        rng = np.random.Generator(np.random.Philox(seed))
        k = int(rng.choice(probs.size, p=probs))
    return BitVector.from_int(nbits, k), float(probs[k])


def kw_from_css(css: CssComplex, cap: int = DEFAULT_CAP) -> ControlledPauliKW:
    """Targets are the qubits, controls the Z checks; block b is Z(delta_Z b)."""
    blocks = [PauliOperator.Z(css.num_qubits, css.delta_z.column(b)) for b in range(css.size(0))]
    return ControlledPauliKW(css.num_qubits, blocks, cap=cap, name=css.name)


def kw_from_chamon(model, cap: int = DEFAULT_CAP) -> ControlledPauliKW:
    """Targets are the vertices, controls the cubes; block b is the stabilizer on cube b."""
    n = model.num_vertices
    blocks = [PauliOperator.from_letters(n, letters) for letters in model.letters]
    gates = [sorted(letters.items()) for letters in model.letters]
    return ControlledPauliKW(n, blocks, gates, cap=cap, name="chamon")


@dataclass
class KwMap:
    domain_qubits: int
    codomain_qubits: int
    matrix: np.ndarray


def kw_build(css: CssComplex) -> KwMap:
    kw = kw_from_css(css)
    return KwMap(kw.nt, kw.nc, kw.matrix())


def kw_dagger(css: CssComplex) -> KwMap:
    kw = kw_from_css(css)
    return KwMap(kw.nc, kw.nt, kw.dagger_matrix())


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def kw_relations(kw: ControlledPauliKW) -> dict[str, float]:
    """Largest entrywise deviation of each operator identity satisfied by KW."""
    m = kw.matrix()
    nt, nc = kw.nt, kw.nc
    out = {"x_target": 0.0, "x_control": 0.0, "target_symmetry": 0.0, "control_symmetry": 0.0}
    rows = kw.e_map.row_supports()
    for i in range(nt):
        lhs = matrix_times_pauli(m, PauliOperator.X(nt, [i]))
        rhs = pauli_on_rows(PauliOperator.Z(nc, rows[i]), m)
        out["x_target"] = max(out["x_target"], _max_dev(lhs, rhs))
    for b in range(nc):
        lhs = pauli_on_rows(PauliOperator.X(nc, [b]), m)
        rhs = matrix_times_pauli(m, kw.blocks[b])
        out["x_control"] = max(out["x_control"], _max_dev(lhs, rhs))
    for z in kw.symmetry_group_targets():
        lhs = matrix_times_pauli(m, PauliOperator.X(nt, z))
        out["target_symmetry"] = max(out["target_symmetry"], _max_dev(lhs, m))
    for z in kw.symmetry_group_controls():
        lhs = pauli_on_rows(PauliOperator.X(nc, z), m)
        rhs = matrix_times_pauli(m, kw.block_product(z))
        out["control_symmetry"] = max(out["control_symmetry"], _max_dev(lhs, rhs))
    return out


def _group_sum(n: int, generators: Sequence[BitVector]) -> np.ndarray:
    """Sum of X(z) over the span of the generators, as a dense matrix."""
    dim = 1 << n
    out = np.zeros((dim, dim))
    idx = np.arange(dim)
    elems = [0]
    for g in generators:
        gi = g.to_int()
        elems = elems + [e ^ gi for e in elems]
    for e in elems:
        out[idx ^ e, idx] += 1.0
    return out


@dataclass
class FusionReport:
    forward_deviation: float
    backward_deviation: float
    forward_rank: int
    backward_rank: int

    @property
    def max_deviation(self) -> float:
        return max(self.forward_deviation, self.backward_deviation)


def fusion_check(kw: ControlledPauliKW | CssComplex) -> FusionReport:
    """KW KW^dagger and KW^dagger KW against normalized sums over the symmetry groups."""
    if isinstance(kw, CssComplex):
        kw = kw_from_css(kw)
    m = kw.matrix()
    fwd = m @ m.conj().T
    bwd = m.conj().T @ m
    fwd_rhs = _group_sum(kw.nc, kw.symmetry_group_controls()) / 2 ** kw.nc
    bwd_rhs = _group_sum(kw.nt, kw.symmetry_group_targets()) / 2 ** kw.nt
    return FusionReport(
        _max_dev(fwd, fwd_rhs),
        _max_dev(bwd, bwd_rhs),
        int(np.linalg.matrix_rank(fwd_rhs)),
        int(np.linalg.matrix_rank(bwd_rhs)),
    )


def symmetrize(psi: StateVector, generators: Sequence[PauliOperator]) -> StateVector:
    """Average over the group generated by commuting Pauli symmetries."""
    amps = psi.amps
    for g in generators:
        amps = 0.5 * (amps + pauli_on_rows(g, amps))
    out = StateVector(psi.n, amps, psi.cap)
    return out.normalized()


def random_state(n: int, seed: int, cap: int = DEFAULT_CAP) -> StateVector:
    rng = np.random.Generator(np.random.Philox(seed))
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps, cap).normalized()


def random_symmetric_input(kw: ControlledPauliKW, seed: int, side: str = "targets") -> StateVector:
    if side == "targets":
        gens = [PauliOperator.X(kw.nt, z) for z in kw.symmetry_group_targets()]
        return symmetrize(random_state(kw.nt, seed, kw.cap), gens)
    gens = [PauliOperator.X(kw.nc, z) for z in kw.symmetry_group_controls()]
    return symmetrize(random_state(kw.nc, seed, kw.cap), gens)


@dataclass
class ProtocolResult:
    output: StateVector
    record: MeasurementRecord
    correction: BitVector
    fidelity: float
    outcome_is_cycle: bool


def gauging_protocol(css: CssComplex, psi: StateVector, seed: int | None = None,
                     forced_outcome: BitVector | None = None) -> ProtocolResult:
    """Entangle with |+> on the Z checks, measure the qubits in the X basis, correct."""
    kw = kw_from_css(css)
    out, rec, corr = kw.gauge(psi, seed, forced_outcome)
    cycle = (css.delta_x @ rec.outcome).is_zero()
    expected = StateVector(kw.nc, kw.matrix() @ psi.amps) if kw.nt + kw.nc <= DENSE_KW_LIMIT else kw.apply_gates(psi)
    return ProtocolResult(out, rec, corr, out.fidelity(expected), cycle)


def chamon_protocol(model, psi: StateVector, seed: int | None = None,
                    forced_outcome: BitVector | None = None) -> ProtocolResult:
    """Entangle cube qubits with |+> vertex ancillas, measure the cubes, correct on vertices."""
    kw = kw_from_chamon(model)
    out, rec, corr = kw.ungauge(psi, seed, forced_outcome)
    expected = StateVector(kw.nt, kw.dagger_matrix() @ psi.amps)
    cycle = (kw.e_map.T @ corr) == rec.outcome
    return ProtocolResult(out, rec, corr, out.fidelity(expected), cycle)


def strange_correlator(css: CssComplex, K: float) -> complex:
    """<omega(K)| KW^dagger |+>^{Z checks}, with <omega(K)| = prod <0|e^{K X}."""
    kw = kw_from_css(css)
    psi = kw.apply_dagger_gates(StateVector.plus(kw.nc))
    return overlap([ising_bra(K)] * kw.nt, psi)


def foliated_strange_correlator(fol: FoliatedComplex, J: float, K: float, state: StateVector | None = None) -> complex:
    """<Omega(J,K)|psi_C>: <+| on Q2, <0|e^{JX} on Z-point cells, <0|e^{KX} on q-interval cells."""
    from .chain import Q1_FROM_Z

    if state is None:
        state = build_cluster_state(fol, verify=False)
    bras = []
    for p in fol.provenance[1]:
        bras.append(ising_bra(J) if p.kind == Q1_FROM_Z else ising_bra(K))
    bras += [plus_bra()] * fol.size(2)
    return overlap(bras, state)


# Open foliation boundary states


@dataclass
class BoundaryCheck:
    label: str
    expected: int
    observed: float

    @property
    def ok(self) -> bool:
        return abs(self.observed - self.expected) < 1e-9


def boundary_interior(fol: FoliatedComplex) -> tuple[list[int], list[int], list[int]]:
    """Qubits of the q x {0} layer, the q x {L_w} layer, and everything else."""
    left = [fol.qubit_of(2, i) for i in fol.boundary_layer(0)]
    right = [fol.qubit_of(2, i) for i in fol.boundary_layer(fol.L_w)]
    keep = set(left) | set(right)
    rest = [q for q in range(fol.num_qubits) if q not in keep]
    return left, right, rest


def _boundary_expectations(fol: FoliatedComplex, z_rel0: BitVector, zstar0: BitVector) -> list[tuple[str, PauliOperator, int]]:
    from .chain import intersection

    n1, n = fol.size(1), fol.num_qubits
    css = fol.base
    L = fol.L_w
    dz = fol.diffs[2] @ z_rel0
    out = []

    def q2(kind: str, w: int, support) -> BitVector:
        return BitVector.from_support(n, [n1 + fol.cell(2, kind, i, w) for i in support])

    for w in (0, L):
        zx = fol.restrict(3, "X.pt", w, dz)
        zz = fol.restrict(1, "Z.pt", w, zstar0)
        for a, row in enumerate(css.delta_x.row_supports()):
            out.append((f"X-check {a} at w={w}", PauliOperator.X(n, q2("q.pt", w, row)), (-1) ** zx[a]))
        for b in range(css.size(0)):
            col = css.delta_z.column(b).support()
            out.append((f"Z-check {b} at w={w}", PauliOperator.Z(n, q2("q.pt", w, col)), (-1) ** zz[b]))
    for j, zq in enumerate(kernel_basis(css.delta_z.T)):
        op = PauliOperator.X(n, q2("q.pt", 0, zq.support()) ^ q2("q.pt", L, zq.support()))
        slab = BitVector.zeros(fol.size(2))
        for w in range(L + 1):
            slab = slab ^ fol.embed(2, "q.pt", w, zq)
        out.append((f"XX pair {j}", op, (-1) ** intersection(z_rel0, slab)))
    for j, zq in enumerate(kernel_basis(css.delta_x)):
        op = PauliOperator.Z(n, q2("q.pt", 0, zq.support()) ^ q2("q.pt", L, zq.support()))
        slab = BitVector.zeros(fol.size(1))
        for w in range(L):
            slab = slab ^ fol.embed(1, "q.int", w, zq)
        out.append((f"ZZ pair {j}", op, (-1) ** intersection(zstar0, slab)))
    return out


@dataclass
class BoundaryStateReport:
    checks: list[BoundaryCheck]
    route: str
    vanishing: bool = False  # the post-selected outcome has probability zero

    @property
    def ok(self) -> bool:
        return not self.vanishing and all(c.ok for c in self.checks)


def projection_vanishes(stabs: StabilizerSet, measured: Sequence[int]) -> bool:
    """True when <+| on the measured qubits annihilates the stabilizer state.

    That happens exactly when some group element is -X on measured qubits only.
    """
    from .f2 import kernel_basis as _kb

    measured = set(measured)
    n = stabs.n
    sym = stabs.symplectic_matrix()  # rows = generators, columns = (x | z)
    keep = [j for j in range(2 * n) if not (j < n and j in measured)]
    for c in _kb(sym.select_columns(keep).T):
        g = product([stabs.generators[i] for i in c.support()], n)
        if g.phase % 4 == 2:
            return True
    return False


def boundary_state_check(fol: FoliatedComplex, z_rel0: BitVector | None = None, zstar0: BitVector | None = None,
                         route: str = "stabilizer", cap: int = DEFAULT_CAP) -> BoundaryStateReport:
    """Eigenvalues of the two-boundary state left after projecting the bulk onto <+|."""
    if fol.boundary != "open":
        raise ValueError("boundary states need an open w direction")
    n1, n = fol.size(1), fol.num_qubits
    z_rel0 = BitVector.zeros(fol.size(2)) if z_rel0 is None else z_rel0
    zstar0 = BitVector.zeros(fol.size(1)) if zstar0 is None else zstar0
    dz = (fol.diffs[2] @ z_rel0).bits().astype(bool)
    allowed = np.zeros(fol.size(3), dtype=bool)
    for i, p in enumerate(fol.provenance[3]):
        allowed[i] = p.w in (0, fol.L_w)
    if (dz & ~allowed).any():
        raise PreconditionError("initial excitation is not a relative cycle")
    if not (fol.diffs[0].T @ zstar0).is_zero():
        raise PreconditionError("initial dual excitation is not a dual cycle")
    left, right, rest = boundary_interior(fol)
    excite = PauliOperator.Z(n, BitVector.from_support(n, [n1 + i for i in z_rel0.support()] + zstar0.support()))
    wanted = _boundary_expectations(fol, z_rel0, zstar0)
    checks = []
    if route == "stabilizer":
        from .pauli import cluster_stabilizers

        stabs = cluster_stabilizers(fol).conjugated_by(excite)
        if projection_vanishes(stabs, rest):
            return BoundaryStateReport([], route, vanishing=True)
        for label, op, expected in wanted:
            val = stabs.projected_eigenvalue(op, rest)
            checks.append(BoundaryCheck(label, expected, float("nan") if val is None else float(val)))
    elif route == "statevector":
        check_cap(n, cap)
        psi = build_cluster_state(fol, cap, verify=False).apply_pauli(excite)
        reduced = psi.project_plus(rest)
        if reduced.norm2() < 1e-20:
            return BoundaryStateReport([], route, vanishing=True)
        reduced = reduced.normalized()
        keep = sorted(left + right)
        pos = {q: i for i, q in enumerate(keep)}
        for label, op, expected in wanted:
            xs = [pos[q] for q in op.x.support()]
            zs = [pos[q] for q in op.z.support()]
            small = PauliOperator(len(keep), BitVector.from_support(len(keep), xs), BitVector.from_support(len(keep), zs), op.phase)
            checks.append(BoundaryCheck(label, expected, reduced.expectation(small).real))
    else:
        raise ValueError(f"unknown route {route!r}")
    return BoundaryStateReport(checks, route)


def boundary_pair_entropy(fol: FoliatedComplex) -> float:
    """Entanglement entropy (in bits) between the w=0 and w=L_w layers after projecting the bulk."""
    left, right, rest = boundary_interior(fol)
    psi = build_cluster_state(fol, verify=False).project_plus(rest).normalized()
    keep = sorted(left + right)
    lpos = [keep.index(q) for q in left]
    m = psi.amps.reshape((2,) * len(keep))
    axes_l = [len(keep) - 1 - p for p in lpos]
    axes_r = [a for a in range(len(keep)) if a not in axes_l]
    mat = np.transpose(m, axes_l + axes_r).reshape(1 << len(left), -1)
    sv = np.linalg.svd(mat, compute_uv=False) ** 2
    sv = sv[sv > 1e-14]
    return float(-(sv * np.log2(sv)).sum())
