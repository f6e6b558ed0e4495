"""Classical partition functions obtained from CSS complexes, by exact enumeration.

A model is a spin set, a list of terms, and for each term the set of spins
whose product it is, a coupling and a sign. Sums are done in the log domain
over chunks of configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import CssComplex, FoliatedComplex, Q1_FROM_Z, dualize, homology_basis
from .f2 import BitVector, rank, span_elements

SPIN_CAP = 30
SECTOR_CAP = 1 << 12
BF_CAP = 26
_CHUNK_BITS = 20


class SpinCapExceeded(ValueError):
    pass


class CouplingError(ValueError):
    pass


@dataclass
class PartitionResult:
    value: float
    log_value: float
    config_count: int
    couplings: tuple[float, ...]

    def to_json(self) -> dict:
        return {"value": self.value, "log_value": self.log_value, "configs": self.config_count,
                "couplings": list(self.couplings)}


@dataclass
class TwistSector:
    representative: BitVector
    index: int


def dual_coupling(K: float) -> float:
    """K* = -(1/2) log tanh K."""
    if K <= 0:
        raise CouplingError("dual coupling needs K > 0")
    return -0.5 * math.log(math.tanh(K))


def _masks(supports: Sequence[Sequence[int]]) -> list[int]:
    return [sum(1 << s for s in sup) for sup in supports]


def spin_sum(num_spins: int, term_supports: Sequence[Sequence[int]], weights: Sequence[float],
             signs: Sequence[int] | None = None, cap: int = SPIN_CAP) -> PartitionResult:
    """sum over s in {±1}^n of exp(sum_t w_t sign_t prod_{i in t} s_i).

    Spin i is +1 when bit i of the configuration index is 0.
    """
    if num_spins > cap:
        raise SpinCapExceeded(f"{num_spins} spins exceeds the enumeration cap of {cap}")
    if signs is None:
        signs = [1] * len(term_supports)
    masks = _masks(term_supports)
    coeffs = np.array([w * s for w, s in zip(weights, signs)], dtype=np.float64)
    total = 1 << num_spins
    chunk = min(total, 1 << _CHUNK_BITS)
    logs = []
    for start in range(0, total, chunk):
        idx = np.arange(start, start + chunk, dtype=np.uint64)
        energy = np.zeros(chunk)
        for m, c in zip(masks, coeffs):
            par = np.bitwise_count(idx & np.uint64(m)) & np.uint8(1)
            energy += c * (1.0 - 2.0 * par)
        top = energy.max()
        logs.append(top + math.log(np.exp(energy - top).sum()))
    top = max(logs)
    log_value = top + math.log(sum(math.exp(v - top) for v in logs))
    return PartitionResult(math.exp(log_value) if log_value < 700 else math.inf, log_value, total,
                           tuple(float(w) for w in weights[:1]))


def _log_sum(values: Sequence[float]) -> float:
    top = max(values)
    return top + math.log(sum(math.exp(v - top) for v in values))


# Strange-correlator models of a CSS code


def z_Z(css: CssComplex, K: float) -> PartitionResult:
    """Spins on Z checks; one term per qubit, the product of the checks touching it."""
    res = spin_sum(css.size(0), css.delta_z.row_supports(), [K] * css.num_qubits)
    res.couplings = (K,)
    return res


def z_X_twisted(css: CssComplex, Kstar: float, twist: BitVector | TwistSector | None = None) -> PartitionResult:
    """Spins on X checks; the term of qubit i flips sign when i lies on the twist."""
    if isinstance(twist, TwistSector):
        twist = twist.representative
    if twist is None:
        twist = BitVector.zeros(css.num_qubits)
    signs = [1 - 2 * int(b) for b in twist.bits()]
    res = spin_sum(css.size(2), css.delta_x.column_supports(), [Kstar] * css.num_qubits, signs)
    res.couplings = (Kstar,)
    return res


def twist_sectors(css: CssComplex) -> list[TwistSector]:
    """One representative per class of Ker d*_Z / Im d*_X on the qubits."""
    h = homology_basis(dualize(css), 1)
    if (1 << h.dimension) > SECTOR_CAP:
        raise SpinCapExceeded(f"{1 << h.dimension} twist sectors exceeds {SECTOR_CAP}")
    reps = span_elements(h.representatives, css.num_qubits)
    return [TwistSector(r, i) for i, r in enumerate(reps)]


@dataclass
class DualityReport:
    """Both sides in log form. ``rhs_log`` uses the counting prefactor 2^{n_lo - n_hi} (sinh)^{n/2} / #sectors;
    ``correction_log2`` is the K-independent factor that the exact high-temperature expansion adds."""

    lhs_log: float
    rhs_log: float
    sectors: int
    correction_log2: float = 0.0

    @property
    def residual(self) -> float:
        return abs(math.expm1(self.rhs_log - self.lhs_log))

    @property
    def corrected_residual(self) -> float:
        return abs(math.expm1(self.rhs_log + self.correction_log2 * math.log(2) - self.lhs_log))

    @property
    def fitted_log2_ratio(self) -> float:
        return (self.lhs_log - self.rhs_log) / math.log(2)


def check_twisted_duality(css: CssComplex, K: float) -> DualityReport:
    """Z_Z(K) against the prefactored sum of twisted Z_X(K*) over logical classes."""
    Ks = dual_coupling(K)
    sectors = twist_sectors(css)
    lhs = z_Z(css, K).log_value
    logs = [z_X_twisted(css, Ks, s).log_value for s in sectors]
    nz, nq, nx = css.size(0), css.num_qubits, css.size(2)
    pref = (nz - nx) * math.log(2) + 0.5 * nq * math.log(math.sinh(2 * K)) - math.log(len(sectors))
    return DualityReport(lhs, pref + _log_sum(logs), len(sectors), duality_correction_log2(css))


def duality_correction_log2(css: CssComplex) -> float:
    """|q|/2 - rank d_Z: the norms of the two unnormalized code states differ by this power of 2."""
    return css.num_qubits / 2 - rank(css.delta_z)


def strange_correlator_normalization(css: CssComplex) -> float:
    """N with Z_Z(K) = N <omega(K)| KW^dagger |+>."""
    return 2.0 ** (css.size(0) + css.num_qubits / 2)


# Foliated models


def foliated_Z(fol: FoliatedComplex, J: float, K: float) -> PartitionResult:
    """Spins on Q2; a term per Q1 cell, coupling J on Z-point cells and K on q-interval cells."""
    weights = [J if p.kind == Q1_FROM_Z else K for p in fol.provenance[1]]
    res = spin_sum(fol.size(2), fol.diffs[1].column_supports(), weights)
    res.couplings = (J, K)
    return res


def foliated_dual_twisted(fol: FoliatedComplex, Jstar: float, Kstar: float,
                          twist: BitVector | TwistSector | None = None) -> PartitionResult:
    """Spins on (Z,w) cells; a term per Q1 cell with sign flipped on the twist."""
    if isinstance(twist, TwistSector):
        twist = twist.representative
    if twist is None:
        twist = BitVector.zeros(fol.size(1))
    weights = [Jstar if p.kind == Q1_FROM_Z else Kstar for p in fol.provenance[1]]
    signs = [1 - 2 * int(b) for b in twist.bits()]
    res = spin_sum(fol.size(0), fol.diffs[0].row_supports(), weights, signs)
    res.couplings = (Jstar, Kstar)
    return res


def foliated_twist_sectors(fol: FoliatedComplex) -> list[TwistSector]:
    h = homology_basis(fol, 1)
    if (1 << h.dimension) > SECTOR_CAP:
        raise SpinCapExceeded(f"{1 << h.dimension} twist sectors exceeds {SECTOR_CAP}")
    return [TwistSector(r, i) for i, r in enumerate(span_elements(h.representatives, fol.size(1)))]


def check_foliated_duality(fol: FoliatedComplex, J: float, K: float) -> DualityReport:
    Js, Ks = dual_coupling(J), dual_coupling(K)
    sectors = foliated_twist_sectors(fol)
    lhs = foliated_Z(fol, J, K).log_value
    logs = [foliated_dual_twisted(fol, Js, Ks, s).log_value for s in sectors]
    nzpt = sum(1 for p in fol.provenance[1] if p.kind == Q1_FROM_Z)
    nqint = fol.size(1) - nzpt
    pref = ((fol.size(2) - fol.size(0)) * math.log(2) + 0.5 * nzpt * math.log(math.sinh(2 * J))
            + 0.5 * nqint * math.log(math.sinh(2 * K)) - math.log(len(sectors)))
    return DualityReport(lhs, pref + _log_sum(logs), len(sectors), foliated_correction_log2(fol))


def foliated_correction_log2(fol: FoliatedComplex) -> float:
    """|Q1|/2 - rank d(Q1 -> Q2)."""
    return fol.size(1) / 2 - rank(fol.diffs[1])


def foliated_overlap_normalization(fol: FoliatedComplex) -> float:
    """Z(J,K) = 2^{|Q2|} 2^{|Q1|/2} <Omega(J,K)|psi_C>."""
    return 2.0 ** (fol.size(2) + fol.size(1) / 2)


# BF lattice sum


@dataclass
class BFResult:
    raw: float
    normalized: float
    summed_bits: int
    extra_factor_log2: int


def _bf_layout(css: CssComplex, L_tau: int):
    nq, nz, nx = css.num_qubits, css.size(0), css.size(2)
    # a-type fields: a_q[k] (k = 1..L), a_Z[k-1/2];  b-type: b_q[k-1/2], b_X[k]
    a_off = {"a_q": 0, "a_z": L_tau * nq}
    n_a = L_tau * (nq + nz)
    b_off = {"b_q": 0, "b_x": L_tau * nq}
    n_b = L_tau * (nq + nx)
    return nq, nz, nx, a_off, n_a, b_off, n_b


def bf_bilinear(css: CssComplex, slices, L_tau: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exponent / (pi i) = b^T M a + l_b . b + l_a . a  (mod 2), as integer arrays.

    Index k runs over 1..L_tau and is stored at k-1; a_q at time 0 is a_q at time L_tau.
    """
    nq, nz, nx, a_off, n_a, b_off, n_b = _bf_layout(css, L_tau)
    m = np.zeros((n_b, n_a), dtype=np.int64)
    la = np.zeros(n_a, dtype=np.int64)
    lb = np.zeros(n_b, dtype=np.int64)
    dz = css.delta_z.dense().astype(np.int64)
    dx = css.delta_x.dense().astype(np.int64)
    eye = np.eye(nq, dtype=np.int64)
    L = L_tau
    for k in range(1, L + 1):
        aq_k = slice(a_off["a_q"] + (k - 1) * nq, a_off["a_q"] + k * nq)
        aq_prev = slice(a_off["a_q"] + ((k - 2) % L) * nq, a_off["a_q"] + ((k - 2) % L + 1) * nq)
        az = slice(a_off["a_z"] + (k - 1) * nz, a_off["a_z"] + k * nz)
        bq = slice(b_off["b_q"] + (k - 1) * nq, b_off["b_q"] + k * nq)
        bx = slice(b_off["b_x"] + (k - 1) * nx, b_off["b_x"] + k * nx)
        # b_q . (a_q[k] - a_q[k-1]) + b_q . dZ a_Z + b_X . dX a_q[k]
        m[bq, aq_k] += eye
        m[bq, aq_prev] += eye
        m[bq, az] += dz
        m[bx, aq_k] += dx
        # b_q . c_q[k] + a_q[k] . c*_q[k+1/2] + a_Z . z*_Z[k] + b_X . z_X[k]
        lb[bq] += slices.c_q[k % L].bits()
        la[aq_k] += slices.cs_q[k % L].bits()
        la[az] += slices.zs_z[k % L].bits()
        lb[bx] += slices.z_x[k % L].bits()
    return m & 1, la & 1, lb & 1


def bf_partition(css: CssComplex, z: BitVector, zs: BitVector, L_tau: int, cap: int = BF_CAP) -> BFResult:
    """Literal sum over all a and b fields of (-1)^{exponent}, divided by 2^{|X|+|Z|}."""
    from .anomaly import BoundarySpacetime

    slices = BoundarySpacetime(css, L_tau).decompose(z, zs)
    m, la, lb = bf_bilinear(css, slices, L_tau)
    n_b, n_a = m.shape
    if n_a + n_b > cap:
        raise SpinCapExceeded(f"{n_a + n_b} summed bits exceeds the cap of {cap}")
    b_all = np.arange(1 << n_b, dtype=np.uint64)
    # columns of M as integers over the b bits
    col_masks = [sum(1 << int(i) for i in np.flatnonzero(m[:, j])) for j in range(n_a)]
    lb_mask = sum(1 << int(i) for i in np.flatnonzero(lb))
    total = 0
    chunk = max(1, (1 << 22) >> n_b)
    a_all = np.arange(1 << n_a, dtype=np.int64)
    for start in range(0, 1 << n_a, chunk):
        a_vals = a_all[start:start + chunk]
        # v(a) = M a + l_b packed over b bits; phase_a = l_a . a
        v = np.full(a_vals.shape, lb_mask, dtype=np.uint64)
        pa = np.zeros(a_vals.shape, dtype=np.int64)
        for j in range(n_a):
            on = ((a_vals >> j) & 1).astype(bool)
            v[on] ^= np.uint64(col_masks[j])
            if la[j]:
                pa ^= on.astype(np.int64)
        par = np.bitwise_count(b_all[None, :] & v[:, None]) & np.uint8(1)
        inner = (1 - 2 * par.astype(np.int64)).sum(axis=1)
        total += int(((1 - 2 * pa) * inner).sum())
    nq, nz, nx = css.num_qubits, css.size(0), css.size(2)
    raw = total / 2 ** (nx + nz)
    extra = L_tau * (nq + nx + nz) - nx - nz
    return BFResult(raw, raw / 2 ** extra, n_a + n_b, extra)


def bf_gauge_check(css: CssComplex, z: BitVector, zs: BitVector, L_tau: int, seed: int,
                   samples: int = 64) -> dict[str, bool]:
    """Summand invariance on random field configurations, per gauge parameter.

    ``alpha`` shifts a_q by d_Z alpha and a_Z by the time difference of alpha;
    ``beta`` shifts b_q by d*_X beta and b_X by the time difference of beta.
    ``a_q_only`` drops the compensating a_Z shift and is expected to fail.
    """
    from .anomaly import BoundarySpacetime

    slices = BoundarySpacetime(css, L_tau).decompose(z, zs)
    m, la, lb = bf_bilinear(css, slices, L_tau)
    nq, nz, nx, a_off, n_a, b_off, n_b = _bf_layout(css, L_tau)
    rng = np.random.Generator(np.random.Philox(seed))
    dz = css.delta_z.dense().astype(np.int64)
    dxt = css.delta_x.dense().astype(np.int64).T
    L = L_tau

    def phase(a, b):
        return int((b & 1) @ m @ (a & 1) + la @ (a & 1) + lb @ (b & 1)) & 1

    def shift_a(a, alpha, compensate=True):
        a2 = a.copy()
        for k in range(1, L + 1):
            a2[a_off["a_q"] + (k - 1) * nq: a_off["a_q"] + k * nq] += dz @ alpha[k % L]
            if compensate:
                # a_Z[k-1/2] -> + alpha[k] - alpha[k-1]
                a2[a_off["a_z"] + (k - 1) * nz: a_off["a_z"] + k * nz] += alpha[k % L] + alpha[(k - 1) % L]
        return a2

    def shift_b(b, beta):
        b2 = b.copy()
        for k in range(1, L + 1):
            # b_q[k-1/2] -> + d*_X beta[k-1/2];  b_X[k] -> + beta[k+1/2] - beta[k-1/2]
            b2[b_off["b_q"] + (k - 1) * nq: b_off["b_q"] + k * nq] += dxt @ beta[k - 1]
            b2[b_off["b_x"] + (k - 1) * nx: b_off["b_x"] + k * nx] += beta[k % L] + beta[k - 1]
        return b2

    ok = {"alpha": True, "beta": True, "a_q_only": True}
    for _ in range(samples):
        a = rng.integers(0, 2, n_a)
        b = rng.integers(0, 2, n_b)
        base = phase(a, b)
        alpha = rng.integers(0, 2, (L, nz))
        beta = rng.integers(0, 2, (L, nx))
        ok["alpha"] &= phase(shift_a(a, alpha), b) == base
        ok["beta"] &= phase(a, shift_b(b, beta)) == base
        ok["a_q_only"] &= phase(shift_a(a, alpha, compensate=False), b) == base
    return ok
