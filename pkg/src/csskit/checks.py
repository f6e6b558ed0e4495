"""Verification reports shared by the CLI and the acceptance tests.

Every report is a JSON-ready dict with the fields check, anchor, lhs, rhs,
residual, pass and detail. Nothing here reads a clock, so identical inputs
give identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import anomaly, gsd, statesim, statmech
from .chain import dualize, foliate, homology_basis, pairing_matrix
from .f2 import BitVector, rank
from .models import CATALOG, build_chamon, build_model

TOL = 1e-9
MATRIX_TOL = 1e-12


@dataclass
class CheckResult:
    check: str
    anchor: str
    lhs: object
    rhs: object
    residual: float | None
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "anchor": self.anchor,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "pass": bool(self.passed),
            "detail": self.detail,
        }

    def line(self) -> str:
        res = "" if self.residual is None else f" residual={self.residual:.3g}"
        return f"{'PASS' if self.passed else 'FAIL'} {self.check}: lhs={self.lhs} rhs={self.rhs}{res}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _css(model: str, periods: Sequence[int]):
    return build_model(model, tuple(periods))


def _kw_for(model: str, periods: Sequence[int]):
    if model == "chamon":
        return statesim.kw_from_chamon(build_chamon(periods[0] if periods else 2))
    return statesim.kw_from_css(_css(model, periods))


# Per-model reports


def gsd_check(model: str, periods: Sequence[int], expected: int | None = None) -> CheckResult:
    r = gsd.gsd_report(model, periods)
    want = r.expected if expected is None else expected
    return CheckResult(
        f"gsd {model} L={list(r.periods)}", "log2 GSD as a cokernel dimension of the expanded generating map",
        r.computed, want, float(abs(r.computed - want)) if want is not None else None,
        want is not None and r.computed == want,
        {"tabulated_polynomial_value": r.expected},
    )


def cross_check(model: str, periods: Sequence[int], expected: int | None = None) -> CheckResult:
    r = gsd.gsd_cross_check(model, periods, expected)
    return CheckResult(
        f"gsd cross-check {model} L={list(r.periods)}", "generating-map GSD equals qubit homology dimension",
        r.algebraic, r.homological, float(abs(r.algebraic - r.homological)), r.ok, {"expected": expected},
    )


def kw_relations_check(model: str, periods: Sequence[int]) -> CheckResult:
    kw = _kw_for(model, periods)
    res = statesim.kw_relations(kw)
    worst = max(res.values())
    return CheckResult(
        f"kw relations {model} L={list(periods)}", "KW intertwines X, Z-interaction and symmetry operators",
        worst, 0.0, worst, worst < MATRIX_TOL, {k: float(v) for k, v in sorted(res.items())},
    )


def fusion_report(model: str, periods: Sequence[int]) -> CheckResult:
    kw = _kw_for(model, periods)
    r = statesim.fusion_check(kw)
    return CheckResult(
        f"fusion {model} L={list(periods)}", "KW KW^dagger and KW^dagger KW are normalized symmetry sums",
        r.max_deviation, 0.0, r.max_deviation, r.max_deviation < MATRIX_TOL,
        {"forward": r.forward_deviation, "backward": r.backward_deviation,
         "forward_rank": r.forward_rank, "backward_rank": r.backward_rank},
    )


def protocol_report(model: str, periods: Sequence[int], runs: int = 100, seed: int = 0) -> CheckResult:
    """Seeded gauging runs, each with its own random symmetric input."""
    worst = 1.0
    cycles = solves = 0
    for r in range(runs):
        s = seed * 100003 + r
        try:
            if model == "chamon":
                ch = build_chamon(periods[0] if periods else 2)
                psi = statesim.random_symmetric_input(statesim.kw_from_chamon(ch), s, side="controls")
                out = statesim.chamon_protocol(ch, psi, s)
            else:
                css = _css(model, periods)
                psi = statesim.random_symmetric_input(statesim.kw_from_css(css), s)
                out = statesim.gauging_protocol(css, psi, s)
        except statesim.CorrectionFailed:
            continue
        solves += 1
        cycles += bool(out.outcome_is_cycle)
        worst = min(worst, out.fidelity)
    ok = solves == runs and cycles == runs and worst >= 1 - TOL
    return CheckResult(
        f"gauging protocol {model} L={list(periods)}", "measurement outcomes are correctable to the deterministic KW image",
        worst, 1.0, 1.0 - worst, ok, {"runs": runs, "corrections_solved": solves, "outcomes_cycles": cycles},
    )


def strange_check(model: str, periods: Sequence[int], Ks: Sequence[float]) -> CheckResult:
    css = _css(model, periods)
    norm = statmech.strange_correlator_normalization(css)
    rows = []
    worst = 0.0
    for K in Ks:
        lhs = norm * statesim.strange_correlator(css, K).real
        rhs = statmech.z_Z(css, K).value
        worst = max(worst, _rel(lhs, rhs))
        rows.append({"K": K, "lhs": lhs, "rhs": rhs})
    return CheckResult(
        f"strange correlator {model} L={list(periods)}", "normalized product-state overlap equals Z_Z(K)",
        rows[-1]["lhs"], rows[-1]["rhs"], worst, worst < TOL, {"normalization": norm, "points": rows},
    )


def duality_check(model: str, periods: Sequence[int], Ks: Sequence[float]) -> CheckResult:
    """Passes only on the stated prefactor; the exact correction is reported alongside."""
    css = _css(model, periods)
    worst = worst_corr = 0.0
    rows = []
    sectors = None
    for K in Ks:
        r = statmech.check_twisted_duality(css, K)
        sectors = r.sectors
        worst = max(worst, r.residual)
        worst_corr = max(worst_corr, r.corrected_residual)
        rows.append({"K": K, "lhs_log": r.lhs_log, "rhs_log": r.rhs_log, "residual": r.residual,
                     "corrected_residual": r.corrected_residual, "log2_lhs_over_rhs": r.fitted_log2_ratio})
    return CheckResult(
        f"twisted duality {model} L={list(periods)}", "Z_Z(K) against the sector sum of twisted Z_X(K*)",
        rows[-1]["lhs_log"], rows[-1]["rhs_log"], worst, worst < TOL,
        {"sectors": sectors, "points": rows, "correction_log2": statmech.duality_correction_log2(css),
         "corrected_max_residual": worst_corr, "corrected_pass": worst_corr < TOL},
    )


def foliated_duality_check(model: str, periods: Sequence[int], L_w: int, J: float, K: float) -> CheckResult:
    fol = foliate(_css(model, periods), L_w, "periodic")
    r = statmech.check_foliated_duality(fol, J, K)
    dim = int(round(math.log2(r.sectors)))
    return CheckResult(
        f"foliated duality {model} L={list(periods)} L_w={L_w}", "refined foliated duality with twist-sector sum",
        r.lhs_log, r.rhs_log, r.residual, r.residual < TOL,
        {"sectors": r.sectors, "sector_dimension": dim, "sector_bound_ok": dim <= 7,
         "correction_log2": r.correction_log2, "corrected_residual": r.corrected_residual,
         "corrected_pass": r.corrected_residual < TOL, "log2_lhs_over_rhs": r.fitted_log2_ratio},
    )


def _random_defect_pair(st: anomaly.SpacetimeComplex, rng: np.random.Generator, hom, cohom):
    cx = st.complex
    z = cx.differentiate(1, anomaly.random_chain(cx.size(1), rng))
    zs = cx.codifferentiate(3, anomaly.random_chain(cx.size(3), rng))
    for r in hom.representatives:
        if rng.integers(2):
            z = z ^ r
    for r in cohom.representatives:
        if rng.integers(2):
            zs = zs ^ r
    return st.decompose_relative(z), st.decompose_dual(zs)


def closed_trace_check(model: str, periods: Sequence[int], L_w: int, L_tau: int, pairs: int = 20,
                       seed: int = 0, statevector_pairs: int = 0) -> CheckResult:
    """Closed spacetime: bulk trace against the intersection sign, on random defects in random classes."""
    st = anomaly.build_spacetime(_css(model, periods), L_w, "periodic", L_tau)
    cx = st.complex
    hom = homology_basis(cx, 2)
    cohom = homology_basis(dualize(cx), cx.num_grades - 1 - 2)
    rng = np.random.Generator(np.random.Philox(seed))
    psi = None
    if statevector_pairs:
        psi = statesim.build_cluster_state(st.fol, verify=False)
    bad = 0
    signs = []
    for i in range(pairs):
        z, zs = _random_defect_pair(st, rng, hom, cohom)
        want = anomaly.partition_intersection(z, zs)
        got = anomaly.partition_operator_trace(st, z, zs, "stabilizer")
        if i < statevector_pairs:
            sv = anomaly.partition_operator_trace(st, z, zs, "statevector", state=psi)
            bad += abs(sv - want) > TOL
        bad += got != want
        signs.append(want)
    return CheckResult(
        f"closed bulk trace {model} L={list(periods)} L_w={L_w} L_tau={L_tau}",
        "closed-spacetime partition value equals the defect intersection sign",
        pairs - bad, pairs, float(bad), bad == 0,
        {"signs": signs, "statevector_pairs": statevector_pairs},
    )


def inflow_report(model: str, periods: Sequence[int], L_w: int, L_tau: int, trials: int = 50,
                  seed: int = 0) -> CheckResult:
    st = anomaly.build_spacetime(_css(model, periods), L_w, "open", L_tau)
    bad = 0
    patterns = set()
    for t in range(trials):
        r = anomaly.inflow_check(st, seed * 100003 + t)
        bad += not r.ok
        patterns.add(tuple(r.boundary_phases))
    return CheckResult(
        f"anomaly inflow {model} L={list(periods)} L_w={L_w} L_tau={L_tau}",
        "bulk gauge-variation phase equals the boundary anomalous phase",
        trials - bad, trials, float(bad), bad == 0,
        {"boundary_phase_patterns": sorted(list(p) for p in patterns)},
    )


def bf_report(model: str, periods: Sequence[int], L_tau: int, seed: int = 0) -> CheckResult:
    """No defects, then the first seeded pair of null-homologous defects whose trace has flipped sign.

    A homologically nontrivial defect at L_tau = 1 inserts a single logical operator and
    both sides vanish, so a sign-flipped nonzero value is the sharper comparison.
    """
    css = _css(model, periods)
    cx = anomaly.BoundarySpacetime(css, L_tau).complex
    configs = [("none", BitVector.zeros(cx.size(2)), BitVector.zeros(cx.size(1)))]
    for s in range(seed, seed + 64):
        rng = np.random.Generator(np.random.Philox(s))
        z = cx.differentiate(1, anomaly.random_chain(cx.size(1), rng))
        zs = cx.codifferentiate(2, anomaly.random_chain(cx.size(2), rng))
        if anomaly.boundary_partition_trace(css, z, zs, L_tau) < 0:
            configs.append((f"seed {s}", z, zs))
            break
    rows = []
    ok = True
    for name, z, zs in configs:
        b = statmech.bf_partition(css, z, zs, L_tau)
        tr = anomaly.boundary_partition_trace(css, z, zs, L_tau)
        gauge = statmech.bf_gauge_check(css, z, zs, L_tau, seed)
        match = abs(b.normalized - tr) < TOL and float(b.normalized).is_integer()
        ok &= match and gauge["alpha"] and gauge["beta"]
        rows.append({"defects": name, "bf_raw": b.raw, "bf_normalized": b.normalized, "trace": tr,
                     "extra_factor_log2": b.extra_factor_log2, "summed_bits": b.summed_bits, "gauge": gauge})
    last = rows[-1]
    return CheckResult(
        f"BF sum {model} L={list(periods)} L_tau={L_tau}", "BF lattice sum equals the boundary operator trace",
        last["bf_normalized"], last["trace"], abs(last["bf_normalized"] - last["trace"]), ok, {"configs": rows},
    )


def pairing_check(model: str, periods: Sequence[int]) -> CheckResult:
    css = _css(model, periods)
    h = homology_basis(css, 1)
    hd = homology_basis(dualize(css), 1)
    r = rank(pairing_matrix(h, hd))
    return CheckResult(
        f"pairing {model} L={list(periods)}", "homology-cohomology intersection pairing is nondegenerate",
        r, h.dimension, float(h.dimension - r), r == h.dimension,
    )


# Acceptance criteria


@dataclass
class Criterion:
    number: int
    title: str
    tolerance: str
    parts: Callable[[], list[CheckResult]]


def _criterion_gsd_cc():
    cases = [("cc:3,1", 2, 10), ("cc:3,1", 3, 29), ("cc:3,1", 4, 66), ("cc:4,1", 2, 40), ("cc:5,1", 2, 126),
             ("cc:5,2", 2, 134), ("cc:6,1", 2, 336), ("cc:6,2", 2, 526)]
    return [gsd_check(m, (L,), e) for m, L, e in cases]


def _criterion_gsd_qc():
    # (6,2,0) keeps the stated 533; its polynomial evaluates to 469 at L=2
    cases = [("qc:3,1,0", 2, 3), ("qc:3,1,0", 3, 3), ("qc:5,2,1", 2, 10), ("qc:5,1,0", 2, 95), ("qc:6,2,0", 2, 533)]
    return [gsd_check(m, (L,), e) for m, L, e in cases]


def _criterion_cross():
    return [cross_check("qpim2d", (2, 2), 3), cross_check("qc:3,1,0", (2,), 3), cross_check("toric3d", (2,), 3),
            cross_check("checkerboard", (2,), 6), cross_check("xcube", (2,), 9)]


def _criterion_kw():
    return [kw_relations_check("toric2d", (2, 2)), kw_relations_check("qpim2d", (2, 2)),
            kw_relations_check("qpim2d", (3, 3))]


def _criterion_fusion():
    return [fusion_report("qpim2d", (2, 2)), fusion_report("toric2d", (2, 2)), fusion_report("chamon", (2,))]


def _criterion_protocol():
    return [protocol_report("qpim2d", (2, 2)), protocol_report("toric2d", (2, 2)), protocol_report("chamon", (2,))]


def _criterion_strange():
    Ks = (0.2, 0.5, 1.0)
    return [strange_check("toric2d", (2, 2), Ks), strange_check("qpim2d", (2, 2), Ks),
            strange_check("checkerboard", (2, 2, 2), Ks)]


def _criterion_duality():
    return [duality_check("toric2d", (2, 2), (0.3, 0.7)), duality_check("qpim2d", (2, 2), (0.3, 0.7))]


def _criterion_foliated():
    return [foliated_duality_check("qpim2d", (2, 2), 2, 0.4, 0.6)]


def _criterion_inflow():
    return [inflow_report("toric2d", (2, 2), 1, 1, trials=50),
            closed_trace_check("toric2d", (2, 2), 1, 1, pairs=20, statevector_pairs=2)]


def _criterion_bf():
    return [bf_report("toric2d", (2, 2), 1)]


def _criterion_pairing():
    out = []
    for m in CATALOG:
        for L in (2, 3):
            if m == "checkerboard" and L % 2:
                continue
            if m.startswith("qc:5") and L > 2:
                continue  # 2430 qubits: within reach but the slowest by far
            out.append(pairing_check(m, (L,)))
    return out


CRITERIA = [
    Criterion(1, "classical self-dual GSD values", "exact", _criterion_gsd_cc),
    Criterion(2, "quantum self-dual GSD values", "exact", _criterion_gsd_qc),
    Criterion(3, "generating maps agree with chain homology", "exact", _criterion_cross),
    Criterion(4, "KW operator relations", "max deviation < 1e-12", _criterion_kw),
    Criterion(5, "non-invertible fusion", "max deviation < 1e-12", _criterion_fusion),
    Criterion(6, "gauging protocol determinism", "fidelity >= 1 - 1e-9", _criterion_protocol),
    Criterion(7, "strange correlator", "relative error < 1e-9", _criterion_strange),
    Criterion(8, "twisted duality", "relative residual < 1e-9", _criterion_duality),
    Criterion(9, "foliated refined duality", "relative residual < 1e-9", _criterion_foliated),
    Criterion(10, "anomaly inflow and closed traces", "exact signs", _criterion_inflow),
    Criterion(11, "BF sum equals operator trace", "exact after normalization", _criterion_bf),
    Criterion(12, "pairing nondegeneracy", "exact", _criterion_pairing),
]


def run_criterion(c: Criterion) -> dict:
    parts = c.parts()
    return {
        "criterion": c.number,
        "title": c.title,
        "tolerance": c.tolerance,
        "pass": all(p.passed for p in parts),
        "parts": [p.to_dict() for p in parts],
    }


def criterion_line(report: dict) -> str:
    failed = [p["check"] for p in report["parts"] if not p["pass"]]
    status = "PASS" if report["pass"] else "FAIL"
    tail = f" (failing: {'; '.join(failed)})" if failed else ""
    return f"{status} criterion {report['criterion']}: {report['title']} [{report['tolerance']}]{tail}"
