"""Slow, independent reference implementations used by the tests.

Everything here works on plain Python ints, nested lists and explicit
Kronecker products so that it shares no code path with the package.
Running this file regenerates ``frozen.json``.
"""

from __future__ import annotations

import itertools
import json
import math
from functools import reduce
from pathlib import Path

import numpy as np

FROZEN = Path(__file__).with_name("frozen.json")

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
LETTERS = {"I": I2, "X": PX, "Y": PY, "Z": PZ}


# F2 linear algebra on int bitmasks


def rows_as_ints(dense) -> list[int]:
    return [sum(int(b) << j for j, b in enumerate(row)) for row in np.asarray(dense)]


def gf2_rank(dense) -> int:
    """Rank via an xor basis keyed by leading bit."""
    basis: dict[int, int] = {}
    for r in rows_as_ints(dense):
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


def span_size(columns: list[int]) -> int:
    seen = {0}
    for c in columns:
        seen |= {s ^ c for s in seen}
    return len(seen)


def kernel_size(dense) -> int:
    """Count x with M x = 0 by enumeration (few columns only)."""
    m = np.asarray(dense, dtype=np.int64)
    n = m.shape[1]
    count = 0
    for x in itertools.product((0, 1), repeat=n):
        if not (m @ np.array(x, dtype=np.int64) % 2).any():
            count += 1
    return count


def homology_dim(d_in, d_out, n: int) -> int:
    """n - rank(out) - rank(in), both ranks from the xor basis."""
    r_out = gf2_rank(d_out) if d_out is not None and np.asarray(d_out).size else 0
    r_in = gf2_rank(d_in) if d_in is not None and np.asarray(d_in).size else 0
    return n - r_out - r_in


# Spin sums


def spin_partition(n: int, supports, weights, signs=None) -> float:
    """sum over s in {+1,-1}^n of exp(sum_t w_t sign_t prod_{i in t} s_i), literally."""
    signs = signs or [1] * len(supports)
    total = 0.0
    for s in itertools.product((1, -1), repeat=n):
        e = 0.0
        for sup, w, g in zip(supports, weights, signs):
            e += w * g * math.prod(s[i] for i in sup)
        total += math.exp(e)
    return total


# Dense Pauli algebra; qubit j is bit j of the basis index


def embed(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    factors = [ops.get(q, I2) for q in reversed(range(n))]
    return reduce(np.kron, factors)


def pauli_dense(n: int, letters: dict[int, str]) -> np.ndarray:
    return embed(n, {q: LETTERS[a] for q, a in letters.items()})


def apply_letters(n: int, letters: dict[int, str], v: np.ndarray, phase: int = 0) -> np.ndarray:
    """i^phase P v, one 2x2 factor per tensor axis; axis n-1-q holds qubit q."""
    t = v.reshape((2,) * n).astype(complex) if n else v.astype(complex)
    for q, a in letters.items():
        t = np.moveaxis(np.tensordot(LETTERS[a], t, axes=([1], [n - 1 - q])), 0, n - 1 - q)
    return (1j ** phase) * t.reshape(-1)


def z_string(n: int, support) -> dict[int, str]:
    return {q: "Z" for q in support}


def kw_dense(n_targets: int, blocks: list[dict[int, str]]) -> np.ndarray:
    """<c| <+|^targets U |t> |+>^controls with U = prod_b controlled-P_b.

    The controls are never flipped by U, so each control pattern c picks out
    the product of the blocks it switches on.
    """
    nc = len(blocks)
    mats = [pauli_dense(n_targets, b) for b in blocks]
    plus = np.ones(1 << n_targets) / math.sqrt(1 << n_targets)
    out = np.zeros((1 << nc, 1 << n_targets), dtype=complex)
    for c in range(1 << nc):
        row = plus.astype(complex)
        for b in range(nc):
            if (c >> b) & 1:
                row = row @ mats[b]
        out[c] = row / math.sqrt(1 << nc)
    return out


def stabilizer_state(n: int, generators) -> np.ndarray:
    """Normalized image of some basis state under prod (1+g)/2.

    Generators are dense matrices or (letters, phase) pairs.
    """
    def act(g, v):
        if isinstance(g, np.ndarray):
            return g @ v
        return apply_letters(n, g[0], v, g[1])

    for start in range(1 << n):
        v = np.zeros(1 << n, dtype=complex)
        v[start] = 1.0
        for g in generators:
            v = 0.5 * (v + act(g, v))
        nrm = np.linalg.norm(v)
        if nrm > 1e-9:
            return v / nrm
    raise ValueError("generators have no common +1 eigenvector")


def projector(n: int, generators: list[np.ndarray]) -> np.ndarray:
    p = np.eye(1 << n, dtype=complex)
    for g in generators:
        p = p @ (np.eye(1 << n) + g) / 2
    return p


def symmetry_group_sum(n: int, generators: list[int]) -> np.ndarray:
    elems = {0}
    for g in generators:
        elems |= {e ^ g for e in elems}
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for e in elems:
        out += pauli_dense(n, {q: "X" for q in range(n) if (e >> q) & 1})
    return out


# Frozen reference values


def _css_fixture(name: str, periods):
    from csskit.models import build_model

    return build_model(name, periods)


def compute_frozen() -> dict:
    """Reference numbers from the brute-force routines above.

    Models come from the package builders; every number is then computed here.
    """
    out: dict = {"homology": {}, "z_Z": {}, "z_X_untwisted": {}}
    for name, per in [("toric2d", (2,)), ("toric2d", (3,)), ("qpim2d", (2, 2)), ("qpim2d", (2, 3)),
                      ("toric3d", (2,)), ("xcube", (2,)), ("checkerboard", (2,)), ("haah", (2,)),
                      ("haah", (3,)), ("cc:3,1", (2,)), ("qc:3,1,0", (2,))]:
        css = _css_fixture(name, per)
        dz, dx = css.delta_z.dense(), css.delta_x.dense()
        dims = [homology_dim(None, dz, css.size(0)), homology_dim(dz, dx, css.size(1)),
                homology_dim(dx, None, css.size(2))]
        out["homology"][f"{name}@{','.join(map(str, per))}"] = dims
    for name, per in [("toric2d", (2,)), ("qpim2d", (2, 2)), ("checkerboard", (2,))]:
        css = _css_fixture(name, per)
        rows = [list(np.flatnonzero(r)) for r in css.delta_z.dense()]
        cols = [list(np.flatnonzero(c)) for c in css.delta_x.dense().T]
        for K in (0.2, 0.5, 1.0):
            key = f"{name}@{','.join(map(str, per))}@{K}"
            out["z_Z"][key] = math.log(spin_partition(css.size(0), rows, [K] * css.num_qubits))
            if css.size(2):
                out["z_X_untwisted"][key] = math.log(spin_partition(css.size(2), cols, [K] * css.num_qubits))
    return out


def load_frozen() -> dict:
    return json.loads(FROZEN.read_text())


if __name__ == "__main__":
    FROZEN.write_text(json.dumps(compute_frozen(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {FROZEN}")
