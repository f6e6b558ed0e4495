"""Lattice models on periodic hypercubic lattices.

A cell is written as a lower corner plus the set of axes along which it
extends. Every builder returns cells in canonical order and validates
nilpotency before returning.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

from .chain import CellLabel, ComplexError, CssComplex, require_valid
from .f2 import BitMatrix

AXIS_NAMES = "xyz"


class ConstraintViolation(ValueError):
    """A model's parameters break the condition that guarantees nilpotency."""


class UnknownModel(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: tuple[int, ...] = ()
    periods: tuple[int, ...] = ()
    coupling: float = 1.0


def _check_periods(periods: Sequence[int], even: bool = False) -> tuple[int, ...]:
    periods = tuple(int(p) for p in periods)
    for p in periods:
        if p < 2:
            raise ComplexError(f"periods must be at least 2, got {periods}")
        if even and p % 2:
            raise ComplexError(f"periods must be even, got {periods}")
    return periods


def cells_of_dim(periods: Sequence[int], k: int) -> list[CellLabel]:
    d = len(periods)
    out = []
    for axes in itertools.combinations(range(d), k):
        for coords in itertools.product(*(range(p) for p in periods)):
            out.append(CellLabel(coords, axes))
    return sorted(out, key=CellLabel.sort_key)


def subcells(cell: CellLabel, k: int, periods: Sequence[int]) -> list[CellLabel]:
    """All k-dimensional cells contained in ``cell``."""
    axes = cell.extended_axes
    out = []
    for keep in itertools.combinations(axes, k):
        dropped = [a for a in axes if a not in keep]
        for offs in itertools.product((0, 1), repeat=len(dropped)):
            c = list(cell.coords)
            for a, o in zip(dropped, offs):
                c[a] = (c[a] + o) % periods[a]
            out.append(CellLabel(c, keep, cell.type_tag))
    return out


def _incidence(sources, targets, rule) -> BitMatrix:
    where = {c: i for i, c in enumerate(targets)}
    return BitMatrix.from_column_supports(len(targets), [[where[t] for t in rule(s)] for s in sources])


def cubical_css(periods: Sequence[int], dim_z: int, dim_q: int, dim_x: int | None, name: str) -> CssComplex:
    """CSS code whose checks and qubits are cubical cells, joined by inclusion."""
    periods = _check_periods(periods)
    cz = cells_of_dim(periods, dim_z)
    cq = cells_of_dim(periods, dim_q)
    cx = cells_of_dim(periods, dim_x) if dim_x is not None else []
    dz = _incidence(cz, cq, lambda c: subcells(c, dim_q, periods))
    if dim_x is None:
        dx = BitMatrix(0, len(cq))
    else:
        dx = _incidence(cq, cx, lambda c: subcells(c, dim_x, periods))
    return require_valid(CssComplex(cz, cq, cx, dz, dx, name))


def build_qpim2d(Lx: int, Ly: int) -> CssComplex:
    return cubical_css((Lx, Ly), 2, 0, None, "qpim2d")


def build_toric(d: int, *L: int) -> CssComplex:
    if d < 2:
        raise ComplexError("toric code needs d >= 2")
    periods = _expand_periods(d, L)
    return cubical_css(periods, 2, 1, 0, f"toric{d}d")


def build_cc(d: int, k: int, *L: int) -> CssComplex:
    if not 2 * k < d:
        raise ConstraintViolation(f"cc({d},{k}) needs 2k < d")
    return cubical_css(_expand_periods(d, L), d - k, k, None, f"cc{d},{k}")


def qc_constraint(d: int, k: int, l: int) -> int:
    return comb(d - k - l, k - l)


def build_qc(d: int, k: int, l: int, *L: int) -> CssComplex:
    if not 2 * k < d:
        raise ConstraintViolation(f"qc({d},{k},{l}) needs 2k < d")
    if not 0 <= l < k:
        raise ConstraintViolation(f"qc({d},{k},{l}) needs 0 <= l < k")
    b = qc_constraint(d, k, l)
    if b % 2:
        raise ConstraintViolation(f"binom({d - k - l},{k - l}) = {b} is odd")
    return cubical_css(_expand_periods(d, L), d - k, k, l, f"qc{d},{k},{l}")


def _expand_periods(d: int, L: Sequence[int]) -> tuple[int, ...]:
    if len(L) == 1:
        return (int(L[0]),) * d
    if len(L) != d:
        raise ComplexError(f"expected 1 or {d} periods, got {len(L)}")
    return tuple(int(x) for x in L)


def build_xcube(Lx: int, Ly: int, Lz: int) -> CssComplex:
    periods = _check_periods((Lx, Ly, Lz))
    cubes = cells_of_dim(periods, 3)
    edges = cells_of_dim(periods, 1)
    copies = sorted(
        (CellLabel(c, (), t) for t in AXIS_NAMES for c in itertools.product(*(range(p) for p in periods))),
        key=CellLabel.sort_key,
    )

    def edge_to_copies(e: CellLabel):
        a = e.extended_axes[0]
        ends = [e.coords, tuple((c + (i == a)) % periods[i] for i, c in enumerate(e.coords))]
        return [CellLabel(v, (), AXIS_NAMES[t]) for v in ends for t in range(3) if t != a]

    dz = _incidence(cubes, edges, lambda c: subcells(c, 1, periods))
    dx = _incidence(edges, copies, edge_to_copies)
    return require_valid(CssComplex(cubes, edges, copies, dz, dx, "xcube"))


def is_shaded(coords: Sequence[int]) -> bool:
    return sum(coords) % 2 == 0


def build_checkerboard(*L: int) -> CssComplex:
    periods = _check_periods(_expand_periods(3, L), even=True)
    shaded = [CellLabel(c, (0, 1, 2), "s") for c in itertools.product(*(range(p) for p in periods)) if is_shaded(c)]
    shaded.sort(key=CellLabel.sort_key)
    verts = cells_of_dim(periods, 0)

    def cubes_at(v: CellLabel):
        out = []
        for e in itertools.product((0, 1), repeat=3):
            c = tuple((x - o) % p for x, o, p in zip(v.coords, e, periods))
            if is_shaded(c):
                out.append(CellLabel(c, (0, 1, 2), "s"))
        return out

    dz = _incidence(shaded, verts, lambda c: subcells(CellLabel(c.coords, c.extended_axes), 0, periods))
    dx = _incidence(verts, shaded, cubes_at)
    return require_valid(CssComplex(shaded, verts, shaded, dz, dx, "checkerboard"))


# corner offsets of a cube carrying each vertex copy
HAAH_Z_R = [(1, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)]
HAAH_Z_B = [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
# cube lower corners (relative to the vertex) reached from each copy
HAAH_X_R = [(0, 0, -1), (0, -1, 0), (-1, 0, 0), (-1, -1, -1)]
HAAH_X_B = [(0, 0, 0), (0, -1, 0), (-1, -1, 0), (0, -1, -1)]


def build_haah(*L: int) -> CssComplex:
    periods = _check_periods(_expand_periods(3, L))
    sites = list(itertools.product(*(range(p) for p in periods)))
    cubes = sorted((CellLabel(c, (0, 1, 2)) for c in sites), key=CellLabel.sort_key)
    copies = sorted((CellLabel(c, (), t) for t in "RB" for c in sites), key=CellLabel.sort_key)

    def shift(c, o):
        return tuple((x + dx) % p for x, dx, p in zip(c, o, periods))

    def corners(cube: CellLabel):
        return [CellLabel(shift(cube.coords, o), (), "R") for o in HAAH_Z_R] + [
            CellLabel(shift(cube.coords, o), (), "B") for o in HAAH_Z_B
        ]

    def owners(v: CellLabel):
        offs = HAAH_X_R if v.type_tag == "R" else HAAH_X_B
        return [CellLabel(shift(v.coords, o), (0, 1, 2)) for o in offs]

    dz = _incidence(cubes, copies, corners)
    dx = _incidence(copies, cubes, owners)
    return require_valid(CssComplex(cubes, copies, cubes, dz, dx, "haah"))


# Chamon model

CHAMON_Z_ONLY = [(0, 1, 1), (1, 0, 0)]
CHAMON_X_ONLY = [(0, 0, 0), (1, 1, 1)]
CHAMON_Y = [(0, 0, 1), (1, 1, 0)]


@dataclass
class ChamonModel:
    periods: tuple[int, int, int]
    vertices: list[CellLabel]
    cubes: list[CellLabel]
    delta_c: BitMatrix        # cubes -> vertices, Z part (Z and Y corners)
    delta_c_prime: BitMatrix  # cubes -> vertices, X part (X and Y corners)
    letters: list[dict[int, str]] = field(default_factory=list)  # per cube: vertex index -> letter

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cubes(self) -> int:
        return len(self.cubes)


def build_chamon(L: int) -> ChamonModel:
    periods = _check_periods((L, L, L))
    sites = list(itertools.product(range(L), repeat=3))
    verts = sorted((CellLabel(c) for c in sites), key=CellLabel.sort_key)
    cubes = sorted((CellLabel(c, (0, 1, 2)) for c in sites), key=CellLabel.sort_key)
    where = {v: i for i, v in enumerate(verts)}

    def at(cube, o):
        return where[CellLabel(tuple((x + d) % L for x, d in zip(cube.coords, o)))]

    letters = []
    zs, xs = [], []
    for cube in cubes:
        assign: dict[int, str] = {}
        for o in CHAMON_Z_ONLY:
            assign[at(cube, o)] = "Z"
        for o in CHAMON_X_ONLY:
            assign[at(cube, o)] = "X"
        for o in CHAMON_Y:
            assign[at(cube, o)] = "Y"
        if len(assign) != 6:
            raise ComplexError("Chamon stabilizer corners collide; use L >= 2")
        letters.append(assign)
        zs.append([at(cube, o) for o in CHAMON_Z_ONLY + CHAMON_Y])
        xs.append([at(cube, o) for o in CHAMON_X_ONLY + CHAMON_Y])
    dc = BitMatrix.from_column_supports(len(verts), zs)
    dcp = BitMatrix.from_column_supports(len(verts), xs)
    return ChamonModel(periods, verts, cubes, dc, dcp, letters)


# Model names

_NAME_RE = re.compile(r"^(toric(\d)d|qpim2d|xcube|checkerboard|haah|chamon|cc:(\d+),(\d+)|qc:(\d+),(\d+),(\d+))$")


def parse_model(name: str, periods: Sequence[int] = (), coupling: float = 1.0) -> ModelSpec:
    m = _NAME_RE.match(name.strip())
    if not m:
        raise UnknownModel(f"unknown model {name!r}")
    periods = tuple(int(p) for p in periods)
    if m.group(2):
        return ModelSpec("toric", (int(m.group(2)),), periods, coupling)
    if m.group(3):
        return ModelSpec("cc", (int(m.group(3)), int(m.group(4))), periods, coupling)
    if m.group(5):
        return ModelSpec("qc", (int(m.group(5)), int(m.group(6)), int(m.group(7))), periods, coupling)
    return ModelSpec(m.group(1), (), periods, coupling)


def model_dimension(spec: ModelSpec) -> int:
    if spec.name in ("toric", "cc", "qc"):
        return spec.params[0]
    if spec.name == "qpim2d":
        return 2
    return 3


def build_model(spec: ModelSpec | str, periods: Sequence[int] = ()):
    """CssComplex for CSS models, ChamonModel for the Chamon model."""
    if isinstance(spec, str):
        spec = parse_model(spec, periods)
    d = model_dimension(spec)
    L = spec.periods or (2,)
    L = _expand_periods(d, L)
    if spec.name == "toric":
        return build_toric(d, *L)
    if spec.name == "qpim2d":
        return build_qpim2d(*L)
    if spec.name == "xcube":
        return build_xcube(*L)
    if spec.name == "checkerboard":
        return build_checkerboard(*L)
    if spec.name == "haah":
        return build_haah(*L)
    if spec.name == "cc":
        return build_cc(spec.params[0], spec.params[1], *L)
    if spec.name == "qc":
        return build_qc(*spec.params, *L)
    if spec.name == "chamon":
        if len(set(L)) != 1:
            raise ComplexError("the Chamon model is built on a cubic L x L x L torus")
        return build_chamon(L[0])
    raise UnknownModel(spec.name)


CATALOG = ["toric2d", "toric3d", "qpim2d", "xcube", "checkerboard", "haah", "cc:3,1", "qc:3,1,0", "qc:5,2,1"]
