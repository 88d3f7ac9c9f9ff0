"""Vector and antisymmetric tensor fields on uniform 3D grids.

A divergence-free current can be written as the curl of a vector field
``B``; the antisymmetric tensor ``F^{ij} = d_i B^j - d_j B^i`` then returns
the current through ``j_i = (1/2) eps_ijk F^{jk}``, and continuity is the
statement ``div j = 0``. Derivatives use the fourth-order stencils of
``qhjlab._fd`` along each axis (central inside, one-sided at the faces),
and every operator here is built from those same stencils, so
``div(curl B)`` cancels to rounding. The metric is flat Euclidean, so upper
and lower indices coincide.
"""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._fd import derivative
from .schrodinger import Constants

__all__ = [
    "Grid3", "VectorField3", "TensorField3", "levi_civita",
    "gradient", "curl", "divergence", "tensor_from_potential",
    "contract_to_current", "continuity_check", "plane_wave_potential",
    "write_vector_csv", "read_vector_csv", "write_tensor_csv",
]


@dataclass(frozen=True)
class Grid3:
    """Uniform grid; ``lo``, ``hi`` and ``n`` are per-axis triples."""

    lo: tuple = (-1.0, -1.0, -1.0)
    hi: tuple = (1.0, 1.0, 1.0)
    n: tuple = (32, 32, 32)

    def __post_init__(self):
        lo, hi, n = (tuple(v) for v in (self.lo, self.hi, self.n))
        if not (len(lo) == len(hi) == len(n) == 3):
            raise ValueError("Grid3 needs three values per attribute")
        if any(k < 4 for k in n):
            raise ValueError(f"every axis needs at least 4 samples, got {n}")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"need lo < hi on every axis, got {lo}, {hi}")
        object.__setattr__(self, "lo", tuple(map(float, lo)))
        object.__setattr__(self, "hi", tuple(map(float, hi)))
        object.__setattr__(self, "n", tuple(map(int, n)))

    @classmethod
    def cube(cls, half_width=1.0, n=32):
        return cls((-half_width,) * 3, (half_width,) * 3, (n,) * 3)

    @property
    def spacing(self):
        return tuple((b - a) / (k - 1) for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def axes(self):
        return tuple(np.linspace(a, b, k) for a, b, k in zip(self.lo, self.hi, self.n))

    def mesh(self):
        """Coordinate arrays ``(x, y, z)`` with ``indexing="ij"``."""
        return np.meshgrid(*self.axes, indexing="ij")


@dataclass(frozen=True)
class VectorField3:
    grid: Grid3
    components: tuple = field(repr=False)

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) * np.ones(self.grid.n) for c in self.components)
        if len(comps) != 3:
            raise ValueError("a vector field has three components")
        if not all(np.all(np.isfinite(c)) for c in comps):
            raise ValueError("vector field components must be finite")
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i):
        return self.components[i]

    def scaled(self, s):
        return VectorField3(self.grid, tuple(s * c for c in self.components))

    def max_abs_diff(self, other: "VectorField3") -> float:
        return max(float(np.abs(a - b).max()) for a, b in zip(self, other))


# storage order of the independent tensor components
_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class TensorField3:
    """Antisymmetric rank-2 field stored as ``F^{01}, F^{02}, F^{12}``.

    Indexing with ``(i, j)`` returns the signed component, so
    ``F[i, j] == -F[j, i]`` holds exactly and the diagonal is zero.
    """

    grid: Grid3
    upper: tuple = field(repr=False)

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) * np.ones(self.grid.n) for c in self.upper)
        if len(comps) != 3:
            raise ValueError("an antisymmetric 3x3 field has three independent components")
        object.__setattr__(self, "upper", comps)

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return np.zeros(self.grid.n)
        if i < j:
            return self.upper[_PAIRS.index((i, j))]
        return -self.upper[_PAIRS.index((j, i))]

    def dense(self):
        """Full ``(3, 3, nx, ny, nz)`` array."""
        return np.array([[self[i, j] for j in range(3)] for i in range(3)])


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for p in itertools.permutations(range(3)):
        eps[p] = np.linalg.det(np.eye(3)[list(p)])
    return eps


def _d(f, grid: Grid3, axis):
    return derivative(f, grid.spacing[axis], order=1, axis=axis)


def gradient(f, grid: Grid3) -> VectorField3:
    return VectorField3(grid, tuple(_d(f, grid, a) for a in range(3)))


def curl(B: VectorField3) -> VectorField3:
    """Fourth-order curl: ``(d_y B_z - d_z B_y, d_z B_x - d_x B_z, d_x B_y - d_y B_x)``."""
    g = B.grid
    return VectorField3(g, (
        _d(B[2], g, 1) - _d(B[1], g, 2),
        _d(B[0], g, 2) - _d(B[2], g, 0),
        _d(B[1], g, 0) - _d(B[0], g, 1),
    ))


def divergence(j: VectorField3) -> np.ndarray:
    g = j.grid
    return _d(j[0], g, 0) + _d(j[1], g, 1) + _d(j[2], g, 2)


def tensor_from_potential(B: VectorField3) -> TensorField3:
    """``F^{ij} = d_i B^j - d_j B^i``."""
    g = B.grid
    return TensorField3(g, tuple(_d(B[j], g, i) - _d(B[i], g, j) for i, j in _PAIRS))


def contract_to_current(F: TensorField3) -> VectorField3:
    """``j_i = (1/2) eps_ijk F^{jk}``, summed over all index pairs."""
    eps = levi_civita()
    comps = []
    for i in range(3):
        acc = np.zeros(F.grid.n)
        for j in range(3):
            for k in range(3):
                if eps[i, j, k]:
                    acc = acc + 0.5 * eps[i, j, k] * F[j, k]
        comps.append(acc)
    return VectorField3(F.grid, tuple(comps))


def continuity_check(j: VectorField3) -> np.ndarray:
    """Divergence of ``j``; zero for a conserved stationary current."""
    return divergence(j)


def plane_wave_potential(k, A0: float, grid: Grid3, c: Constants = Constants()) -> VectorField3:
    """``B = (hbar A0^2 / 2) k x r`` whose curl is the plane-wave current ``hbar A0^2 k``."""
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ValueError("k must have three components")
    if not np.any(k):
        raise ValueError("wavevector must be nonzero")
    x, y, z = grid.mesh()
    s = 0.5 * c.hbar * A0**2
    return VectorField3(grid, (
        s * (k[1] * z - k[2] * y),
        s * (k[2] * x - k[0] * z),
        s * (k[0] * y - k[1] * x),
    ))


# -- serialisation ---------------------------------------------------------------

def _rows(grid, comps):
    x, y, z = grid.mesh()
    cols = [x.ravel(), y.ravel(), z.ravel()] + [c.ravel() for c in comps]
    return np.column_stack(cols)


def write_vector_csv(path, field_: VectorField3, names=("Bx", "By", "Bz"), meta=None):
    """CSV with header ``x,y,z,<names>``; rows run over ``(i, j, k)`` with ``k``
    fastest. A JSON sidecar ``<path>.json`` records the grid."""
    _write(path, field_.grid, field_.components, list(names), meta)


def write_tensor_csv(path, F: TensorField3, meta=None):
    """CSV with header ``x,y,z,F01,F02,F12`` in the same row order."""
    _write(path, F.grid, F.upper, ["F01", "F02", "F12"], meta)


def _write(path, grid, comps, names, meta):
    path = Path(path)
    data = _rows(grid, comps)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z"] + names)
        for row in data:
            w.writerow([f"{v:.16e}" for v in row])
    side = {"grid": {"lo": grid.lo, "hi": grid.hi, "n": grid.n},
            "columns": ["x", "y", "z"] + names, "order": "C (z fastest)"}
    if meta:
        side.update(meta)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2) + "\n")


def read_vector_csv(path) -> VectorField3:
    path = Path(path)
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    g = side["grid"]
    grid = Grid3(tuple(g["lo"]), tuple(g["hi"]), tuple(g["n"]))
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return VectorField3(grid, tuple(data[:, 3 + i].reshape(grid.n) for i in range(3)))
