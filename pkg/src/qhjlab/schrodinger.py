"""Potentials, grids and the real two-solution basis of the 1D stationary
Schrodinger equation ``-(hbar^2/2m) y'' + V y = E y``.

The basis is produced by a fixed-step classical Runge-Kutta scheme written
for the linear system ``(y, y')' = [[0, 1], [q, 0]] (y, y')`` with
``q = 2m(V - E)/hbar^2``. Each step is a 2x2 matrix assembled in one
vectorised pass; only the matrix product chain runs in Python.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

__all__ = [
    "Constants", "Grid", "Potential", "BasisPair",
    "free", "harmonic", "linear", "square_well", "polynomial", "tabulated",
    "load_potential_csv", "BUILTIN_POTENTIALS",
    "eval_potential", "solve_basis", "wronskian_drift", "find_eigenvalues",
    "superpose", "OverflowDiagnostic", "EigenvalueWarning",
]

# magnitude at which the outward integration is declared overflowed
_OVERFLOW_LIMIT = 1e150


class OverflowDiagnostic(FloatingPointError):
    """Raised when a basis solution grows past the representable range."""


class EigenvalueWarning(UserWarning):
    """Fewer eigenvalues than requested were found in the energy window."""


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError(f"hbar and mass must be positive, got {self}")


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` samples on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 samples, got {self.n}")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got {self.x_min}, {self.x_max}")

    @classmethod
    def from_spacing(cls, x_min, x_max, h):
        n = int(round((x_max - x_min) / h)) + 1
        return cls(float(x_min), float(x_max), n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def index_of(self, x0: float, rtol: float = 1e-9) -> int:
        """Index of the node at ``x0``; raises if ``x0`` is not a node."""
        s = (x0 - self.x_min) / self.h
        i = int(round(s))
        if not (0 <= i < self.n) or abs(s - i) > rtol * max(1.0, abs(s)):
            raise ValueError(f"x0={x0} is not a node of {self}")
        return i


@dataclass(frozen=True)
class Potential:
    """A potential energy function V(x).

    ``kind`` is one of ``"builtin"``, ``"polynomial"`` or ``"tabulated"``;
    ``name`` and ``params`` record how it was built so configs and sidecars
    can echo it.
    """

    kind: str
    name: str
    params: dict
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    domain: tuple = (-np.inf, np.inf)
    even: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            raise ValueError(
                f"x outside tabulated range [{lo}, {hi}] of potential {self.name!r}")
        return self.func(x) + np.zeros_like(x)


def free() -> Potential:
    return Potential("builtin", "free", {}, lambda x: np.zeros_like(x), even=True)


def harmonic(omega: float = 1.0, mass: float = 1.0) -> Potential:
    """``V = m omega^2 x^2 / 2``."""
    k = mass * omega**2
    return Potential("builtin", "harmonic", {"omega": omega, "mass": mass},
                     lambda x: 0.5 * k * x * x, even=True)


def linear(slope: float = 1.0, offset: float = 0.0) -> Potential:
    """Linear ramp ``V = offset + slope * x``."""
    return Potential("builtin", "linear", {"slope": slope, "offset": offset},
                     lambda x: offset + slope * x)


def square_well(depth: float, width: float, center: float = 0.0) -> Potential:
    """Square well with floor at 0 inside ``|x - center| < width/2`` and
    ``depth`` outside; ``depth/2`` exactly on a wall. Walls placed on grid
    nodes are integrated without loss of order.
    """
    half = 0.5 * width

    def func(x):
        r = np.abs(x - center)
        return np.where(r < half, 0.0, np.where(r > half, depth, 0.5 * depth))

    return Potential("builtin", "square_well",
                     {"depth": depth, "width": width, "center": center}, func,
                     even=(center == 0.0))


def polynomial(coefficients: Sequence[float]) -> Potential:
    """Polynomial with ascending coefficients: ``c0 + c1 x + c2 x^2 + ...``."""
    coefficients = [float(c) for c in coefficients]
    poly = np.polynomial.Polynomial(coefficients)
    even = all(c == 0.0 for c in coefficients[1::2])
    return Potential("polynomial", "polynomial", {"coefficients": coefficients},
                     poly, even=even)


def tabulated(x_values, v_values, name="tabulated") -> Potential:
    """Cubic-spline interpolant through ``(x_values, v_values)``."""
    xs = np.asarray(x_values, dtype=float)
    vs = np.asarray(v_values, dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or xs.size < 4:
        raise ValueError("tabulated potential needs matching 1D arrays of >= 4 samples")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("tabulated x-values must be strictly increasing")
    spline = CubicSpline(xs, vs)
    return Potential("tabulated", name, {"n_samples": int(xs.size)}, spline,
                     domain=(xs[0], xs[-1]))


def load_potential_csv(path) -> Potential:
    """Read a two-column ``x,V`` CSV file (header row required)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], [r for r in rows[1:] if r]
    if len(header) != 2:
        raise ValueError(f"{path}: expected a two-column header, got {header}")
    data = np.array(body, dtype=float)
    return tabulated(data[:, 0], data[:, 1], name=str(path))


BUILTIN_POTENTIALS = {
    "free": free,
    "harmonic": harmonic,
    "linear": linear,
    "square_well": square_well,
}


def eval_potential(p: Potential, x):
    """V(x); scalar in, scalar out."""
    v = p(x)
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class BasisPair:
    """Canonical pair of real solutions at energy ``energy``.

    ``theta1(x0) = 1, theta1'(x0) = 0, theta2(x0) = 0, theta2'(x0) = 1``
    so the Wronskian ``theta1 theta2' - theta2 theta1'`` equals 1.
    """

    grid: Grid
    energy: float
    x0: float
    theta1: np.ndarray = field(repr=False)
    theta2: np.ndarray = field(repr=False)
    dtheta1: np.ndarray = field(repr=False)
    dtheta2: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    wronskian: float = 1.0
    potential: Potential | None = field(default=None, repr=False, compare=False)
    constants: Constants = Constants()

    @property
    def x(self):
        return self.grid.x

    def wronskian_profile(self):
        return self.theta1 * self.dtheta2 - self.theta2 * self.dtheta1


def _step_matrices(qa, qm, qb, h):
    """RK4 propagators for ``(y, y')`` over steps with q at start/mid/end.

    Returns four arrays (m11, m12, m21, m22), one entry per step.
    """
    def apply(y, p):
        k1y, k1p = p, qa * y
        y2, p2 = y + 0.5 * h * k1y, p + 0.5 * h * k1p
        k2y, k2p = p2, qm * y2
        y3, p3 = y + 0.5 * h * k2y, p + 0.5 * h * k2p
        k3y, k3p = p3, qm * y3
        y4, p4 = y + h * k3y, p + h * k3p
        k4y, k4p = p4, qb * y4
        return (y + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y),
                p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p))

    one, zero = np.ones_like(qa), np.zeros_like(qa)
    m11, m21 = apply(one, zero)
    m12, m22 = apply(zero, one)
    return m11, m12, m21, m22


def _propagate(mats, y, p):
    """Run ``(y, p)`` through the step matrices; returns the visited states."""
    m11, m12, m21, m22 = (m.tolist() for m in mats)
    ys = [y]
    ps = [p]
    for a, b, c, d in zip(m11, m12, m21, m22):
        y, p = a * y + b * p, c * y + d * p
        ys.append(y)
        ps.append(p)
    return np.array(ys), np.array(ps)


def _one_sided(p, x):
    """V just inside each side of every node: (limit from left, from right).

    Step endpoints use the limit from inside the step so that jumps located
    on nodes are integrated exactly. The probe offset is far below any
    smooth-potential scale.
    """
    delta = 1e-10 * (x[1] - x[0])
    vl = p(x)
    vr = vl.copy()
    vl[1:] = p(x[1:] - delta)
    vr[:-1] = p(x[:-1] + delta)
    return vl, vr


def _outward(p, grid, energy, i0, c, y0, dy0):
    """Integrate from node ``i0`` to both grid ends."""
    x, h = grid.x, grid.h
    scale = 2.0 * c.mass / c.hbar**2
    vl, vr = _one_sided(p, x)
    ql, qr = scale * (vl - energy), scale * (vr - energy)
    qmid = scale * (p(0.5 * (x[:-1] + x[1:])) - energy)
    right = _step_matrices(qr[i0:-1], qmid[i0:], ql[i0 + 1:], h)
    yr, pr = _propagate(right, y0, dy0)
    qn = scale * (p(x) - energy)
    if i0 == 0:
        return yr, pr, qn
    left = _step_matrices(ql[i0:0:-1], qmid[:i0][::-1], qr[i0 - 1::-1], -h)
    yl, pl = _propagate(left, y0, dy0)
    return np.concatenate([yl[:0:-1], yr]), np.concatenate([pl[:0:-1], pr]), qn


def solve_basis(p: Potential, energy: float, grid: Grid, x0: float = 0.0,
                c: Constants = Constants()) -> BasisPair:
    """Canonical real basis of ``-(hbar^2/2m) y'' + V y = E y`` on ``grid``.

    Integration runs outward from the node ``x0`` in both directions.

    Raises
    ------
    ValueError
        If ``x0`` is not a grid node.
    OverflowDiagnostic
        If a solution exceeds 1e150 in magnitude; shrink the domain.
    """
    i0 = grid.index_of(x0)
    x0 = float(grid.x[i0])
    t1, d1, q = _outward(p, grid, energy, i0, c, 1.0, 0.0)
    t2, d2, _ = _outward(p, grid, energy, i0, c, 0.0, 1.0)
    peak = max(np.abs(t1).max(), np.abs(t2).max(), np.abs(d1).max(), np.abs(d2).max())
    if not np.isfinite(peak) or peak > _OVERFLOW_LIMIT:
        raise OverflowDiagnostic(
            f"basis solution reached {peak:.3e} at E={energy} on [{grid.x_min}, "
            f"{grid.x_max}]; the classically forbidden tails are too long, "
            "use a smaller domain")
    return BasisPair(grid, float(energy), x0, t1, t2, d1, d2, q,
                     wronskian=float(t1[i0] * d2[i0] - t2[i0] * d1[i0]),
                     potential=p, constants=c)


def wronskian_drift(b: BasisPair, relative: bool = False) -> float:
    """``max |W(x) - W(x0)|`` over the grid.

    With ``relative=True`` each node is divided by the size of the two
    products ``|theta1 theta2'| + |theta2 theta1'|`` (at least ``|W|``),
    which is the scale of the rounding error where the basis grows large.
    """
    w = b.wronskian_profile()
    i0 = b.grid.index_of(b.x0)
    gap = np.abs(w - w[i0])
    if relative:
        size = np.abs(b.theta1 * b.dtheta2) + np.abs(b.theta2 * b.dtheta1)
        gap = gap / np.maximum(size, abs(w[i0]))
    return float(gap.max())


def superpose(b: BasisPair, C1: complex, C2: complex) -> np.ndarray:
    """``C1 theta1 + C2 theta2`` on the grid."""
    if C1 == 0 and C2 == 0:
        raise ValueError("superposition needs a nonzero coefficient")
    return complex(C1) * b.theta1 + complex(C2) * b.theta2


# -- bound states -------------------------------------------------------------

class _Shooter:
    """Dirichlet shooting from both grid ends towards the midpoint node."""

    def __init__(self, p, grid, c):
        self.grid, self.c = grid, c
        x = grid.x
        self.scale = 2.0 * c.mass / c.hbar**2
        self.vl, self.vr = _one_sided(p, x)
        self.vmid = p(0.5 * (x[:-1] + x[1:]))
        self.im = (grid.n - 1) // 2

    def _mats(self, energy, side):
        s, h, im = self.scale, self.grid.h, self.im
        ql, qr = s * (self.vl - energy), s * (self.vr - energy)
        qm = s * (self.vmid - energy)
        if side == "left":
            return _step_matrices(qr[:im], qm[:im], ql[1:im + 1], h)
        if side == "right":
            return _step_matrices(ql[:im:-1], qm[im:][::-1], qr[-2:im - 1:-1], -h)
        return _step_matrices(qr[:-1], qm, ql[1:], h)

    def shoot(self, energy):
        """Left and right solutions (values, derivatives) up to the midpoint."""
        yl, pl = _propagate(self._mats(energy, "left"), 0.0, 1.0)
        yr, pr = _propagate(self._mats(energy, "right"), 0.0, -1.0)
        return yl, pl, yr, pr

    def nodes(self, energy):
        """Sign changes of the left-shot solution across the whole grid.

        By Sturm oscillation this counts the Dirichlet eigenvalues below
        ``energy``.
        """
        y, _ = _propagate(self._mats(energy, "full"), 0.0, 1.0)
        y = y[1:]
        return int(np.count_nonzero(np.signbit(y[1:]) != np.signbit(y[:-1])))

    def mismatch(self, energy):
        """Normalised Wronskian of the two shots at the matching node.

        Equals the log-derivative mismatch times ``psi_L psi_R`` divided by
        the state norms, so it stays finite when either shot has a node at
        the matching point.
        """
        yl, pl, yr, pr = self.shoot(energy)
        a = (yl[-1], pl[-1])
        b = (yr[-1], pr[-1])
        return (a[1] * b[0] - a[0] * b[1]) / (np.hypot(*a) * np.hypot(*b))


def find_eigenvalues(p: Potential, grid: Grid, e_range, count: int,
                     c: Constants = Constants(), tol: float = 1e-9) -> list:
    """Lowest ``count`` bound-state energies of ``p`` inside ``e_range``.

    Bound states must lie below the potential at both grid ends. Each level
    is bracketed by bisection on the node count and then refined by
    bisection on the midpoint mismatch to ``tol``. Returns fewer values (and
    warns) when the window holds fewer levels.
    """
    e_lo, e_hi = map(float, e_range)
    if not (np.isfinite(e_lo) and np.isfinite(e_hi) and e_lo < e_hi):
        raise ValueError(f"e_range must be a finite increasing interval, got {e_range}")
    v_edge = min(float(p(grid.x_min)), float(p(grid.x_max)))
    e_hi = min(e_hi, v_edge)
    if e_lo >= e_hi:
        warnings.warn(f"no bound states possible below V_edge={v_edge}", EigenvalueWarning)
        return []
    sh = _Shooter(p, grid, c)
    n_lo, n_hi = sh.nodes(e_lo), sh.nodes(e_hi)
    levels = range(n_lo, min(n_hi, n_lo + count))
    out = []
    for k in levels:
        a, b = e_lo, e_hi
        while b - a > 1e-4 * max(1.0, abs(a)):
            mid = 0.5 * (a + b)
            if sh.nodes(mid) > k:
                b = mid
            else:
                a = mid
        fa, fb = sh.mismatch(a), sh.mismatch(b)
        pad = b - a
        while np.sign(fa) == np.sign(fb) and pad < 1e-2 * max(1.0, abs(a)):
            a, b = a - pad, b + pad
            fa, fb = sh.mismatch(a), sh.mismatch(b)
            pad *= 2
        if np.sign(fa) == np.sign(fb):
            raise RuntimeError(f"could not bracket level {k} near E={a}")
        out.append(bisect(sh.mismatch, a, b, xtol=tol, rtol=4 * np.finfo(float).eps))
    if len(out) < count:
        warnings.warn(f"found {len(out)} of {count} eigenvalues in {e_range}",
                      EigenvalueWarning)
    return out
