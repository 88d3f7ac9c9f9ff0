"""Reduced action, amplitude and the quantum stationary Hamilton-Jacobi
equation (QSHJE) in one dimension.

For a real basis ``(theta1, theta2)`` and a microstate ``(sigma, nu, mu,
gamma; lam)`` the reduced action is the continuous angle of

    D + iN,   N = sigma theta1 + nu theta2,   D = mu theta1 + gamma theta2,

scaled by hbar and shifted by ``hbar * lam``. Its modulus is the amplitude
``A = |D + iN|`` and ``A^2 S0' = hbar W (mu nu - sigma gamma)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from ._fd import derivative
from .schrodinger import BasisPair, Constants, Grid, Potential

__all__ = [
    "Microstate", "DegenerateMicrostateError", "BranchTrackingError",
    "ReducedActionField", "IntegralActionParams",
    "amplitude", "action_derivative", "reduced_action", "quantum_potential",
    "qshje_residual", "qshje_lhs", "action_from_integral",
    "basis_quantum_potential",
]


class DegenerateMicrostateError(ValueError):
    """``mu nu == sigma gamma``: the two rows do not span the basis."""


class BranchTrackingError(RuntimeError):
    """The angle moved by more than pi/2 between neighbouring nodes."""


@dataclass(frozen=True)
class Microstate:
    """Projective parameters selecting one reduced action.

    ``(sigma, nu)`` weight the numerator and ``(mu, gamma)`` the
    denominator; ``lam`` is the additive phase (S0 offset ``hbar * lam``).
    Rescaling all four by a common positive factor leaves S0 unchanged.
    """

    sigma: float = 1.0
    nu: float = 0.0
    mu: float = 0.0
    gamma: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        scale = max(abs(self.mu * self.nu), abs(self.sigma * self.gamma), 1e-300)
        if abs(self.determinant) <= 1e-14 * scale:
            raise DegenerateMicrostateError(
                f"degenerate microstate: mu*nu == sigma*gamma for {self}")

    @classmethod
    def canonical(cls, mu, nu, lam=0.0):
        """The ``sigma = gamma = 1`` chart."""
        return cls(1.0, nu, mu, 1.0, lam)

    @property
    def determinant(self):
        return self.mu * self.nu - self.sigma * self.gamma

    @property
    def is_canonical(self):
        return self.sigma == 1.0 and self.gamma == 1.0

    def normalized(self):
        """Rescale to ``sigma = gamma = 1`` when ``sigma == gamma > 0``.

        Other microstates have no canonical representative under a common
        rescaling and are returned unchanged.
        """
        if self.sigma == self.gamma and self.sigma > 0 and not self.is_canonical:
            s = self.sigma
            return Microstate(1.0, self.nu / s, self.mu / s, 1.0, self.lam)
        return self

    def rows(self, b: BasisPair):
        """``(N, D, N', D')`` on the basis grid."""
        n = self.sigma * b.theta1 + self.nu * b.theta2
        d = self.mu * b.theta1 + self.gamma * b.theta2
        dn = self.sigma * b.dtheta1 + self.nu * b.dtheta2
        dd = self.mu * b.dtheta1 + self.gamma * b.dtheta2
        return n, d, dn, dd

    def as_dict(self):
        return {"sigma": self.sigma, "nu": self.nu, "mu": self.mu,
                "gamma": self.gamma, "lambda": self.lam}


@dataclass(frozen=True)
class IntegralActionParams:
    """Scale ``D``, integration constant ``H`` and phase offset ``(b - a)/2``."""

    D: float = 1.0
    H: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.D == 0:
            raise ValueError("D must be nonzero")


@dataclass(frozen=True)
class ReducedActionField:
    grid: Grid
    energy: float
    microstate: Microstate
    S0: np.ndarray = field(repr=False)
    dS0: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    VB: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    basis: BasisPair = field(repr=False, compare=False)
    constants: Constants = Constants()
    # max |S0 unwrapped - (S0(x0) + integral of dS0)|
    integral_mismatch: float = 0.0

    @property
    def x(self):
        return self.grid.x

    @property
    def product(self):
        """``A^2 S0'``; constant across the grid."""
        return self.A**2 * self.dS0


def amplitude(b: BasisPair, ms: Microstate) -> np.ndarray:
    """``A = sqrt((sigma th1 + nu th2)^2 + (mu th1 + gamma th2)^2)``."""
    n, d, _, _ = ms.rows(b)
    return np.hypot(n, d)


def action_derivative(b: BasisPair, ms: Microstate, c: Constants = Constants()):
    """``S0' = hbar W (mu nu - sigma gamma) / A^2`` with W taken at x0."""
    return c.hbar * b.wronskian * ms.determinant / amplitude(b, ms) ** 2


def _cumulative_from(f, df, d3f, h, i0):
    """Integral of ``f`` from node ``i0``: trapezoid plus the first two
    Euler-Maclaurin endpoint corrections (sixth order)."""
    seg = (0.5 * h * (f[1:] + f[:-1]) - h**2 / 12.0 * (df[1:] - df[:-1])
           + h**4 / 720.0 * (d3f[1:] - d3f[:-1]))
    out = np.zeros_like(f)
    out[i0 + 1:] = np.cumsum(seg[i0:])
    out[:i0] = -np.cumsum(seg[:i0][::-1])[::-1]
    return out


def _p_derivatives(n, d, dn, dd, q, h):
    """``P = N^2 + D^2`` and its first three derivatives."""
    P = n * n + d * d
    dP = 2.0 * (n * dn + d * dd)
    d2P = 2.0 * (dn * dn + dd * dd) + 2.0 * q * P
    d3P = 4.0 * q * dP + 2.0 * derivative(q, h) * P
    return P, dP, d2P, d3P


def _unwrap_anchored(angle, i0):
    jumps = np.abs(np.diff(np.unwrap(angle)))
    if jumps.size and jumps.max() > 0.5 * np.pi:
        bad = int(np.argmax(jumps))
        raise BranchTrackingError(
            f"angle jumps by {jumps[bad]:.3f} rad between nodes {bad} and {bad + 1}; "
            "refine the grid")
    un = np.unwrap(angle)
    return un - (un[i0] - angle[i0])


def reduced_action(b: BasisPair, ms: Microstate, c: Constants | None = None
                   ) -> ReducedActionField:
    """Continuous reduced action and its companion fields.

    The angle is anchored to its principal value at ``x0`` so that actions
    built at neighbouring energies from the same initial data share a
    branch.
    """
    c = b.constants if c is None else c
    i0 = b.grid.index_of(b.x0)
    n, d, dn, dd = ms.rows(b)
    P, dP, d2P, d3P = _p_derivatives(n, d, dn, dd, b.q, b.grid.h)
    A = np.sqrt(P)
    angle = _unwrap_anchored(np.arctan2(n, d), i0)
    S0 = c.hbar * (angle + ms.lam)
    K = c.hbar * b.wronskian * ms.determinant
    dS0 = K / P
    d2S0 = -K * dP / P**2
    d4S0 = K * (-6.0 * dP**3 / P**4 + 6.0 * dP * d2P / P**3 - d3P / P**2)
    integral = S0[i0] + _cumulative_from(dS0, d2S0, d4S0, b.grid.h, i0)
    mismatch = float(np.abs(S0 - integral).max())
    if mismatch > 0.5 * np.pi * c.hbar:
        raise BranchTrackingError(
            f"unwrapped action disagrees with the integrated derivative by {mismatch:.3e}")
    VB = quantum_potential(A, b.grid.h, c)
    if b.potential is None:
        res = np.full_like(S0, np.nan)
    else:
        res = _residual(dS0, P, dP, d2P, b.potential(b.grid.x), b.energy, c)
    return ReducedActionField(b.grid, b.energy, ms, S0, dS0, A, VB, res, b, c, mismatch)


def basis_quantum_potential(b: BasisPair, ms: Microstate, c: Constants | None = None):
    """Quantum potential of the microstate amplitude without differencing.

    Uses ``A''/A = P''/(2P) - P'^2/(4P^2)`` with ``P = A^2``.
    """
    c = b.constants if c is None else c
    n, d, dn, dd = ms.rows(b)
    P = n * n + d * d
    dP = 2.0 * (n * dn + d * dd)
    d2P = 2.0 * (dn * dn + dd * dd) + 2.0 * b.q * P
    return -(c.hbar**2 / (2.0 * c.mass)) * (0.5 * d2P / P - 0.25 * (dP / P) ** 2)


def quantum_potential(A, h, c: Constants = Constants()):
    """``V_B = -(hbar^2 / 2m) A'' / A`` by fourth-order differences."""
    A = np.asarray(A, dtype=float)
    if np.any(A <= 0):
        raise ValueError("amplitude must be strictly positive")
    return -(c.hbar**2 / (2.0 * c.mass)) * derivative(A, h, order=2) / A


def qshje_lhs(dS0, d2S0, d3S0, V, E, c: Constants = Constants()):
    """Left side minus right side of the third-order QSHJE."""
    dS0 = np.asarray(dS0, dtype=float)
    quantum = 1.5 * (d2S0 / dS0) ** 2 - d3S0 / dS0
    return dS0**2 / (2.0 * c.mass) - c.hbar**2 / (4.0 * c.mass) * quantum + V - E


def qshje_residual(f: ReducedActionField, p: Potential, c: Constants | None = None):
    """QSHJE residual of ``f`` with S0'' and S0''' from the chain rule.

    With ``P = A^2``: ``S0'' = -S0' P'/P`` and
    ``S0''' = S0' (2 P'^2/P^2 - P''/P)`` where
    ``P'' = 2(N'^2 + D'^2) + 2 q P`` uses ``theta'' = q theta``.
    """
    c = f.constants if c is None else c
    n, d, dn, dd = f.microstate.rows(f.basis)
    V = p(f.x)
    q = 2.0 * c.mass / c.hbar**2 * (V - f.energy)
    P = n * n + d * d
    dP = 2.0 * (n * dn + d * dd)
    d2P = 2.0 * (dn * dn + dd * dd) + 2.0 * q * P
    return _residual(f.dS0, P, dP, d2P, V, f.energy, c)


def _residual(dS0, P, dP, d2P, V, E, c):
    d2S0 = -dS0 * dP / P
    d3S0 = dS0 * (2.0 * (dP / P) ** 2 - d2P / P)
    return qshje_lhs(dS0, d2S0, d3S0, V, E, c)


def action_from_integral(phi, grid: Grid, prm: IntegralActionParams = IntegralActionParams(),
                         interval=None, c: Constants = Constants(), anchor=None):
    """``S0 = hbar arctan(I/hbar + H) + hbar * offset`` on a node-free interval,
    with ``I`` the integral of ``(D/phi)^2`` from ``anchor``.

    Returns an array on ``grid`` holding NaN outside ``interval``.

    Raises
    ------
    ValueError
        If ``phi`` vanishes or changes sign on the interval; split the
        domain at the nodes of ``phi`` and call once per piece.
    """
    x = grid.x
    phi = np.asarray(phi, dtype=float)
    lo, hi = (x[0], x[-1]) if interval is None else interval
    inside = np.nonzero((x > lo) & (x < hi) if interval is not None else np.ones_like(x, bool))[0]
    if inside.size < 3:
        raise ValueError(f"interval {interval} holds fewer than 3 grid nodes")
    seg = phi[inside]
    if np.any(seg == 0) or np.any(np.signbit(seg[1:]) != np.signbit(seg[:-1])):
        raise ValueError("phi vanishes inside the interval; split it at the nodes of phi")
    xs = x[inside]
    if anchor is None:
        anchor = 0.5 * (xs[0] + xs[-1])
    i0 = int(np.argmin(np.abs(xs - anchor)))
    g = (prm.D / seg) ** 2
    fwd = cumulative_simpson(g[i0:], dx=grid.h, initial=0.0)
    bwd = cumulative_simpson(g[:i0 + 1][::-1], dx=grid.h, initial=0.0)[::-1]
    integral = np.concatenate([-bwd[:-1], fwd])
    out = np.full_like(x, np.nan)
    out[inside] = c.hbar * np.arctan(integral / c.hbar + prm.H) + c.hbar * prm.offset
    return out
