"""Trajectory time from the energy derivative of the reduced action, and
the velocity fields that go with it.

Energy derivatives are central differences at a fixed microstate. The basis
at the shifted energies keeps the initial values at ``x0`` but, by default,
rescales ``theta2`` by ``sqrt(|E' - V(x0)| / |E - V(x0)|)`` so that the
second solution keeps unit local wavenumber normalisation. Without this the
fixed microstate describes a different wave at every energy and even the
free particle acquires a stationary point of ``t(x)`` at ``x0``. Use
``basis_scaling="identity"`` to hold the raw initial data fixed instead.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from ._fd import derivative
from .microstates import (CoefficientPair, Decomposition, decomposition_from_coeffs_bound,
                          probability_current, reconstruct_wavefunction,
                          wavefunction_amplitude)
from .reduced_action import (BranchTrackingError, Microstate, ReducedActionField,
                             basis_quantum_potential, reduced_action)
from .schrodinger import Constants, Grid, Potential, _propagate, _Shooter, solve_basis

__all__ = [
    "Trajectory", "SingularPointWarning", "NotAnEigenvalueWarning",
    "DISTINCTNESS_FLOOR", "SCALINGS",
    "default_energy_step", "jacobi_time", "floyd_velocity", "bohm_velocity",
    "hydrodynamic_velocities", "microstate_family", "family_distances",
    "bound_state_coefficients", "eigenvalue_offset", "invert_trajectory", "family_wavefunctions",
]

SCALINGS = ("wavenumber", "identity")

# Smallest pairwise sup-distance between the t(x) curves of the harmonic
# ground-state family nu in {-2, 0, 2} accepted as "distinct". A pilot run on
# [-4, 4], h = 1e-3 measured 5.8; the floor sits two orders of magnitude
# below to leave room for other grids while staying far above the
# finite-difference noise (about 1e-9).
DISTINCTNESS_FLOOR = 1e-2

# size of 1 - dV_B/dE below which the Floyd velocity is reported singular
_SINGULAR = 1e-8
# nodes with |dt/dx| below this fraction of its maximum are left out of the
# duality metric
_CONDITIONING = 1e-2


class SingularPointWarning(RuntimeWarning):
    """``1 - dV_B/dE`` vanishes at some nodes; the Floyd velocity is undefined there."""


class NotAnEigenvalueWarning(UserWarning):
    """The energy of a microstate family is not a bound-state energy."""


@dataclass(frozen=True)
class Trajectory:
    """One microstate trajectory on a grid.

    ``t`` is the Jacobi time with ``t(x0) = 0``. ``consistency`` is the
    largest ``|v_floyd dt/dx - 1|`` over the ``checked`` nodes: interior
    nodes with a regular Floyd velocity and ``|dt/dx|`` at least 1% of its
    maximum. ``consistency_all`` drops the last condition. ``richardson``
    is the relative change of ``t`` when the energy step is halved.
    """

    microstate: Microstate
    energy: float
    x: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    v_floyd: np.ndarray = field(repr=False)
    v_bohm: np.ndarray = field(repr=False)
    v_plus: np.ndarray = field(repr=False)
    v_minus: np.ndarray = field(repr=False)
    dE_used: float
    richardson: float
    consistency: float
    singular_nodes: tuple = ()
    node_mask: np.ndarray = field(default=None, repr=False)
    turning_points: tuple = ()
    basis_scaling: str = "wavenumber"
    action: ReducedActionField = field(default=None, repr=False, compare=False)
    decomposition: Decomposition | None = field(default=None, repr=False, compare=False)
    checked: np.ndarray = field(default=None, repr=False)
    consistency_all: float = np.nan

    def metrics(self):
        return {
            "E": self.energy, "dE": self.dE_used,
            "microstate": self.microstate.as_dict(),
            "richardson": self.richardson, "consistency": self.consistency,
            "consistency_all_interior": self.consistency_all,
            "consistency_nodes": 0 if self.checked is None else int(self.checked.sum()),
            "singular_nodes": list(self.singular_nodes),
            "masked_nodes": [] if self.node_mask is None
            else np.nonzero(self.node_mask)[0].tolist(),
            "turning_points": list(self.turning_points),
            "basis_scaling": self.basis_scaling,
        }


def default_energy_step(E):
    return 1e-5 * max(abs(E), 1.0)


def _scaled_basis(p, E, E_ref, g, c, x0, scaling):
    b = solve_basis(p, E, g, x0, c)
    if scaling == "identity" or E == E_ref:
        return b
    v0 = float(p(b.x0))
    ref = abs(E_ref - v0)
    if ref <= 1e-12 * max(1.0, abs(E_ref)):
        return b
    r = np.sqrt(abs(E - v0) / ref)
    return replace(b, theta2=r * b.theta2, dtheta2=r * b.dtheta2, wronskian=r * b.wronskian)


def _check_scaling(p, E, x0, scaling):
    if scaling not in SCALINGS:
        raise ValueError(f"basis_scaling must be one of {SCALINGS}, got {scaling!r}")
    if scaling == "wavenumber" and abs(E - float(p(x0))) <= 1e-12 * max(1.0, abs(E)):
        warnings.warn("E equals V(x0); falling back to identity basis scaling",
                      RuntimeWarning, stacklevel=3)
        return "identity"
    return scaling


def _actions(p, ms, E, g, dE, c, x0, scaling):
    """Reduced actions at ``E - dE``, ``E`` and ``E + dE``."""
    return [reduced_action(_scaled_basis(p, e, E, g, c, x0, scaling), ms, c)
            for e in (E - dE, E, E + dE)]


def _time(lo: ReducedActionField, hi: ReducedActionField, dE):
    gap = np.abs(hi.S0 - lo.S0).max()
    if gap > 0.5 * np.pi * lo.constants.hbar:
        raise BranchTrackingError(
            f"actions at E -+ dE differ by {gap:.3e}; branches do not match, refine dE")
    return (hi.S0 - lo.S0) / (2.0 * dE)


def _vb_slope(p, ms, E, g, dE, c, x0, scaling):
    lo = _scaled_basis(p, E - dE, E, g, c, x0, scaling)
    hi = _scaled_basis(p, E + dE, E, g, c, x0, scaling)
    return (basis_quantum_potential(hi, ms, c) - basis_quantum_potential(lo, ms, c)) / (2.0 * dE)


def _floyd(dS0, slope, c):
    denom = 1.0 - slope
    bad = np.abs(denom) <= _SINGULAR
    v = np.where(bad, np.nan, dS0 / (c.mass * np.where(bad, 1.0, denom)))
    return v, tuple(int(i) for i in np.nonzero(bad)[0])


def _singular_report(x, bad):
    head = ", ".join(str(i) for i in bad[:10]) + (", ..." if len(bad) > 10 else "")
    return (f"1 - dV_B/dE vanishes at {len(bad)} nodes ({head}), x in "
            f"[{x[bad[0]]:.6g}, {x[bad[-1]]:.6g}]; v_floyd is NaN there")


def floyd_velocity(p: Potential, ms: Microstate, E: float, g: Grid, dE: float | None = None,
                   c: Constants = Constants(), x0: float = 0.0,
                   basis_scaling: str = "wavenumber") -> np.ndarray:
    """``S0' / (m (1 - dV_B/dE))`` at fixed microstate.

    ``V_B`` is evaluated in closed form from the basis, so only the energy
    derivative is a finite difference. Nodes where the denominator vanishes
    hold NaN and are listed in a ``SingularPointWarning``.
    """
    dE = default_energy_step(E) if dE is None else dE
    scaling = _check_scaling(p, E, x0, basis_scaling)
    f = reduced_action(solve_basis(p, E, g, x0, c), ms, c)
    v, bad = _floyd(f.dS0, _vb_slope(p, ms, E, g, dE, c, x0, scaling), c)
    if bad:
        warnings.warn(_singular_report(g.x, bad), SingularPointWarning, stacklevel=2)
    return v


def bohm_velocity(f: ReducedActionField, c: Constants | None = None) -> np.ndarray:
    """``S0' / m``."""
    c = f.constants if c is None else c
    return f.dS0 / c.mass


def hydrodynamic_velocities(d: Decomposition, f: ReducedActionField,
                            c: Constants | None = None):
    """Branch velocities ``j_+ / |phi|^2`` and ``j_- / |phi|^2``.

    Returns ``(v_plus, v_minus, mask)``; ``mask`` flags nodes of the wave
    function, where both velocities are set to NaN.
    """
    c = f.constants if c is None else c
    cur = probability_current(d, f.A, f.dS0, c)
    amp2 = wavefunction_amplitude(d, f) ** 2
    mask = amp2 <= 1e-24 * amp2.max()
    safe = np.where(mask, 1.0, amp2)
    v_plus = np.where(mask, np.nan, cur.plus / safe)
    v_minus = np.where(mask, np.nan, cur.minus / safe)
    return v_plus, v_minus, mask


def _default_decomposition(ms: Microstate) -> Decomposition:
    """Single forward branch, ``alpha = 1`` and ``beta = 0``."""
    return Decomposition(1.0, 0.0, ms)


def _turning_points(x, dtdx):
    s = np.sign(dtdx)
    idx = np.nonzero(s[1:] * s[:-1] < 0)[0]
    return tuple(float(0.5 * (x[i] + x[i + 1])) for i in idx)


def jacobi_time(p: Potential, ms: Microstate, E: float, g: Grid, dE: float | None = None,
                c: Constants = Constants(), x0: float = 0.0,
                decomposition: Decomposition | None = None,
                basis_scaling: str = "wavenumber") -> Trajectory:
    """Trajectory ``t(x) = dS0/dE`` by central differences at fixed microstate.

    Both actions are unwrapped from their principal values at ``x0``, so
    ``t(x0) = 0``. The run is repeated with ``dE/2`` and the relative change
    stored as ``richardson``. ``decomposition`` selects the branch weights
    for the hydrodynamic velocities (default: ``alpha = 1``, ``beta = 0``).

    Raises
    ------
    BranchTrackingError
        If the two shifted actions sit on different branches.
    """
    dE = default_energy_step(E) if dE is None else float(dE)
    if not dE > 0:
        raise ValueError(f"dE must be positive, got {dE}")
    scaling = _check_scaling(p, E, x0, basis_scaling)
    lo, mid, hi = _actions(p, ms, E, g, dE, c, x0, scaling)
    t = _time(lo, hi, dE)
    lo2, hi2 = (reduced_action(_scaled_basis(p, e, E, g, c, x0, scaling), ms, c)
                for e in (E - 0.5 * dE, E + 0.5 * dE))
    t_half = _time(lo2, hi2, 0.5 * dE)
    richardson = float(np.abs(t - t_half).max() / max(np.abs(t).max(), 1e-300))

    slope = (basis_quantum_potential(hi.basis, ms, c)
             - basis_quantum_potential(lo.basis, ms, c)) / (2.0 * dE)
    v_floyd, bad = _floyd(mid.dS0, slope, c)
    dtdx = derivative(t, g.h)
    prod = v_floyd * dtdx
    interior = np.zeros(g.n, bool)
    interior[2:-2] = True
    interior &= np.isfinite(prod)
    consistency_all = float(np.abs(prod[interior] - 1.0).max()) if interior.any() else np.nan
    # dt/dx carries absolute roundoff of order eps |S0| / (dE h); where it is
    # exponentially small (forbidden tails) the ratio test is meaningless
    interior &= np.abs(dtdx) >= _CONDITIONING * np.abs(dtdx[2:-2]).max()
    consistency = float(np.abs(prod[interior] - 1.0).max()) if interior.any() else np.nan

    d = _default_decomposition(ms) if decomposition is None else decomposition
    v_plus, v_minus, mask = hydrodynamic_velocities(d, mid, c)
    return Trajectory(ms, float(E), g.x, t, v_floyd, bohm_velocity(mid, c), v_plus, v_minus,
                      dE, richardson, consistency, bad, mask, _turning_points(g.x, dtdx),
                      scaling, mid, d, interior, consistency_all)


def bound_state_coefficients(p: Potential, E: float, g: Grid, x0: float = 0.0,
                             c: Constants = Constants()) -> CoefficientPair:
    """``(phi(x0), phi'(x0))`` of the bound state at ``E``, unit norm.

    The Dirichlet shots from the two grid ends agree at an eigenvalue of
    the grid problem. On a truncated domain ``E`` may miss that eigenvalue
    slightly, so the two directions are averaged; for symmetric problems
    this cancels the first-order error.
    """
    i0 = g.index_of(x0)
    sh = _Shooter(p, g, c)
    y, dy = _propagate(sh._mats(E, "full"), 0.0, 1.0)
    left = np.array([y[i0], dy[i0]])
    mats = sh._mats(E, "full")
    # the right shot runs the full chain backwards: invert each step
    m11, m12, m21, m22 = (m[::-1] for m in mats)
    det = m11 * m22 - m12 * m21
    back = (m22 / det, -m12 / det, -m21 / det, m11 / det)
    yr, dyr = _propagate(back, 0.0, -1.0)
    right = np.array([yr[::-1][i0], dyr[::-1][i0]])
    left /= np.hypot(*left)
    right /= np.hypot(*right)
    if left @ right < 0:
        right = -right
    v = left + right
    v /= np.hypot(*v)
    return CoefficientPair(v[0], v[1])


def eigenvalue_offset(p: Potential, E: float, g: Grid, c: Constants = Constants()) -> float:
    """Newton estimate of the distance from ``E`` to the nearest Dirichlet
    eigenvalue of ``p`` on ``g``."""
    sh = _Shooter(p, g, c)
    step = 1e-6 * max(1.0, abs(E))
    slope = (sh.mismatch(E + step) - sh.mismatch(E - step)) / (2.0 * step)
    return float(abs(sh.mismatch(E) / slope)) if slope != 0 else np.inf


def microstate_family(p: Potential, mu: float | None, nu_list, E: float, g: Grid,
                      c: Constants = Constants(), x0: float = 0.0, dE: float | None = None,
                      basis_scaling: str = "wavenumber", eig_tol: float = 1e-6) -> list:
    """Trajectories of one bound state for each hidden parameter in ``nu_list``.

    ``mu`` is the ratio ``C1/C2`` of the state at ``x0``; ``None`` takes it
    from the decaying solution at ``E`` and ``numpy.inf`` selects the
    projective chart (``C2 = 0``). A ``NotAnEigenvalueWarning`` is issued
    when ``E`` is farther than ``eig_tol * max(1, |E|)`` from a bound-state
    energy of the grid problem.
    """
    if eigenvalue_offset(p, E, g, c) > eig_tol * max(1.0, abs(E)):
        warnings.warn(f"E={E} is not a bound-state energy on this grid; members of the "
                      "family need not describe one physical state",
                      NotAnEigenvalueWarning, stacklevel=2)
    if mu is None:
        cp = bound_state_coefficients(p, E, g, x0, c)
    elif np.isinf(mu):
        cp = CoefficientPair(1.0, 0.0)
    else:
        cp = CoefficientPair(float(mu), 1.0)
    out = []
    for nu in nu_list:
        d = decomposition_from_coeffs_bound(cp, nu)
        out.append(jacobi_time(p, d.microstate, E, g, dE, c, x0, d, basis_scaling))
    return out


def family_distances(trajs) -> np.ndarray:
    """Matrix of ``max_x |t_i(x) - t_j(x)|``."""
    k = len(trajs)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = float(np.nanmax(np.abs(trajs[i].t - trajs[j].t)))
    return out


def family_wavefunctions(trajs):
    """Reconstructed wave functions of the family members."""
    return [reconstruct_wavefunction(tr.decomposition, tr.action) for tr in trajs]


def invert_trajectory(tr: Trajectory):
    """Piecewise inverses ``x(t)`` on the monotone stretches of ``t(x)``.

    Returns a list of ``(t_min, t_max, spline)``; the stretches are split at
    the sign changes of ``dt/dx``.
    """
    x, t = tr.x, tr.t
    s = np.sign(np.diff(t))
    cuts = np.nonzero(s[1:] * s[:-1] < 0)[0] + 1
    out = []
    for lo, hi in zip(np.r_[0, cuts], np.r_[cuts, len(x) - 1]):
        ts, xs = t[lo:hi + 1], x[lo:hi + 1]
        if len(ts) < 4:
            continue
        if ts[0] > ts[-1]:
            ts, xs = ts[::-1], xs[::-1]
        keep = np.r_[True, np.diff(ts) > 0]
        out.append((float(ts[0]), float(ts[-1]), CubicSpline(ts[keep], xs[keep])))
    return out
