"""Coefficient algebra between the superposition form

    phi = C1 theta1 + C2 theta2

and the two-exponential form

    phi = A (alpha e^{i S0/hbar} + beta e^{-i S0/hbar}),

together with phase/dilatation gauge factors, real-state classification and
probability currents.

Unbound decompositions are gauge fixed: a phase ``chi`` is chosen so that
the rotated pair satisfies ``Re C2' >= |Im C1'|`` with ``Re C2' > 0``. Every such ``chi`` gives a
valid decomposition, and different admissible choices give different
``(mu, nu, |alpha|, |beta|)``. The default rule picks ``chi = -arg C2``
(rotated ``C2`` real, hence ``nu = 0``) whenever that phase is admissible and
the centre of the admissible arc otherwise. Both choices rotate with the
input, so the recovered parameters do not depend on a global phase of
``(C1, C2)``. Pass ``chi=0`` for coefficients that are already in the
gauge-fixed frame.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .reduced_action import Microstate, ReducedActionField
from .schrodinger import Constants

__all__ = [
    "EPS_CLASS", "BOUND", "UNBOUND", "ClassificationError", "GaugeFixingError",
    "CoefficientPair", "Decomposition", "GaugeFactor", "Current",
    "coeffs_from_decomposition", "decomposition_from_coeffs_unbound",
    "decomposition_from_coeffs_bound", "decompose", "gauge_phase",
    "gauge_transform", "probability_current", "reconstruct_wavefunction",
    "wavefunction_amplitude", "action_from_wavefunction",
    "amplitude_from_wavefunction", "half_phase_lambda",
]

EPS_CLASS = 1e-10
BOUND = "bound-like real"
UNBOUND = "unbound-like complex"

_SCAN = 720
# relative size both feasibility functions must exceed on a scan sample;
# thinner arcs give ill-conditioned (mu, nu) and take the signed fallback
_ARC_MARGIN = 1e-9


class ClassificationError(ValueError):
    """The state belongs to the other (bound or unbound) decomposition path."""


class GaugeFixingError(ValueError):
    """No phase makes the rotated coefficients admissible."""


def _c(z):
    return complex(z)


@dataclass(frozen=True)
class CoefficientPair:
    C1: complex
    C2: complex

    def __post_init__(self):
        object.__setattr__(self, "C1", _c(self.C1))
        object.__setattr__(self, "C2", _c(self.C2))
        if self.C1 == 0 and self.C2 == 0:
            raise ValueError("coefficient pair (0, 0) describes no state")

    def rotated(self, chi):
        e = cmath.exp(1j * chi)
        return CoefficientPair(e * self.C1, e * self.C2)

    def normalized(self):
        """``(pair / s, s)`` with ``s`` the power of two nearest above the
        larger modulus; the division is exact and avoids under- and overflow
        in products of the coefficients."""
        s = math.ldexp(1.0, math.frexp(max(abs(self.C1), abs(self.C2)))[1])
        return CoefficientPair(self.C1 / s, self.C2 / s), s

    @property
    def is_bound_like(self):
        """``C1/C2`` real up to a common phase, relative tolerance ``EPS_CLASS``."""
        u, _ = self.normalized()
        cross = (u.C1 * u.C2.conjugate()).imag
        return abs(cross) <= EPS_CLASS * abs(u.C1) * abs(u.C2)


@dataclass(frozen=True)
class Decomposition:
    """``alpha``, ``beta`` and the microstate of one physical state.

    ``chi`` records the gauge phase used to fix the decomposition; it is
    informational, since ``alpha`` and ``beta`` already describe ``phi``
    itself.
    """

    alpha: complex
    beta: complex
    microstate: Microstate
    chi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _c(self.alpha))
        object.__setattr__(self, "beta", _c(self.beta))
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both vanish")

    @property
    def a(self):
        return cmath.phase(self.alpha)

    @property
    def b(self):
        return cmath.phase(self.beta)

    @property
    def eta(self):
        """``beta/alpha``, or None when ``alpha == 0``."""
        return None if self.alpha == 0 else self.beta / self.alpha

    @property
    def classification(self):
        ma, mb = abs(self.alpha), abs(self.beta)
        return BOUND if abs(ma - mb) <= EPS_CLASS * (ma + mb) else UNBOUND

    def coefficients(self):
        return coeffs_from_decomposition(self)

    def as_dict(self):
        cp = self.coefficients()
        pair = lambda z: [z.real, z.imag]  # noqa: E731
        ms = self.microstate
        return {
            "C1": pair(cp.C1), "C2": pair(cp.C2),
            "alpha": pair(self.alpha), "beta": pair(self.beta),
            "mu": ms.mu, "nu": ms.nu, "sigma": ms.sigma, "gamma": ms.gamma,
            "lambda": ms.lam, "classification": self.classification,
            "chi": self.chi,
        }


@dataclass(frozen=True)
class GaugeFactor:
    """``Omega = |Omega| e^{i omega}``: a dilatation followed by a rotation."""

    Omega: complex

    def __post_init__(self):
        object.__setattr__(self, "Omega", _c(self.Omega))
        if not abs(self.Omega) > 0:
            raise ValueError("gauge factor must be nonzero")

    @classmethod
    def polar(cls, modulus, angle):
        return cls(cmath.rect(modulus, angle))


@dataclass(frozen=True)
class Current:
    total: np.ndarray
    plus: np.ndarray
    minus: np.ndarray


def coeffs_from_decomposition(d: Decomposition) -> CoefficientPair:
    """Superposition coefficients of the state ``d`` describes.

    ``C1 = alpha (mu + i sigma) e^{i lam} + beta (mu - i sigma) e^{-i lam}``
    and the same for ``C2`` with ``(gamma, nu)`` in place of ``(mu, sigma)``.
    With ``sigma = gamma = 1`` this is the usual canonical form.
    """
    ms = d.microstate
    e = cmath.exp(1j * ms.lam)
    C1 = d.alpha * complex(ms.mu, ms.sigma) * e + d.beta * complex(ms.mu, -ms.sigma) / e
    C2 = d.alpha * complex(ms.gamma, ms.nu) * e + d.beta * complex(ms.gamma, -ms.nu) / e
    return CoefficientPair(C1, C2)


def _feasibility(cp: CoefficientPair):
    """Two real functions of ``chi``, both positive exactly on the admissible arc.

    ``Re C2' > |Im C1'|`` is the pair ``Re(e^{i chi}(C2 -+ i C1)) > 0``.
    """
    plus = cp.C2 - 1j * cp.C1
    minus = cp.C2 + 1j * cp.C1
    return (lambda chi: (cmath.exp(1j * chi) * plus).real,
            lambda chi: (cmath.exp(1j * chi) * minus).real)


def _admissible_arc(cp: CoefficientPair):
    """Endpoints ``(lo, hi)`` of the admissible phase arc, ``lo < hi``.

    Each condition holds on an open half circle, so their intersection is
    a single arc. It is located on a 720-point scan and its endpoints are
    refined by root finding. Finer scans are tried when the arc is
    narrower than the scan spacing; arcs narrower than about
    ``2 * _ARC_MARGIN`` radians are treated as empty.
    """
    f1, f2 = _feasibility(cp)
    plus, minus = cp.C2 - 1j * cp.C1, cp.C2 + 1j * cp.C1
    for n in (_SCAN, 10 * _SCAN, 100 * _SCAN):
        chis = np.linspace(-np.pi, np.pi, n, endpoint=False)
        rot = np.exp(1j * chis)
        g1 = (rot * plus).real
        g2 = (rot * minus).real
        ok = (g1 > _ARC_MARGIN * abs(plus)) & (g2 > _ARC_MARGIN * abs(minus))
        if ok.any():
            break
    else:
        raise GaugeFixingError(f"no admissible gauge phase for {cp}")
    if ok.all():  # only possible when both conditions coincide
        raise GaugeFixingError(f"degenerate feasibility region for {cp}")
    step = 2 * np.pi / n
    # rotate the scan so it starts on an infeasible point; the arc is then contiguous
    k0 = int(np.argmin(ok))
    order = (np.arange(n) + k0) % n
    idx = np.nonzero(ok[order])[0]
    first, last = idx[0], idx[-1]
    lo_in = chis[order[first]] + (step * n if order[first] < k0 else 0.0)
    hi_in = chis[order[last]] + (step * n if order[last] < k0 else 0.0)

    m1, m2 = _ARC_MARGIN * abs(plus), _ARC_MARGIN * abs(minus)

    def edge(inside, outside):
        f = lambda c: min(f1(c) - m1, f2(c) - m2)  # noqa: E731
        if f(outside) > 0 or f(inside) <= 0:  # numpy and cmath rounding disagree
            return inside
        return brentq(f, min(inside, outside), max(inside, outside), xtol=1e-15)

    return edge(lo_in, lo_in - step), edge(hi_in, hi_in + step)


def _admissible(rot: CoefficientPair, slack=1e-12):
    s = rot.C2.real
    return s > 0 and abs(rot.C1.imag) <= s * (1.0 + slack)


def gauge_phase(cp: CoefficientPair) -> float:
    """Default gauge phase for an unbound pair, in ``(-pi, pi]``.

    ``-arg C2`` when admissible, otherwise the centre of the admissible arc.
    A single-exponential state (``C2 = +-i C1``) admits a closed half circle
    whose centre is used. When ``C1/C2`` is imaginary with modulus above 1
    no phase is admissible; ``-arg C2`` is returned and the decomposition
    then has real ``alpha``, ``beta`` of opposite sign.
    """
    if cp.C2 != 0:
        pref = -cmath.phase(cp.C2)
        if _admissible(cp.rotated(pref)):
            return pref
    plus, minus = cp.C2 - 1j * cp.C1, cp.C2 + 1j * cp.C1
    if abs(minus) <= 1e-12 * abs(plus):
        return -cmath.phase(plus)
    if abs(plus) <= 1e-12 * abs(minus):
        return -cmath.phase(minus)
    try:
        lo, hi = _admissible_arc(cp)
    except GaugeFixingError:
        # thinner than the finest scan: intersect the two half circles directly
        c1, c2 = -cmath.phase(plus), -cmath.phase(minus)
        gap = math.remainder(c2 - c1, 2 * math.pi)
        if 0.5 * (math.pi - abs(gap)) > _ARC_MARGIN:
            return math.remainder(c1 + 0.5 * gap, 2 * math.pi)
        # C1/C2 = i t with |t| > 1: the two half circles only touch
        return -cmath.phase(cp.C2)
    return math.remainder(0.5 * (lo + hi), 2 * math.pi)


def decomposition_from_coeffs_unbound(cp: CoefficientPair, chi: float | None = None
                                      ) -> Decomposition:
    """Decomposition of an unbound-like state with ``lam = 0``.

    In the rotated frame ``(C1', C2') = e^{i chi}(C1, C2)``::

        |alpha| = (Re C2' + Im C1')/2,  |beta| = (Re C2' - Im C1')/2,
        mu = Re C1' / Re C2',            nu = Im C2' / Im C1'.

    The returned ``alpha`` and ``beta`` carry the phase ``e^{-i chi}`` so
    that they describe the unrotated state. If no phase is admissible (see
    ``gauge_phase``) the same formulas are applied at ``chi = -arg C2`` and
    one of the two values comes out negative.

    Raises
    ------
    ClassificationError
        If the state is bound-like; use ``decomposition_from_coeffs_bound``.
    GaugeFixingError
        If an explicit ``chi`` is not admissible.
    DegenerateMicrostateError
        If the recovered parameters satisfy ``mu nu = 1``.
    """
    if cp.is_bound_like:
        raise ClassificationError(
            "C1/C2 is real up to a common phase: bound-like state, use "
            "decomposition_from_coeffs_bound with a chosen nu")
    cp, scale = cp.normalized()
    pinned = chi is not None
    if not pinned:
        chi = gauge_phase(cp)
    r = cp.rotated(chi)
    s, dd = r.C2.real, r.C1.imag
    signed = not _admissible(r)
    if signed and pinned:
        raise GaugeFixingError(
            f"chi={chi} is not admissible: need Re C2' >= |Im C1'|, got {s} and {dd}")
    mu = r.C1.real / s
    nu = r.C2.imag / dd
    ms = Microstate.canonical(mu, nu)
    back = cmath.exp(-1j * chi)
    ma, mb = 0.5 * (s + dd), 0.5 * (s - dd)
    if not signed:
        # clip rounding on the single-exponential boundary
        ma, mb = max(0.0, ma), max(0.0, mb)
    return _rescaled(Decomposition(ma * back, mb * back, ms, float(chi)), scale)


def decomposition_from_coeffs_bound(cp: CoefficientPair, nu_free: float) -> Decomposition:
    """Decomposition of a real (up to phase) state with caller-chosen ``nu``.

    Away from ``C2 = 0`` this is the canonical microstate ``mu = C1/C2``,
    ``nu = nu_free`` with ``alpha = beta = C2/2``. When ``|C2|`` is
    negligible against ``|C1|`` the projective chart
    ``(sigma, nu, mu, gamma) = (nu_free, 1, 1, C2/C1)`` is used, with
    ``alpha = beta = C1/2``; the denominator row is then proportional to the
    state itself.
    """
    if not cp.is_bound_like:
        raise ClassificationError(
            "C1/C2 is not real up to a common phase: unbound-like state, use "
            "decomposition_from_coeffs_unbound")
    nu_free = float(nu_free)
    cp, scale = cp.normalized()
    if abs(cp.C2) > 1e-8 * abs(cp.C1):
        ratio = cp.C1 / cp.C2
        ms = Microstate.canonical(ratio.real, nu_free)
        half = 0.5 * cp.C2
    else:
        ms = Microstate(nu_free, 1.0, 1.0, (cp.C2 / cp.C1).real)
        half = 0.5 * cp.C1
    return _rescaled(Decomposition(half, half, ms), scale)


def decompose(cp: CoefficientPair, nu_free: float = 0.0) -> Decomposition:
    """Dispatch on the classification of ``cp``."""
    if cp.is_bound_like:
        return decomposition_from_coeffs_bound(cp, nu_free)
    return decomposition_from_coeffs_unbound(cp)


def _rescaled(d: Decomposition, s: float) -> Decomposition:
    return Decomposition(d.alpha * s, d.beta * s, d.microstate, d.chi)


def half_phase_lambda(d: Decomposition) -> Decomposition:
    """Equivalent decomposition in which ``alpha`` and ``beta`` share a phase.

    Shifting the microstate phase by ``delta`` while multiplying ``alpha`` by
    ``e^{-i delta}`` and ``beta`` by ``e^{i delta}`` leaves the state
    unchanged. With ``delta = -(b - a)/2`` both acquire the phase
    ``(a + b)/2``. A decomposition whose ``lam`` equals ``(b - a)/2`` is
    thereby mapped to ``lam = 0``, where ``phi`` up to that common phase is
    ``(|alpha| + |beta|) A cos(S0/hbar) + i (|alpha| - |beta|) A sin(S0/hbar)``.
    """
    ms = d.microstate
    shift = 0.5 * (d.b - d.a)
    common = cmath.exp(0.5j * (d.a + d.b))
    new = Microstate(ms.sigma, ms.nu, ms.mu, ms.gamma, ms.lam - shift)
    return Decomposition(abs(d.alpha) * common, abs(d.beta) * common, new, d.chi)


def gauge_transform(d: Decomposition, g: GaugeFactor | complex) -> Decomposition:
    """``alpha -> Omega alpha``, ``beta -> Omega beta``; microstate untouched."""
    if not isinstance(g, GaugeFactor):
        g = GaugeFactor(g)
    return Decomposition(g.Omega * d.alpha, g.Omega * d.beta, d.microstate, d.chi)


def probability_current(d: Decomposition, A, dS0, c: Constants = Constants()) -> Current:
    """``j = (|alpha|^2 - |beta|^2) A^2 S0' / m`` and its two branches."""
    flux = np.asarray(A) ** 2 * np.asarray(dS0) / c.mass
    plus = abs(d.alpha) ** 2 * flux
    minus = -abs(d.beta) ** 2 * flux
    return Current(plus + minus, plus, minus)


def reconstruct_wavefunction(d: Decomposition, f: ReducedActionField) -> np.ndarray:
    """``A (alpha e^{i S0/hbar} + beta e^{-i S0/hbar})`` on the field grid."""
    ph = np.exp(1j * f.S0 / f.constants.hbar)
    return f.A * (d.alpha * ph + d.beta * ph.conj())


def wavefunction_amplitude(d: Decomposition, f: ReducedActionField) -> np.ndarray:
    """``|phi|`` from ``A``, ``S0`` and the moduli and phases of alpha, beta."""
    ma, mb = abs(d.alpha), abs(d.beta)
    arg = 2.0 * f.S0 / f.constants.hbar + d.a - d.b
    inner = ma * ma + mb * mb + 2.0 * ma * mb * np.cos(arg)
    return f.A * np.sqrt(np.maximum(inner, 0.0))


def action_from_wavefunction(phi, d: Decomposition, c: Constants = Constants()):
    """Reduced action read back from an unbound wave function.

    The half-angle rotation ``e^{-i(a+b)/2}`` is defined up to sign, so the
    result is determined modulo ``pi hbar``.
    """
    ma, mb = abs(d.alpha), abs(d.beta)
    if abs(ma - mb) <= EPS_CLASS * (ma + mb):
        raise ClassificationError("the action cannot be read back from a real state")
    z = np.exp(-0.5j * (d.a + d.b)) * np.asarray(phi)
    ang = np.arctan2(z.imag / (ma - mb), z.real / (ma + mb))
    return c.hbar * (ang + 0.5 * (d.b - d.a))


def amplitude_from_wavefunction(phi, S0, d: Decomposition, c: Constants = Constants()):
    """``A = |phi| / sqrt(|alpha|^2 + |beta|^2 + 2|alpha||beta| cos(2 S0/hbar + a - b))``."""
    ma, mb = abs(d.alpha), abs(d.beta)
    inner = ma * ma + mb * mb + 2.0 * ma * mb * np.cos(2.0 * np.asarray(S0) / c.hbar + d.a - d.b)
    return np.abs(phi) / np.sqrt(inner)
