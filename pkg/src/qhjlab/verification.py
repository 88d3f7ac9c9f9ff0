"""Seeded property suite.

Each ``criterion_*`` function measures one acceptance property and returns
a :class:`CriterionResult` made of named sub-checks with their measured
value and tolerance. ``run_suite`` runs them all plus a few module
invariants; the seed is echoed in the report so any run can be repeated.
"""
from __future__ import annotations

import cmath
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .field3d import (Grid3, VectorField3, contract_to_current, continuity_check, curl,
                      plane_wave_potential, tensor_from_potential)
from .microstates import (CoefficientPair, Decomposition, action_from_wavefunction,
                          amplitude_from_wavefunction, coeffs_from_decomposition,
                          decomposition_from_coeffs_bound, decomposition_from_coeffs_unbound,
                          gauge_transform, probability_current, reconstruct_wavefunction,
                          wavefunction_amplitude)
from .reduced_action import Microstate, reduced_action
from .schrodinger import (Constants, Grid, find_eigenvalues, free, harmonic, linear,
                          solve_basis, superpose, wronskian_drift)
from .trajectories import (DISTINCTNESS_FLOOR, bound_state_coefficients, family_distances,
                           family_wavefunctions, hydrodynamic_velocities, jacobi_time,
                           microstate_family)

__all__ = [
    "DEFAULT_SEED", "DEFAULT_TOLERANCES", "Check", "CriterionResult", "Report",
    "random_microstate", "random_coefficients", "standard_cases", "run_suite",
    "run_criterion", "CRITERIA", "harmonic_family", "free_uniform_motion",
    "random_smooth_field",
]

DEFAULT_SEED = 20240917

DEFAULT_TOLERANCES = {
    "qshje_residual": 1e-5,       # times max(|E|, 1)
    "product_constancy": 1e-8,    # relative
    "integral_agreement": 1e-7,   # times hbar
    "reconstruction": 1e-9,       # relative
    "amplitude_formula": 1e-9,    # relative
    "gauge_action": 1e-12,        # times hbar
    "gauge_amplitude": 1e-12,     # times max A
    "phase_independence": 1e-8,
    "round_trip": 1e-9,
    "bound_equivalence": 1e-8,
    "distinctness_floor": DISTINCTNESS_FLOOR,
    "eigenvalues": 1e-6,
    "duality": 1e-4,
    "free_linearity": 1e-8,
    "free_slope": 1e-8,
    "div_curl": 1e-8,
    "contraction": 1e-12,
    "plane_wave": 1e-10,
    "bound_current": 1e-12,       # relative to the branch currents
    "wronskian_drift": 1e-7,
    "current_constancy": 1e-7,
    "hydrodynamic_sum": 1e-9,
    "richardson": 1e-4,
}

H = 1e-3


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    # "le": pass when measured <= tolerance; "gt": when measured > tolerance
    sense: str = "le"

    @property
    def passed(self):
        m = self.measured
        if not np.isfinite(m):
            return False
        return m <= self.tolerance if self.sense == "le" else m > self.tolerance

    def line(self):
        op = "<=" if self.sense == "le" else ">"
        return f"{self.name} = {self.measured:.3e} {op} {self.tolerance:.1e}"


@dataclass(frozen=True)
class CriterionResult:
    key: str
    title: str
    checks: tuple
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        body = "; ".join(c.line() for c in self.checks)
        return f"[{tag}] {self.key} {self.title}: {body}"

    def as_dict(self):
        return {"key": self.key, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "note": self.note,
                "checks": [{"name": c.name, "measured": c.measured, "tolerance": c.tolerance,
                            "sense": c.sense, "passed": c.passed} for c in self.checks]}


@dataclass(frozen=True)
class Report:
    seed: int
    results: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def lines(self):
        out = [f"seed = {self.seed}"]
        out += [r.line() for r in self.results]
        n_ok = sum(r.passed for r in self.results)
        out.append(f"{n_ok}/{len(self.results)} passed")
        return out

    def as_dict(self):
        return {"seed": self.seed, "passed": self.passed,
                "results": [r.as_dict() for r in self.results]}


# -- random draws -----------------------------------------------------------------

def random_microstate(rng, span=2.0, max_cond=10.0):
    """Canonical microstate with ``mu, nu ~ U(-span, span)``.

    Draws whose matrix ``[[1, nu], [mu, 1]]`` has condition number above
    ``max_cond`` are rejected; near-degenerate microstates have amplitudes
    that nearly vanish and are not representative.
    """
    while True:
        mu, nu = rng.uniform(-span, span, 2)
        if np.linalg.cond([[1.0, nu], [mu, 1.0]]) <= max_cond:
            return Microstate.canonical(float(mu), float(nu))


def random_coefficients(rng):
    """Complex pair with independent standard normal parts; unbound almost surely."""
    re = rng.normal(size=4)
    return CoefficientPair(complex(re[0], re[1]), complex(re[2], re[3]))


def standard_cases():
    """``(name, potential, grid)`` for the three reference potentials."""
    return (
        ("free", free(), Grid.from_spacing(-10.0, 10.0, H)),
        ("harmonic", harmonic(), Grid.from_spacing(-4.0, 4.0, H)),
        ("linear", linear(), Grid.from_spacing(-5.0, 5.0, H)),
    )


def _interior(a):
    return a[2:-2]


def _timed(fn):
    def wrapper(rng, tol):
        t0 = time.perf_counter()
        res = fn(rng, tol)
        return CriterionResult(res.key, res.title, res.checks,
                               time.perf_counter() - t0, res.note)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- criteria ------------------------------------------------------------------------

def _qshje_draws(rng, draws):
    worst_res = worst_prod = worst_int = 0.0
    for _, p, g in standard_cases():
        for _ in range(draws):
            E = float(rng.uniform(0.25, 4.0))
            ms = random_microstate(rng)
            b = solve_basis(p, E, g)
            f = reduced_action(b, ms)
            worst_res = max(worst_res, np.abs(_interior(f.residual)).max() / max(abs(E), 1.0))
            expect = f.constants.hbar * b.wronskian * ms.determinant
            worst_prod = max(worst_prod, np.abs(f.product - expect).max() / abs(expect))
            worst_int = max(worst_int, f.integral_mismatch / f.constants.hbar)
    return worst_res, worst_prod, worst_int


@_timed
def criterion_qshje(rng, tol, draws=20):
    """QSHJE residual for random microstates and energies in [0.25, 4] on the
    free, harmonic and linear potentials."""
    res, _, _ = _qshje_draws(rng, draws)
    return CriterionResult("1", "QSHJE satisfaction", (
        Check("max |residual| / max(|E|,1)", res, tol["qshje_residual"]),
    ), note=f"{3 * draws} microstates, h={H}")


@_timed
def criterion_closed_form(rng, tol, draws=20):
    """``A^2 S0'`` against ``hbar W(x) det`` and the unwrapped action against
    the integral of ``S0'``."""
    _, prod, integ = _qshje_draws(rng, draws)
    return CriterionResult("2", "Closed-form solution identity", (
        Check("A^2 S0' relative deviation", prod, tol["product_constancy"]),
        Check("unwrap vs integral / hbar", integ, tol["integral_agreement"]),
    ), note=f"{3 * draws} microstates, h={H}")


def _unbound_states(rng, n):
    cases = standard_cases()
    energies = {"free": 0.5, "harmonic": 1.3, "linear": 1.7}
    bases = {name: solve_basis(p, energies[name], g) for name, p, g in cases}
    out = []
    for k in range(n):
        name = cases[k % 3][0]
        cp = random_coefficients(rng)
        out.append((bases[name], cp, decomposition_from_coeffs_unbound(cp)))
    return out, bases


@_timed
def criterion_wave_forms(rng, tol, n=100):
    """Two-exponential form against the superposition, bound and unbound."""
    states, bases = _unbound_states(rng, n - n // 5)
    for k in range(n // 5):
        b = list(bases.values())[k % 3]
        c1, c2 = rng.normal(size=2)
        ph = cmath.exp(1j * rng.uniform(-np.pi, np.pi))
        cp = CoefficientPair(ph * c1, ph * c2)
        states.append((b, cp, decomposition_from_coeffs_bound(cp, rng.uniform(-3, 3))))
    rec = amp = 0.0
    for b, cp, d in states:
        f = reduced_action(b, d.microstate)
        phi = reconstruct_wavefunction(d, f)
        sup = superpose(b, cp.C1, cp.C2)
        scale = np.abs(sup).max()
        rec = max(rec, np.abs(phi - sup).max() / scale)
        amp = max(amp, np.abs(np.abs(sup) - wavefunction_amplitude(d, f)).max() / scale)
    return CriterionResult("3", "Wave-form unification", (
        Check("reconstruction vs superposition", rec, tol["reconstruction"]),
        Check("amplitude formula", amp, tol["amplitude_formula"]),
    ), note=f"{n} states, {n // 5} of them real")


def _mod(x, period):
    return np.abs(np.remainder(x + 0.5 * period, period) - 0.5 * period)


@_timed
def criterion_gauge(rng, tol, n=100, phases=20):
    """Action and amplitude read back from the transformed wave function,
    and global-phase independence of the recovered microstate."""
    states, _ = _unbound_states(rng, n)
    ds = da = dp = 0.0
    for b, cp, d in states:
        f = reduced_action(b, d.microstate)
        hbar = f.constants.hbar
        omega = complex(*rng.normal(size=2))
        dh = gauge_transform(d, omega)
        phi = omega * superpose(b, cp.C1, cp.C2)
        s_hat = action_from_wavefunction(phi, dh, f.constants)
        # the half-angle rotation fixes the action modulo pi hbar
        ds = max(ds, _mod(s_hat - f.S0, np.pi * hbar).max() / hbar)
        a_hat = amplitude_from_wavefunction(phi, s_hat, dh, f.constants)
        da = max(da, np.abs(a_hat - f.A).max() / f.A.max())
        ms = d.microstate
        for chi in rng.uniform(-np.pi, np.pi, phases):
            m2 = decomposition_from_coeffs_unbound(cp.rotated(chi)).microstate
            dp = max(dp, abs(m2.mu - ms.mu), abs(m2.nu - ms.nu))
    return CriterionResult("4", "Gauge invariance", (
        Check("|S0_hat - S0| / hbar", ds, tol["gauge_action"]),
        Check("|A_hat - A| / max A", da, tol["gauge_amplitude"]),
        Check("(mu, nu) phase dependence", dp, tol["phase_independence"]),
    ), note=f"{n} (state, Omega) pairs, {phases} phases each")


@_timed
def criterion_round_trip(rng, tol, n=100):
    """Draw (mu, nu, |alpha|, |beta|), map to coefficients and invert with
    the default gauge rule."""
    err = err_fixed = 0.0
    for _ in range(n):
        ms = random_microstate(rng)
        while True:
            a, bb = rng.uniform(0.1, 2.0, 2)
            if abs(a - bb) > 0.05:
                break
        d = Decomposition(a, bb, ms)
        cp = coeffs_from_decomposition(d)
        back = decomposition_from_coeffs_unbound(cp)
        m2 = back.microstate
        err = max(err, abs(m2.mu - ms.mu), abs(m2.nu - ms.nu),
                  abs(abs(back.alpha) - a), abs(abs(back.beta) - bb))
        fixed = decomposition_from_coeffs_unbound(cp, chi=0.0)
        m3 = fixed.microstate
        err_fixed = max(err_fixed, abs(m3.mu - ms.mu), abs(m3.nu - ms.nu),
                        abs(abs(fixed.alpha) - a), abs(abs(fixed.beta) - bb))
    return CriterionResult("5", "Unbound round-trip", (
        Check("parameter recovery, default gauge", err, tol["round_trip"]),
    ), note=(f"{n} draws; with the gauge phase pinned to the draw frame (chi=0) the "
             f"recovery error is {err_fixed:.1e}; the default gauge is chosen for "
             "phase independence (criterion 4), and no rule can satisfy both"))


def harmonic_family():
    g = Grid.from_spacing(-4.0, 4.0, H)
    return microstate_family(harmonic(), None, [-2.0, 0.0, 2.0], 0.5, g)


def _equivalence(phis):
    ref = phis[0]
    worst = 0.0
    for ph in phis[1:]:
        c = np.vdot(ref, ph) / np.vdot(ref, ref)
        dens = np.abs(ph) ** 2
        worst = max(worst, np.abs(dens - np.abs(c * ref) ** 2).max() / dens.max(),
                    np.abs(ph - c * ref).max() / np.abs(ph).max())
    return worst


@_timed
def criterion_bound_family(rng, tol):
    """Harmonic ground state with nu in {-2, 0, 2}."""
    fam = harmonic_family()
    eq = _equivalence(family_wavefunctions(fam))
    dist = family_distances(fam)
    min_dist = float(dist[np.triu_indices(len(fam), 1)].min())
    res = max(np.abs(_interior(tr.action.residual)).max() for tr in fam) / 1.0
    return CriterionResult("6", "Bound microstates", (
        Check("|phi|^2 deviation after rescaling", eq, tol["bound_equivalence"]),
        Check("min pairwise sup |t_i - t_j|", min_dist, tol["distinctness_floor"], "gt"),
        Check("max |residual| / max(|E|,1)", res, tol["qshje_residual"]),
    ), note="C1/C2 from the decaying solution at x0=0 (projective chart)")


@_timed
def criterion_eigenvalues(rng, tol):
    """Harmonic spectrum n + 1/2 for n = 0..5."""
    g = Grid.from_spacing(-8.0, 8.0, H)
    ev = find_eigenvalues(harmonic(), g, (0.0, 6.0), 6)
    exact = np.arange(6) + 0.5
    err = float(np.abs(np.array(ev) - exact).max()) if len(ev) == 6 else np.inf
    return CriterionResult("7", "Eigenvalues", (
        Check("max |E_n - (n + 1/2)|", err, tol["eigenvalues"]),
    ))


def free_uniform_motion(E=0.5, c=Constants()):
    """Jacobi time of the ``mu = nu = 0`` free microstate with a straight-line fit."""
    g = Grid.from_spacing(-10.0, 10.0, H)
    tr = jacobi_time(free(), Microstate.canonical(0.0, 0.0), E, g, c=c)
    X = np.vstack([tr.x, np.ones_like(tr.x)]).T
    coef, *_ = np.linalg.lstsq(X, tr.t, rcond=None)
    resid = float(np.abs(X @ coef - tr.t).max())
    sign = np.sign(np.median(tr.action.dS0))
    expected = sign * np.sqrt(c.mass / (2.0 * E))
    return tr, coef[0], expected, resid


@_timed
def criterion_trajectories(rng, tol):
    """Floyd velocity against the Jacobi time, and free uniform motion."""
    tr, slope, expected, resid = free_uniform_motion()
    duality = tr.consistency
    rich = tr.richardson
    runs = [("free", free(), Grid.from_spacing(-10.0, 10.0, H), 1.7, random_microstate(rng))]
    gh = Grid.from_spacing(-4.0, 4.0, H)
    for E in (0.5, 1.5):
        for _ in range(3):
            runs.append(("harmonic", harmonic(), gh, E, random_microstate(rng)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _, p, g, E, ms in runs:
            t = jacobi_time(p, ms, E, g)
            duality = max(duality, t.consistency)
            rich = max(rich, t.richardson)
    return CriterionResult("8", "Trajectory consistency", (
        Check("max |v_floyd dt/dx - 1|", duality, tol["duality"]),
        Check("free t(x) linear-fit residual", resid, tol["free_linearity"]),
        Check("free slope - sign(S0') sqrt(m/2E)", abs(slope - expected), tol["free_slope"]),
        Check("dE vs dE/2 relative change", rich, tol["richardson"]),
    ), note=("slope sign: d/dE of sign(S0') sqrt(2mE) x is +sign(S0') sqrt(m/2E); "
             "duality checked where |dt/dx| >= 1% of its maximum"))


def random_smooth_field(rng, grid: Grid3):
    x, y, z = grid.mesh()
    comps = []
    for _ in range(3):
        acc = np.zeros(grid.n)
        for _ in range(3):
            a, kx, ky, kz, ph = rng.normal(size=5)
            acc = acc + a * np.sin(kx * x + ky * y + kz * z + ph)
        a, b = rng.normal(size=2)
        comps.append(acc + a * x * y * z + b * (x * x - y * z))
    return VectorField3(grid, tuple(comps))


@_timed
def criterion_field3d(rng, tol, n_fields=10):
    g = Grid3.cube(1.0, 32)
    dc = con = 0.0
    for _ in range(n_fields):
        B = random_smooth_field(rng, g)
        J = curl(B)
        dc = max(dc, np.abs(continuity_check(J)).max())
        con = max(con, contract_to_current(tensor_from_potential(B)).max_abs_diff(J))
    pw = 0.0
    for k, A0 in (((0.0, 0.0, 1.0), 1.0), ((0.3, -1.1, 0.7), 2.0)):
        B = plane_wave_potential(k, A0, g)
        J = curl(B)
        target = VectorField3(g, tuple(A0**2 * kk for kk in k))
        pw = max(pw, J.max_abs_diff(target), np.abs(continuity_check(J)).max())
    return CriterionResult("9", "3D identities", (
        Check("max |div curl B|", dc, tol["div_curl"]),
        Check("contraction vs curl", con, tol["contraction"]),
        Check("plane-wave curl and divergence", pw, tol["plane_wave"]),
    ), note=f"{n_fields} random fields on 32^3")


@_timed
def criterion_real_states(rng, tol):
    """Zero current from |alpha| = |beta| with a nowhere-vanishing S0'."""
    g = Grid.from_spacing(-4.0, 4.0, H)
    cases = []
    for E in (0.5, 1.5):
        cp = bound_state_coefficients(harmonic(), E, g)
        b = solve_basis(harmonic(), E, g)
        for nu in (-2.0, 0.0, 2.0, float(rng.uniform(-3, 3))):
            d = decomposition_from_coeffs_bound(cp, nu)
            cases.append((d, reduced_action(b, d.microstate)))
    jrel = 0.0
    min_ds = np.inf
    for d, f in cases:
        cur = probability_current(d, f.A, f.dS0, f.constants)
        jrel = max(jrel, np.abs(cur.total).max() / np.abs(cur.plus).max())
        ds = np.abs(f.dS0)
        # sign-definite and nowhere zero
        same_sign = np.all(np.sign(f.dS0) == np.sign(f.dS0[0]))
        min_ds = min(min_ds, ds.min() / ds.max() if same_sign else 0.0)
    return CriterionResult("10", "Real-state conjugate momentum", (
        Check("max |j| / max |j_plus|", jrel, tol["bound_current"]),
        Check("min |S0'| / max |S0'| (must be > 0)", min_ds, 0.0, "gt"),
    ), note="harmonic n=0 and n=1, four nu values each")


@_timed
def module_invariants(rng, tol):
    """Wronskian drift, 1D current constancy and the hydrodynamic split."""
    drift = cur = hyd = 0.0
    for _, p, g in standard_cases():
        b = solve_basis(p, 1.1, g)
        drift = max(drift, wronskian_drift(b))
        for _ in range(3):
            cp = random_coefficients(rng)
            d = decomposition_from_coeffs_unbound(cp)
            f = reduced_action(b, d.microstate)
            j = probability_current(d, f.A, f.dS0, f.constants).total
            cur = max(cur, np.ptp(j) / abs(j.mean()))
            vp, vm, mask = hydrodynamic_velocities(d, f)
            amp2 = wavefunction_amplitude(d, f) ** 2
            ok = ~mask
            hyd = max(hyd, np.abs(amp2[ok] * (vp[ok] + vm[ok]) - j[ok]).max() / np.abs(j).max())
    return CriterionResult("M", "Module invariants", (
        Check("Wronskian drift", drift, tol["wronskian_drift"]),
        Check("1D current spread / |j|", cur, tol["current_constancy"]),
        Check("|amp^2 (v+ + v-) - j| / |j|", hyd, tol["hydrodynamic_sum"]),
    ))


CRITERIA = {
    "1": criterion_qshje,
    "2": criterion_closed_form,
    "3": criterion_wave_forms,
    "4": criterion_gauge,
    "5": criterion_round_trip,
    "6": criterion_bound_family,
    "7": criterion_eigenvalues,
    "8": criterion_trajectories,
    "9": criterion_field3d,
    "10": criterion_real_states,
    "M": module_invariants,
}


def run_criterion(key, seed=DEFAULT_SEED, tolerances=None) -> CriterionResult:
    """Run one entry of ``CRITERIA`` with its own reproducible generator."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    index = list(CRITERIA).index(key)
    rng = np.random.default_rng([seed, index])
    return CRITERIA[key](rng, tol)


def run_suite(seed=DEFAULT_SEED, tolerances=None, keys=None, progress=None) -> Report:
    """Run the selected criteria (all by default) and collect a Report.

    ``progress`` is called with each result as soon as it is available.
    """
    results = []
    for key in (keys or CRITERIA):
        r = run_criterion(key, seed, tolerances)
        if progress is not None:
            progress(r)
        results.append(r)
    return Report(seed, tuple(results))
