import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import dawsn

from qhjlab._fd import derivative
from qhjlab.schrodinger import (Constants, EigenvalueWarning, Grid, OverflowDiagnostic,
                                find_eigenvalues, free, harmonic, linear, load_potential_csv,
                                polynomial, solve_basis, square_well, superpose, tabulated,
                                wronskian_drift)


def adaptive_basis(p, E, x, x0=0.0, c=Constants()):
    """Independent oracle: DOP853 at tight tolerances from the same initial data."""
    q = lambda s: 2.0 * c.mass / c.hbar**2 * (p(np.array([s]))[0] - E)  # noqa: E731
    rhs = lambda s, y: [y[1], q(s) * y[0]]  # noqa: E731
    out = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        vals = np.empty_like(x)
        for side in (x >= x0, x <= x0):
            xs = x[side]
            order = np.argsort(np.abs(xs - x0))
            sol = solve_ivp(rhs, (x0, xs[order][-1]), y0, method="DOP853",
                            t_eval=xs[order], rtol=1e-12, atol=1e-14)
            vals[np.nonzero(side)[0][order]] = sol.y[0]
        out.append(vals)
    return out


class TestFreeBasis:
    def test_cos_sin(self, free_basis):
        x = free_basis.x
        assert np.abs(free_basis.theta1 - np.cos(x)).max() < 1e-8
        assert np.abs(free_basis.theta2 - np.sin(x)).max() < 1e-8
        assert np.abs(free_basis.dtheta1 + np.sin(x)).max() < 1e-8

    def test_wronskian_pointwise(self, free_basis):
        assert np.abs(free_basis.wronskian_profile() - 1.0).max() < 1e-8
        assert wronskian_drift(free_basis) < 1e-8


def test_harmonic_closed_forms(harmonic_basis):
    # theta2 = exp(-x^2/2) * int_0^x exp(s^2) ds = exp(x^2/2) * dawsn(x)
    x = harmonic_basis.x
    inner = np.abs(x) <= 3.0
    assert np.abs(harmonic_basis.theta1 - np.exp(-x**2 / 2))[inner].max() < 1e-6
    assert np.abs(harmonic_basis.theta2 - np.exp(x**2 / 2) * dawsn(x))[inner].max() < 1e-6


def test_analytic_harmonic_basis_has_no_drift(harmonic_basis):
    x = harmonic_basis.x
    t1 = np.exp(-x**2 / 2)
    t2 = np.exp(x**2 / 2) * dawsn(x)
    d1 = -x * t1
    # d/dx [e^{x^2/2} D(x)] = x e^{x^2/2} D + e^{x^2/2}(1 - 2x D)
    d2 = x * t2 + np.exp(x**2 / 2) * (1.0 - 2.0 * x * dawsn(x))
    w = t1 * d2 - t2 * d1
    assert np.abs(w - 1.0).max() < 1e-12


def test_corrupted_basis_drift_is_flagged(free_basis):
    from dataclasses import replace
    t2 = free_basis.theta2.copy()
    d2 = free_basis.dtheta2.copy()
    half = free_basis.x > 2.0
    t2[half] *= -1
    d2[half] *= -1
    bad = replace(free_basis, theta2=t2, dtheta2=d2)
    assert wronskian_drift(bad) > 1.0


@pytest.mark.parametrize("pot,E", [
    (free(), 0.5), (free(), 2.0), (harmonic(), 0.5), (harmonic(), 1.3),
    (linear(), 0.3), (polynomial([0.0, 0.0, -1.0, 0.0, 0.25]), -0.4),
])
def test_adaptive_oracle(pot, E):
    g = Grid.from_spacing(-3.0, 3.0, 1e-3)
    b = solve_basis(pot, E, g)
    ref1, ref2 = adaptive_basis(pot, E, g.x)
    for got, ref in ((b.theta1, ref1), (b.theta2, ref2)):
        assert np.abs(got - ref).max() <= 1e-6 * np.abs(ref).max()


@pytest.mark.parametrize("pot,E", [(free(), 0.5), (harmonic(), 0.7), (linear(), 0.3)])
def test_schrodinger_residual(pot, E):
    g = Grid.from_spacing(-4.0, 4.0, 1e-3)
    b = solve_basis(pot, E, g)
    V = pot(g.x)
    for th in (b.theta1, b.theta2):
        res = (-0.5 * derivative(th, g.h, order=2) + (V - E) * th)[2:-2]
        assert np.abs(res).max() <= 1e-5 * np.abs(th).max()


@pytest.mark.parametrize("x0", [-1.5, 0.0, 2.25])
def test_initial_data(x0):
    g = Grid.from_spacing(-4.0, 4.0, 1e-3)
    b = solve_basis(linear(0.7, 0.1), 0.9, g, x0=x0)
    i0 = g.index_of(x0)
    assert (b.theta1[i0], b.dtheta1[i0], b.theta2[i0], b.dtheta2[i0]) == (1.0, 0.0, 0.0, 1.0)


def test_nonnode_x0_rejected():
    with pytest.raises(ValueError, match="not a node"):
        solve_basis(free(), 0.5, Grid(-1.0, 1.0, 11), x0=0.05)


def test_overflow_diagnostic():
    with pytest.raises(OverflowDiagnostic, match="smaller domain"):
        solve_basis(harmonic(), 0.5, Grid.from_spacing(-30.0, 30.0, 1e-2))


def test_non_unit_constants():
    c = Constants(hbar=0.5, mass=2.0)
    g = Grid.from_spacing(-3.0, 3.0, 1e-3)
    b = solve_basis(free(), 0.5, g, c=c)
    k = np.sqrt(2 * c.mass * 0.5) / c.hbar
    assert np.abs(b.theta1 - np.cos(k * g.x)).max() < 1e-7
    assert np.abs(b.theta2 - np.sin(k * g.x) / k).max() < 1e-7


class TestSuperpose:
    def test_cos(self, free_basis):
        assert np.abs(superpose(free_basis, 1, 0) - np.cos(free_basis.x)).max() < 1e-8

    def test_plane_wave(self, free_basis):
        assert np.abs(superpose(free_basis, 1, 1j) - np.exp(1j * free_basis.x)).max() < 1e-8

    def test_linear(self, harmonic_basis):
        b = harmonic_basis
        assert np.array_equal(superpose(b, 2, 4), 2 * b.theta1 + 4 * b.theta2 + 0j)

    def test_zero_rejected(self, free_basis):
        with pytest.raises(ValueError):
            superpose(free_basis, 0, 0)


class TestEigenvalues:
    def test_harmonic(self):
        g = Grid.from_spacing(-8.0, 8.0, 1e-3)
        ev = find_eigenvalues(harmonic(), g, (0.0, 6.0), 5)
        assert np.abs(np.array(ev) - (np.arange(5) + 0.5)).max() < 1e-6

    def test_free_has_none(self):
        with pytest.warns(EigenvalueWarning):
            assert find_eigenvalues(square_well(0.0, 1.0), Grid(-2.0, 2.0, 401), (0.0, 5.0), 3) == []

    def test_partial_list_warns(self):
        g = Grid.from_spacing(-8.0, 8.0, 1e-3)
        with pytest.warns(EigenvalueWarning, match="found 2 of 4"):
            ev = find_eigenvalues(harmonic(), g, (0.0, 2.0), 4)
        assert len(ev) == 2

    def test_finite_well_transcendental(self):
        V0, L = 50.0, 1.0
        k = lambda E: np.sqrt(2 * E)  # noqa: E731
        kap = lambda E: np.sqrt(2 * (V0 - E))  # noqa: E731
        even = lambda E: k(E) * np.sin(k(E) * L / 2) - kap(E) * np.cos(k(E) * L / 2)  # noqa: E731
        odd = lambda E: k(E) * np.cos(k(E) * L / 2) + kap(E) * np.sin(k(E) * L / 2)  # noqa: E731
        ref = [brentq(even, 2.0, 5.0), brentq(odd, 10.0, 16.0), brentq(even, 25.0, 32.0)]
        ev = find_eigenvalues(square_well(V0, L), Grid.from_spacing(-2.0, 2.0, 1e-3), (0, 40), 3)
        assert np.allclose(ev, ref, rtol=0, atol=1e-7)

    def test_deep_well_limit(self):
        g = Grid.from_spacing(-0.52, 0.52, 2e-5)
        ev = np.array(find_eigenvalues(square_well(1e8, 1.0), g, (0.0, 60.0), 3))
        ref = np.array([1, 4, 9]) * np.pi**2 / 2
        assert np.abs(ev / ref - 1).max() < 1e-3

    def test_parity_alternates(self):
        from qhjlab.trajectories import bound_state_coefficients
        g = Grid.from_spacing(-8.0, 8.0, 1e-3)
        for n, E in enumerate(find_eigenvalues(harmonic(), g, (0.0, 4.0), 4)):
            cp = bound_state_coefficients(harmonic(), E, g)
            phi = superpose(solve_basis(harmonic(), E, Grid.from_spacing(-4, 4, 1e-3)), cp.C1, cp.C2).real
            mirror = phi[::-1] * (-1) ** n
            assert np.abs(phi - mirror).max() < 1e-6 * np.abs(phi).max()

    def test_bad_range(self):
        with pytest.raises(ValueError):
            find_eigenvalues(harmonic(), Grid(-4, 4, 801), (3.0, 1.0), 2)


class TestPotentials:
    def test_tabulated_matches_polynomial(self, tmp_path):
        xs = np.linspace(-4, 4, 801)
        path = tmp_path / "v.csv"
        path.write_text("x,V\n" + "".join(f"{a:.17g},{0.5 * a * a:.17g}\n" for a in xs))
        tab = load_potential_csv(path)
        g = Grid.from_spacing(-3.0, 3.0, 1e-3)
        b_tab = solve_basis(tab, 0.5, g)
        b_ref = solve_basis(harmonic(), 0.5, g)
        assert np.abs(b_tab.theta1 - b_ref.theta1).max() < 1e-6

    def test_tabulated_range_enforced(self):
        tab = tabulated([0, 1, 2, 3], [0, 1, 4, 9])
        with pytest.raises(ValueError, match="outside"):
            tab(np.array([-1.0]))

    def test_square_well_walls(self):
        v = square_well(10.0, 2.0)
        assert list(v(np.array([0.0, 1.0, 2.0]))) == [0.0, 5.0, 10.0]

    def test_bad_constants(self):
        with pytest.raises(ValueError):
            Constants(hbar=0.0)

    def test_polynomial_parity(self):
        assert polynomial([1, 0, 2]).even and not polynomial([1, 1]).even


def test_no_warnings_on_clean_solve(harmonic_grid):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_basis(harmonic(), 0.5, harmonic_grid)
