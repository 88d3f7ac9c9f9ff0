import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhjlab._fd import derivative
from qhjlab.reduced_action import (BranchTrackingError, DegenerateMicrostateError,
                                   IntegralActionParams, Microstate, action_derivative,
                                   action_from_integral, amplitude, basis_quantum_potential,
                                   qshje_lhs, qshje_residual, quantum_potential, reduced_action)
from qhjlab.schrodinger import Constants, Grid, free, harmonic, linear, solve_basis

FORWARD = Microstate(sigma=0.0, nu=1.0, mu=1.0, gamma=0.0)   # numerator sin, denominator cos
real = st.floats(-3.0, 3.0, allow_nan=False)


def microstates():
    return st.tuples(real, real, real, real, st.floats(-1, 1)).filter(
        lambda t: abs(t[2] * t[1] - t[0] * t[3]) > 0.2
        and np.linalg.cond([[t[0], t[1]], [t[2], t[3]]]) < 10
    ).map(lambda t: Microstate(*t))


class TestAmplitude:
    def test_free_unit(self, free_basis):
        assert np.abs(amplitude(free_basis, Microstate()) - 1).max() < 1e-8

    def test_specialization(self, harmonic_basis):
        b = harmonic_basis
        assert np.allclose(amplitude(b, Microstate()), np.hypot(b.theta1, b.theta2), rtol=1e-15)

    def test_coefficient_pattern(self, harmonic_basis):
        b = harmonic_basis
        want = np.sqrt(2 * b.theta1**2 + b.theta2**2 + 2 * b.theta1 * b.theta2)
        assert np.allclose(amplitude(b, Microstate.canonical(1.0, 0.0)), want, rtol=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateMicrostateError):
            Microstate.canonical(2.0, 0.5)


class TestActionDerivative:
    def test_free_backward(self, free_basis):
        assert np.abs(action_derivative(free_basis, Microstate()) + 1).max() < 1e-8

    def test_free_forward(self, free_basis):
        assert np.abs(action_derivative(free_basis, FORWARD) - 1).max() < 1e-8

    def test_product_minus_hbar(self, linear_basis):
        c = Constants(hbar=0.7)
        b = solve_basis(linear(), 0.3, linear_basis.grid, c=c)
        ms = Microstate.canonical(0.5, 0.0)   # mu nu - 1 = -1
        prod = amplitude(b, ms) ** 2 * action_derivative(b, ms, c)
        assert np.abs(prod + 0.7 * b.wronskian).max() < 1e-12


class TestReducedAction:
    def test_forward_branch(self, free_basis):
        f = reduced_action(free_basis, FORWARD)
        assert np.abs(f.S0 - f.x).max() < 1e-8

    def test_backward_branch(self, free_basis):
        f = reduced_action(free_basis, Microstate())
        # arctan(cot x) unwrapped: pi/2 - x, anchored to the principal value at 0
        assert np.abs(f.S0 - (np.pi / 2 - f.x)).max() < 1e-8

    def test_lambda_offset(self, harmonic_basis):
        a = reduced_action(harmonic_basis, Microstate.canonical(0.3, -1.0))
        b = reduced_action(harmonic_basis, Microstate.canonical(0.3, -1.0, lam=0.25))
        assert np.abs(b.S0 - a.S0 - 0.25).max() < 1e-15

    def test_integral_agreement(self, linear_basis):
        f = reduced_action(linear_basis, Microstate.canonical(-0.4, 1.7))
        assert f.integral_mismatch < 1e-7

    def test_branch_error_on_coarse_grid(self):
        b = solve_basis(free(), 200.0, Grid(-10.0, 10.0, 101))
        with pytest.raises(BranchTrackingError):
            reduced_action(b, Microstate.canonical(0.0, 30.0))


@given(microstates())
def test_field_invariants(ms):
    b = solve_basis(harmonic(), 0.5, Grid.from_spacing(-3.0, 3.0, 1e-3))
    c = b.constants
    f = reduced_action(b, ms)
    K = c.hbar * b.wronskian * ms.determinant
    assert f.A.min() > 0
    assert np.all(np.sign(f.dS0) == np.sign(K))
    assert np.abs(f.product - K).max() <= 1e-8 * abs(K)
    assert f.integral_mismatch <= 1e-7 * c.hbar
    assert np.abs(f.residual[2:-2]).max() <= 1e-5
    # A |S0'|^{1/2} is the square root of the constant product
    k = f.A * np.sqrt(np.abs(f.dS0))
    assert np.ptp(k) <= 1e-8 * k.mean()


@given(microstates(), st.floats(0.1, 10.0))
def test_common_rescaling(ms, s):
    b = solve_basis(linear(), 0.3, Grid.from_spacing(-2.0, 2.0, 1e-3))
    scaled = Microstate(s * ms.sigma, s * ms.nu, s * ms.mu, s * ms.gamma, ms.lam)
    assert np.abs(reduced_action(b, scaled).S0 - reduced_action(b, ms).S0).max() < 1e-12


def test_finite_difference_oracles(linear_basis):
    """Product and residual rebuilt from differenced S0; truncation-limited."""
    ms = Microstate.canonical(0.8, -0.6)
    f = reduced_action(linear_basis, ms)
    h = f.grid.h
    d1 = derivative(f.S0, h)
    d2 = derivative(f.S0, h, order=2)
    d3 = derivative(d2, h)
    K = linear_basis.wronskian * ms.determinant
    assert np.abs(f.A**2 * d1 - K)[4:-4].max() < 1e-4 * abs(K)
    res = qshje_lhs(d1, d2, d3, linear()(f.x), 0.3)
    # the differenced third derivative loses all relative precision once S0'
    # decays in the forbidden region (x > 0.3); compare the allowed side only
    allowed = (f.x > -4.9) & (f.x < 1.0)
    assert np.abs(res[allowed]).max() < 1e-3


class TestQuantumPotential:
    def test_flat(self):
        assert np.abs(quantum_potential(np.ones(50), 0.1)).max() < 1e-12

    def test_gaussian(self):
        x = np.linspace(-3, 3, 6001)
        vb = quantum_potential(np.exp(-x**2 / 2), x[1] - x[0])
        assert np.abs(vb - 0.5 * (1 - x**2)).max() < 1e-8

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            quantum_potential(np.array([1.0, 0.0, 1.0, 1.0, 1.0]), 0.1)

    def test_closed_form_matches_differences(self, harmonic_basis):
        ms = Microstate.canonical(0.4, 1.1)
        f = reduced_action(harmonic_basis, ms)
        assert np.abs(basis_quantum_potential(harmonic_basis, ms) - f.VB)[4:-4].max() < 1e-7

    def test_free_nonconstant_amplitude(self):
        b = solve_basis(free(), 2.0, Grid.from_spacing(-5.0, 5.0, 1e-3))
        f = reduced_action(b, Microstate())
        assert np.ptp(f.A) > 0.1
        assert np.abs(qshje_residual(f, free()))[2:-2].max() < 1e-5


class TestResidual:
    def test_forward_free(self, free_basis):
        f = reduced_action(free_basis, FORWARD)
        assert np.abs(qshje_residual(f, free())).max() < 1e-8

    def test_harmonic(self, harmonic_basis):
        f = reduced_action(harmonic_basis, Microstate.canonical(1.0, 0.0))
        assert np.abs(qshje_residual(f, harmonic())[2:-2]).max() < 1e-5

    def test_classical_limit(self):
        x = np.linspace(0, 1, 11)
        p = np.sqrt(2 * 0.5)
        for hbar in (1.0, 1e-4):
            lhs = qshje_lhs(np.full_like(x, p), 0 * x, 0 * x, 0 * x, 0.5, Constants(hbar=hbar))
            assert np.abs(lhs).max() < 1e-15
        # a curved profile: the quantum term is O(hbar^2)
        d1, d2, d3 = 1 + 0.1 * x, np.full_like(x, 0.1), 0 * x
        gap = [np.abs(qshje_lhs(d1, d2, d3, 0 * x, 0.5, Constants(hbar=h))
                      - (d1**2 / 2 - 0.5)).max() for h in (1e-1, 1e-2)]
        assert gap[1] / gap[0] == pytest.approx(1e-2, rel=1e-9)


class TestIntegralForm:
    def test_cosine(self):
        g = Grid.from_spacing(-np.pi / 2, np.pi / 2, 1e-3)
        eps = 0.05
        S0 = action_from_integral(np.cos(g.x), g, interval=(-np.pi / 2 + eps, np.pi / 2 - eps))
        ok = np.isfinite(S0)
        assert np.abs(S0[ok] - g.x[ok]).max() < 1e-7
        assert not ok[0] and not ok[-1]

    def test_matches_projective_microstate(self, harmonic_basis):
        b = harmonic_basis
        S0 = action_from_integral(b.theta1, b.grid, anchor=0.0)
        ref = reduced_action(b, FORWARD).S0
        gap = S0 - ref
        assert np.abs(gap - np.pi * np.round(gap[len(gap) // 2] / np.pi)).max() < 1e-5

    def test_H_selects_another_microstate(self, harmonic_basis):
        b = harmonic_basis
        H = 0.7
        S0 = action_from_integral(b.theta1, b.grid, IntegralActionParams(H=H), anchor=0.0)
        ref = reduced_action(b, Microstate(H, 1.0, 1.0, 0.0)).S0
        assert np.abs(S0 - ref).max() < 1e-5
        assert np.abs(S0 - action_from_integral(b.theta1, b.grid, anchor=0.0)).max() > 0.1

    def test_scale_D(self, harmonic_basis):
        b = harmonic_basis
        S0 = action_from_integral(b.theta1, b.grid, IntegralActionParams(D=2.0), anchor=0.0)
        ref = reduced_action(b, Microstate(0.0, 4.0, 1.0, 0.0)).S0
        assert np.abs(S0 - ref).max() < 1e-5

    def test_node_rejected(self, free_basis):
        with pytest.raises(ValueError, match="split"):
            action_from_integral(free_basis.theta1, free_basis.grid)

    def test_zero_scale_rejected(self):
        with pytest.raises(ValueError):
            IntegralActionParams(D=0.0)
