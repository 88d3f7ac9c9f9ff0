import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhjlab import trajectories as trj
from qhjlab.microstates import Decomposition, probability_current, wavefunction_amplitude
from qhjlab.reduced_action import BranchTrackingError, Microstate
from qhjlab.schrodinger import Constants, Grid, find_eigenvalues, free, harmonic, linear
from qhjlab.trajectories import (DISTINCTNESS_FLOOR, NotAnEigenvalueWarning, SingularPointWarning,
                                 bohm_velocity, family_distances, family_wavefunctions,
                                 floyd_velocity, invert_trajectory, jacobi_time,
                                 microstate_family)

FREE_GRID = Grid.from_spacing(-10.0, 10.0, 1e-3)
FORWARD = Microstate(0.0, 1.0, 1.0, 0.0)
HARMONIC_GRID = Grid.from_spacing(-4.0, 4.0, 1e-3)


@pytest.fixture(scope="module")
def free_traj():
    return jacobi_time(free(), Microstate(), 0.5, FREE_GRID)


@pytest.fixture(scope="module")
def family():
    with warnings.catch_warnings():
        warnings.simplefilter("error", NotAnEigenvalueWarning)
        return microstate_family(harmonic(), None, [-2.0, 0.0, 2.0], 0.5, HARMONIC_GRID)


class TestFreeParticle:
    def test_floyd_velocity_constant(self, free_traj):
        assert np.abs(free_traj.v_floyd + 1.0).max() < 1e-8

    def test_time_is_linear(self, free_traj):
        x, t = free_traj.x, free_traj.t
        slope, icpt = np.polyfit(x, t, 1)
        assert np.abs(t - (slope * x + icpt)).max() < 1e-8
        # t = -x / |v| for the backward branch, |v| = sqrt(2E/m) = 1
        assert slope == pytest.approx(-1.0, abs=1e-8)

    def test_origin(self, free_traj):
        assert free_traj.t[FREE_GRID.index_of(0.0)] == 0.0

    def test_richardson(self, free_traj):
        assert free_traj.richardson < 1e-6

    def test_slope_tracks_mass(self):
        c = Constants(mass=4.0)
        # plane wave e^{ikx} with k = sqrt(2 m E) = 4 needs nu = k in the sine slot
        tr = jacobi_time(free(), Microstate(0.0, 4.0, 1.0, 0.0), 2.0, Grid.from_spacing(-3, 3, 1e-3), c=c)
        # dt/dx = m / p = sqrt(m / 2E)
        assert np.polyfit(tr.x, tr.t, 1)[0] == pytest.approx(np.sqrt(4.0 / (2 * 2.0)), rel=1e-7)

    def test_bohm_equals_floyd(self, free_traj):
        assert np.abs(free_traj.v_bohm - free_traj.v_floyd).max() < 1e-8
        assert np.array_equal(bohm_velocity(free_traj.action), free_traj.action.dS0)

    def test_floyd_velocity_function(self, free_traj):
        v = floyd_velocity(free(), Microstate(), 0.5, FREE_GRID)
        assert np.abs(v - free_traj.v_floyd).max() < 1e-12


class TestConsistency:
    @pytest.mark.parametrize("pot, E, ms", [
        (harmonic(), 0.5, Microstate.canonical(0.3, -1.0)),
        (harmonic(), 1.3, Microstate.canonical(-0.5, 0.8)),
        (linear(), 0.3, Microstate.canonical(0.8, -0.6)),
    ])
    def test_duality(self, pot, E, ms):
        tr = jacobi_time(pot, ms, E, Grid.from_spacing(-4.0, 4.0, 1e-3))
        assert tr.consistency <= 1e-4
        assert tr.checked.sum() > 0.5 * tr.x.size
        assert tr.richardson <= 1e-4

    def test_identity_scaling_shifts_time(self):
        ms = Microstate.canonical(0.3, -1.0)
        a = jacobi_time(harmonic(), ms, 0.5, HARMONIC_GRID)
        b = jacobi_time(harmonic(), ms, 0.5, HARMONIC_GRID, basis_scaling="identity")
        assert b.basis_scaling == "identity"
        assert np.abs(a.t - b.t).max() > 1e-3
        assert b.consistency <= 1e-4


class TestHydrodynamic:
    ms = Microstate.canonical(0.3, -1.0)

    def test_single_branch(self):
        tr = jacobi_time(harmonic(), self.ms, 0.5, HARMONIC_GRID)
        assert np.nanmax(np.abs(tr.v_plus - tr.v_bohm)) < 1e-12
        assert np.nanmax(np.abs(tr.v_minus)) == 0.0

    def test_real_state_branches_cancel(self):
        d = Decomposition(0.7, 0.7, self.ms)
        tr = jacobi_time(harmonic(), self.ms, 0.5, HARMONIC_GRID, decomposition=d)
        ok = ~tr.node_mask
        assert np.abs(tr.v_plus[ok] + tr.v_minus[ok]).max() <= 1e-12 * np.abs(tr.v_plus[ok]).max()

    def test_sum_matches_current(self):
        d = Decomposition(1.2, 0.5j, self.ms)
        tr = jacobi_time(harmonic(), self.ms, 0.5, HARMONIC_GRID, decomposition=d)
        cur = probability_current(d, tr.action.A, tr.action.dS0)
        amp2 = wavefunction_amplitude(d, tr.action) ** 2
        assert np.abs(amp2 * (tr.v_plus + tr.v_minus) - cur.total).max() <= 1e-9 * np.abs(cur.total).max()


class TestFamily:
    def test_distinct_curves(self, family):
        dist = family_distances(family)
        off = dist[np.triu_indices(3, 1)]
        assert off.min() > DISTINCTNESS_FLOOR
        assert np.allclose(dist, dist.T) and np.all(np.diag(dist) == 0)

    def test_same_density(self, family):
        dens = [np.abs(p) ** 2 for p in family_wavefunctions(family)]
        for d in dens[1:]:
            s = (d @ dens[0]) / (d @ d)
            assert np.abs(s * d - dens[0]).max() <= 1e-8 * dens[0].max()

    def test_each_member_solves_the_equation(self, family):
        for tr in family:
            assert np.abs(tr.action.residual[2:-2]).max() <= 1e-5

    def test_projective_chart(self):
        fam = microstate_family(harmonic(), np.inf, [0.0, 1.0], 0.5, HARMONIC_GRID)
        assert family_distances(fam)[0, 1] > DISTINCTNESS_FLOOR

    def test_not_an_eigenvalue(self):
        with pytest.warns(NotAnEigenvalueWarning):
            microstate_family(harmonic(), 0.0, [0.0], 0.7, HARMONIC_GRID)

    def test_eigenvalue_from_solver_is_accepted(self):
        E = find_eigenvalues(harmonic(), HARMONIC_GRID, (0.0, 2.0), 1)[0]
        with warnings.catch_warnings():
            warnings.simplefilter("error", NotAnEigenvalueWarning)
            microstate_family(harmonic(), None, [0.0], E, HARMONIC_GRID)


class TestDiagnostics:
    def test_singular_nodes_are_nan(self, monkeypatch):
        real = trj._vb_slope

        def slope(*args):
            s = real(*args)
            s[100:103] = 1.0
            return s

        monkeypatch.setattr(trj, "_vb_slope", slope)
        g = Grid.from_spacing(-2.0, 2.0, 1e-2)
        with pytest.warns(SingularPointWarning, match="3 nodes"):
            v = floyd_velocity(harmonic(), Microstate.canonical(0.3, -1.0), 0.5, g)
        assert np.isnan(v[100:103]).all() and np.isfinite(np.delete(v, [100, 101, 102])).all()

    def test_scaling_fallback(self):
        with pytest.warns(RuntimeWarning, match="identity"):
            tr = jacobi_time(free(), Microstate.canonical(0.0, 1.0), 0.0, Grid.from_spacing(-3, 3, 1e-3))
        assert tr.basis_scaling == "identity"

    def test_branch_mismatch(self):
        with pytest.raises(BranchTrackingError, match="refine dE"):
            jacobi_time(free(), Microstate(), 0.5, FREE_GRID, dE=0.4)

    @pytest.mark.parametrize("kw", [{"dE": 0.0}, {"dE": -1e-5}, {"basis_scaling": "other"}])
    def test_bad_arguments(self, kw):
        with pytest.raises(ValueError):
            jacobi_time(free(), Microstate(), 0.5, Grid.from_spacing(-1, 1, 1e-2), **kw)

    def test_metrics(self, free_traj):
        m = free_traj.metrics()
        assert {"E", "dE", "microstate", "richardson", "consistency", "singular_nodes",
                "turning_points", "basis_scaling"} <= set(m)
        assert m["consistency_nodes"] == int(free_traj.checked.sum())


def test_turning_points_of_harmonic():
    ms = Microstate.canonical(0.3, -1.0)
    tr = jacobi_time(harmonic(), ms, 0.5, HARMONIC_GRID)
    dtdx = np.gradient(tr.t, tr.x)
    for xp in tr.turning_points:
        i = int(np.argmin(np.abs(tr.x - xp)))
        assert dtdx[i - 5] * dtdx[i + 5] < 0


@pytest.fixture(scope="module")
def forward_traj():
    return jacobi_time(free(), FORWARD, 0.5, FREE_GRID)


@given(x=st.floats(-8.0, 8.0))
def test_inversion_round_trip(forward_traj, x):
    tr = forward_traj
    pieces = invert_trajectory(tr)
    assert len(pieces) == 1
    lo, hi, spline = pieces[0]
    t = float(np.interp(x, tr.x, tr.t))
    assert lo <= t <= hi
    assert abs(float(spline(t)) - x) < 1e-8


def test_inversion_splits_at_turning_points():
    tr = jacobi_time(harmonic(), Microstate.canonical(0.3, -1.0), 0.5, HARMONIC_GRID)
    assert len(invert_trajectory(tr)) == len(tr.turning_points) + 1
