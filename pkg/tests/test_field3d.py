import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhjlab.field3d import (Grid3, TensorField3, VectorField3, contract_to_current,
                            continuity_check, curl, divergence, gradient, levi_civita,
                            plane_wave_potential, read_vector_csv, tensor_from_potential,
                            write_tensor_csv, write_vector_csv)
from qhjlab.schrodinger import Constants
from qhjlab.verification import random_smooth_field

G = Grid3.cube(1.0, 17)


def field(f):
    x, y, z = G.mesh()
    return VectorField3(G, f(x, y, z))


class TestCurl:
    def test_linear_field(self):
        # B = (y, z, x): curl = (-1, -1, -1), exact for the stencils
        J = curl(field(lambda x, y, z: (y, z, x)))
        for c in J:
            assert np.abs(c + 1.0).max() < 1e-12

    def test_gradient_is_curl_free(self):
        x, y, z = G.mesh()
        J = curl(gradient(x**2 + y * z, G))
        assert max(np.abs(c).max() for c in J) < 1e-12

    def test_smooth_field(self):
        g = Grid3((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (201, 8, 8))
        x, y, z = g.mesh()
        # B = (0, sin x, 0): curl = (0, 0, cos x)
        J = curl(VectorField3(g, (0 * x, np.sin(x), 0 * x)))
        assert np.abs(J[2] - np.cos(x)).max() < 1e-8
        assert np.abs(J[0]).max() < 1e-12 and np.abs(J[1]).max() < 1e-12


class TestTensor:
    def test_rotation_potential(self):
        F = tensor_from_potential(field(lambda x, y, z: (-0.5 * y, 0.5 * x, 0 * z)))
        assert np.abs(F[0, 1] - 1.0).max() < 1e-12
        assert np.abs(F[0, 2]).max() < 1e-12 and np.abs(F[1, 2]).max() < 1e-12

    def test_constant_potential(self):
        F = tensor_from_potential(field(lambda x, y, z: (0 * x + 2.0, 0 * y - 1.0, 0 * z + 3.0)))
        assert max(np.abs(c).max() for c in F.upper) < 1e-12

    def test_antisymmetry(self):
        F = tensor_from_potential(random_smooth_field(np.random.default_rng(3), G))
        D = F.dense()
        assert np.array_equal(D, -np.swapaxes(D, 0, 1))
        assert np.all(D[np.arange(3), np.arange(3)] == 0)

    def test_contraction(self):
        F = TensorField3(G, (np.ones(G.n), np.zeros(G.n), np.zeros(G.n)))
        j = contract_to_current(F)
        assert np.abs(j[0]).max() == 0 and np.abs(j[1]).max() == 0
        assert np.all(j[2] == 1.0)

    def test_levi_civita(self):
        eps = levi_civita()
        assert eps[0, 1, 2] == 1 and eps[1, 0, 2] == -1 and eps[0, 0, 1] == 0
        assert np.abs(eps).sum() == 6


@given(st.integers(0, 2**32 - 1))
def test_identities_for_random_fields(seed):
    B = random_smooth_field(np.random.default_rng(seed), G)
    J = curl(B)
    assert np.abs(continuity_check(J)).max() <= 1e-8
    assert contract_to_current(tensor_from_potential(B)).max_abs_diff(J) <= 1e-12


def test_divergence():
    assert np.abs(divergence(field(lambda x, y, z: (x, 0 * y, 0 * z))) - 1).max() < 1e-12


class TestPlaneWave:
    @pytest.mark.parametrize("k, A0, hbar", [((1, 0, 0), 1.0, 1.0), ((0.3, -1.2, 2.0), 2.0, 1.0),
                                             ((1, 1, 0), 1.0, 0.5)])
    def test_current(self, k, A0, hbar):
        B = plane_wave_potential(k, A0, G, Constants(hbar=hbar))
        J = curl(B)
        want = hbar * A0**2 * np.asarray(k, float)
        for i in range(3):
            assert np.abs(J[i] - want[i]).max() <= 1e-10 * max(1.0, abs(want).max())
        assert np.abs(continuity_check(J)).max() <= 1e-10

    def test_amplitude_scaling(self):
        J1 = curl(plane_wave_potential((1, 2, 3), 1.0, G))
        J2 = curl(plane_wave_potential((1, 2, 3), 2.0, G))
        assert J2.max_abs_diff(J1.scaled(4.0)) < 1e-10

    @pytest.mark.parametrize("k", [(0, 0, 0), (1, 2)])
    def test_bad_wavevector(self, k):
        with pytest.raises(ValueError):
            plane_wave_potential(k, 1.0, G)


class TestValidation:
    def test_grid(self):
        with pytest.raises(ValueError):
            Grid3.cube(1.0, 3)
        with pytest.raises(ValueError):
            Grid3((0, 0, 0), (1, -1, 1), (8, 8, 8))

    def test_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            VectorField3(G, (np.full(G.n, np.nan), 0.0, 0.0))


def test_csv_round_trip(tmp_path):
    B = random_smooth_field(np.random.default_rng(7), Grid3((0, -1, 2), (1, 1, 3), (5, 6, 7)))
    p = tmp_path / "B.csv"
    write_vector_csv(p, B, meta={"note": 1})
    back = read_vector_csv(p)
    assert back.grid == B.grid and back.max_abs_diff(B) == 0.0
    head = p.read_text().splitlines()[0]
    assert head == "x,y,z,Bx,By,Bz"
    write_tensor_csv(tmp_path / "F.csv", tensor_from_potential(B))
    assert (tmp_path / "F.csv").read_text().startswith("x,y,z,F01,F02,F12\n")
