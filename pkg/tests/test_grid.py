"""Grid construction, transforms, quadrature norms and snapshot I/O."""

import math

import numpy as np
import pytest

import kgwaveguide as kg
from kgwaveguide.grid import h1_norm_spectral, validate_state

from conftest import gaussian_state, random_state


class TestMakeGrid:
    def test_cell_volume_benchmark(self):
        g = kg.make_grid(1, 64.0, 1024, 16)
        assert g.cell_volume == pytest.approx(0.125 * (np.pi / 8), rel=1e-15)

    def test_axes_and_frequencies(self):
        g = kg.make_grid(1, 8.0, 64, 8)
        assert g.x[0] == -8.0 and g.x[1] - g.x[0] == pytest.approx(0.25)
        # euclidean frequencies are pi*k/L in FFT ordering
        assert g.xi[1] == pytest.approx(np.pi / 8.0)
        assert sorted(g.m) == list(range(-4, 4))

    def test_total_measure(self):
        g = kg.make_grid(2, 4.0, 16, 4)
        assert g.total_measure == pytest.approx(8.0**2 * 2 * np.pi)
        assert g.cell_volume * g.npoints == pytest.approx(g.total_measure)

    @pytest.mark.parametrize("args", [
        (3, 8.0, 64, 8),     # unsupported dimension
        (1, -1.0, 64, 8),    # bad box size
        (1, 8.0, 60, 8),     # Nx not a power of two
        (1, 8.0, 8, 8),      # Nx too small
        (1, 8.0, 64, 3),     # Ny not a power of two
        (1, 8.0, 64, 2),     # Ny too small
    ])
    def test_invalid_parameters_rejected(self, args):
        with pytest.raises(ValueError):
            kg.make_grid(*args)


class TestTransforms:
    def test_random_round_trip(self, small_grid):
        rng = np.random.default_rng(7)
        f = rng.standard_normal(small_grid.shape)
        back = kg.inverse_transform(small_grid, kg.forward_transform(small_grid, f)).real
        assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))

    def test_shape_mismatch_rejected(self, small_grid):
        with pytest.raises(ValueError):
            kg.forward_transform(small_grid, np.zeros((3, 3)))
        with pytest.raises(ValueError):
            kg.inverse_transform(small_grid, np.zeros((3, 3)))

    def test_plancherel(self, small_grid):
        f = random_state(small_grid, seed=1).u
        l2 = kg.lp_norm(small_grid, f, 2)
        coeffs = kg.forward_transform(small_grid, f)
        spectral = np.sqrt(small_grid.spectral_weight * np.sum(np.abs(coeffs) ** 2))
        assert spectral == pytest.approx(l2, rel=1e-12)


class TestNorms:
    def test_zero_field(self, small_grid):
        z = np.zeros(small_grid.shape)
        for p in (1, 2, 4, np.inf):
            assert kg.lp_norm(small_grid, z, p) == 0.0

    def test_constant_field_l2(self, small_grid):
        c = -3.5
        f = c * np.ones(small_grid.shape)
        expect = abs(c) * math.sqrt(small_grid.total_measure)
        assert kg.lp_norm(small_grid, f, 2) == pytest.approx(expect, rel=1e-13)

    def test_sup_norm(self, small_grid):
        f = np.zeros(small_grid.shape)
        f[3, 1] = -7.0
        assert kg.lp_norm(small_grid, f, np.inf) == 7.0

    def test_p_below_one_rejected(self, small_grid):
        with pytest.raises(ValueError):
            kg.lp_norm(small_grid, np.ones(small_grid.shape), 0.5)

    def test_torus_mode_energy_norm(self, small_grid):
        # u = cos(y): both the L2 part and the y-derivative part equal
        # |cos|^2 = (2L) * pi, so energy_norm^2 = 2 * (2L) * pi.
        y = small_grid.coordinate_grids()[-1]
        u = np.cos(y) * np.ones(small_grid.shape)
        st = kg.FieldState(u, np.zeros(small_grid.shape), 0.0)
        expect = 2.0 * (2 * small_grid.L) * np.pi
        assert kg.energy_norm(small_grid, st) ** 2 == pytest.approx(expect, rel=1e-12)

    def test_h1_homogeneity(self, small_grid):
        u = random_state(small_grid, seed=3).u
        assert kg.h1_norm(small_grid, 2.0 * u) == pytest.approx(
            2.0 * kg.h1_norm(small_grid, u), rel=1e-12)

    def test_h1_dominates_l2(self, small_grid):
        u = random_state(small_grid, seed=4).u
        assert kg.h1_norm(small_grid, u) >= kg.lp_norm(small_grid, u, 2)

    def test_holder_interpolation(self, small_grid):
        # |u|_4^4 <= |u|_inf^2 |u|_2^2 for a batch of random fields
        for seed in range(8):
            u = random_state(small_grid, seed=seed).u
            lhs = kg.lp_norm(small_grid, u, 4) ** 4
            rhs = (kg.lp_norm(small_grid, u, np.inf) ** 2
                   * kg.lp_norm(small_grid, u, 2) ** 2)
            assert lhs <= rhs * (1 + 1e-12)

    def test_spectral_h1_agrees_with_quadrature(self, small_grid):
        # independent oracle: |u|^2 + |du/dx|^2 + |du/dy|^2 by differencing
        # a band-limited field whose derivative is known in closed form
        x, y = small_grid.coordinate_grids()
        u = np.sin(np.pi * x / small_grid.L) * np.cos(2 * y)
        dux = (np.pi / small_grid.L) * np.cos(np.pi * x / small_grid.L) * np.cos(2 * y)
        duy = -2 * np.sin(np.pi * x / small_grid.L) * np.sin(2 * y)
        quad = np.sqrt(small_grid.cell_volume * np.sum(u**2 + dux**2 + duy**2))
        assert kg.h1_norm(small_grid, u) == pytest.approx(quad, rel=1e-12)


class TestStateValidation:
    def test_shape_mismatch(self, small_grid):
        bad = kg.FieldState(np.zeros((4, 4)), np.zeros((4, 4)), 0.0)
        with pytest.raises(ValueError):
            validate_state(small_grid, bad)

    def test_non_finite(self, small_grid):
        st = random_state(small_grid)
        st.u[0, 0] = np.nan
        with pytest.raises(FloatingPointError):
            validate_state(small_grid, st)


class TestMinimumImageDistance:
    def test_wraparound(self):
        g = kg.make_grid(1, 8.0, 64, 8)
        dist = g.euclidean_distance([7.0])
        # the point x = -7 is 2 away through the periodic seam, not 14
        i = int(np.argmin(np.abs(g.x - (-7.0))))
        assert dist[i, 0] == pytest.approx(2.0)

    def test_center_dimension_checked(self):
        g = kg.make_grid(2, 8.0, 16, 4)
        with pytest.raises(ValueError):
            g.euclidean_distance([1.0])


class TestSnapshots:
    def test_round_trip(self, tmp_path, small_grid):
        st = gaussian_state(small_grid, amplitude=0.3)
        st.v[:] = random_state(small_grid, seed=9).v
        st.t = 1.25
        kg.write_snapshot(small_grid, st, tmp_path / "snap")
        g2, st2 = kg.read_snapshot(tmp_path / "snap")
        assert g2.shape == small_grid.shape and g2.L == small_grid.L
        assert st2.t == 1.25
        np.testing.assert_array_equal(st2.u, st.u)
        np.testing.assert_array_equal(st2.v, st.v)

    def test_truncated_payload_rejected(self, tmp_path, small_grid):
        st = gaussian_state(small_grid)
        path = kg.write_snapshot(small_grid, st, tmp_path / "snap")
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(ValueError):
            kg.read_snapshot(tmp_path / "snap")
