"""Interaction-picture extraction: Cauchy windows and residual ledgers."""

import numpy as np
import pytest

import kgwaveguide as kg
from kgwaveguide.scattering import (backpropagate, cauchy_check,
                                    extract_scattering_state)
from kgwaveguide.stepper import StepperConfig

from conftest import gaussian_state, random_state


def _zero_state(grid):
    return kg.FieldState(np.zeros(grid.shape), np.zeros(grid.shape), 0.0)


@pytest.fixture(scope="module")
def small_data_record():
    """Weakly nonlinear run whose solution visibly settles into a free wave."""
    g = kg.make_grid(1, 32.0, 256, 4)
    st = gaussian_state(g, amplitude=1e-2, width=2.0)
    rec = kg.evolve(g, st, StepperConfig(alpha=5.0, dt=1e-2, T=12.0),
                    cadence=10, snapshot_times=[2, 4, 6, 8, 10, 12],
                    track_scattering=True)
    return g, rec


class TestBackpropagate:
    def test_time_zero_identity(self, small_grid):
        st = random_state(small_grid, seed=1)
        out = backpropagate(small_grid, st)
        np.testing.assert_allclose(out.u, st.u, atol=1e-13)
        assert out.t == 0.0

    def test_inverts_free_flow(self, small_grid):
        st = random_state(small_grid, seed=2)
        fwd = kg.apply_linear(small_grid, st, 3.3)
        back = backpropagate(small_grid, fwd)
        assert np.abs(back.u - st.u).max() <= 1e-12
        assert np.abs(back.v - st.v).max() <= 1e-12


class TestCauchyCheck:
    def test_requires_tracked_snapshots(self, small_grid):
        st = gaussian_state(small_grid, amplitude=0.01)
        rec = kg.evolve(small_grid, st, StepperConfig(alpha=5.0, dt=1e-2, T=0.5))
        with pytest.raises(ValueError):
            cauchy_check(rec)

    def test_zero_solution(self, small_grid):
        rec = kg.evolve(small_grid, _zero_state(small_grid),
                        StepperConfig(alpha=5.0, dt=1e-2, T=1.0),
                        snapshot_times=[0.5, 1.0], track_scattering=True)
        report = cauchy_check(rec)
        assert report.cauchy_residuals == [pytest.approx(0.0, abs=1e-14)]
        assert report.strichartz_tails == [pytest.approx(0.0, abs=1e-14)]

    def test_windows_satisfy_fitted_inequality(self, small_data_record):
        _, rec = small_data_record
        report = cauchy_check(rec)
        assert len(report.cauchy_residuals) == 5
        assert report.fitted_constant > 0
        assert all(report.inequality_ok)

    def test_residuals_shrink_with_time(self, small_data_record):
        _, rec = small_data_record
        report = cauchy_check(rec)
        assert report.cauchy_residuals[-1] < report.cauchy_residuals[0]


class TestExtraction:
    def test_linear_trajectory_zero_residuals(self, small_grid):
        st = gaussian_state(small_grid, amplitude=0.5, width=1.0)
        rec = kg.evolve(small_grid, st, StepperConfig(alpha=5.0, dt=1e-2, T=2.0),
                        snapshot_times=[0.5, 1.0, 1.5, 2.0],
                        track_scattering=True, linear_only=True)
        _, report = extract_scattering_state(rec)
        assert max(report.residual_series) <= 1e-10

    def test_zero_data(self, small_grid):
        rec = kg.evolve(small_grid, _zero_state(small_grid),
                        StepperConfig(alpha=5.0, dt=1e-2, T=1.0),
                        snapshot_times=[0.5, 1.0], track_scattering=True)
        final, report = extract_scattering_state(rec)
        assert report.final_norm == 0.0
        assert np.all(final.u == 0.0) and np.all(final.v == 0.0)

    def test_residual_decays_toward_final_time(self, small_data_record):
        _, rec = small_data_record
        _, report = extract_scattering_state(rec)
        t = report.sample_times
        res = dict(zip(t, report.residual_series))
        assert res[6] > res[10]          # t = T/2 vs t = 0.9 T territory
        assert report.residual_series[-1] == 0.0

    def test_extracted_state_reproduces_solution(self, small_data_record):
        # evolving (f+, g+) with the free flow matches the nonlinear
        # solution at the final time to the residual tolerance
        g, rec = small_data_record
        fplus, _ = extract_scattering_state(rec)
        free = kg.apply_linear(g, fplus, 12.0)
        final = rec.snapshots[12]
        diff = kg.energy_norm(g, kg.FieldState(free.u - final.u,
                                               free.v - final.v))
        assert diff <= 1e-9 * kg.energy_norm(g, final)

    def test_report_serializes(self, small_data_record):
        import json
        _, rec = small_data_record
        _, report = extract_scattering_state(rec)
        json.dumps(report.to_dict())
