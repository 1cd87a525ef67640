"""Nonlinear time integration by Strang splitting with the exact linear flow.

The defocusing equation  u_tt - Lap u + u = -|u|^alpha u  splits into the
free flow (solved exactly in Fourier space) and the kick
v <- v - tau |u|^alpha u, which is the exact flow of the frozen-u
subproblem.  The composition L(dt/2) N(dt) L(dt/2) is second order
globally; there is no CFL restriction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import diagnostics as diag
from .grid import FieldState, TorusWaveguideGrid, validate_state
from .propagator import LinearPropagator, dispersion

__all__ = ["StepperConfig", "BlowUpError", "RunRecord", "nonlinear_kick",
           "strang_step", "evolve", "reference_rk4"]


class BlowUpError(RuntimeError):
    """Raised by the evolve guard on energy drift > 1% or non-finite fields.

    Must never fire in the defocusing regime at a stable dt; firing signals
    a configuration error, not physics.
    """


@dataclass
class StepperConfig:
    alpha: float
    dt: float
    T: float
    dealias: bool = False

    def validate(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha={self.alpha} must be positive")
        if not (self.dt > 0 and self.T >= 0):
            raise ValueError(f"dt={self.dt}, T={self.T} must be positive")
        if self.T > 0 and self.dt > self.T:
            raise ValueError(f"dt={self.dt} exceeds T={self.T}")


def _power_term(u: np.ndarray, alpha: float) -> np.ndarray:
    # |u|^alpha u with the convention 0^alpha * 0 = 0; integer alpha stays exact
    return np.abs(u) ** alpha * u


def _dealias_mask(grid: TorusWaveguideGrid) -> np.ndarray:
    """2/3-rule truncation mask for the nonlinear term."""
    mask = np.ones(grid.shape, dtype=bool)
    freqs = grid.frequency_grids()
    cutoffs = [np.abs(grid.xi).max() * 2 / 3] * grid.d + [np.abs(grid.m).max() * 2 / 3]
    for f, c in zip(freqs, cutoffs):
        mask &= np.abs(f) <= c
    return mask


def nonlinear_kick(grid: TorusWaveguideGrid, state: FieldState, tau: float,
                   alpha: float, dealias: bool = False) -> FieldState:
    """Exact flow of the frozen-u subproblem: v <- v - tau |u|^alpha u."""
    validate_state(grid, state)
    term = _power_term(state.u, alpha)
    if dealias:
        term = sfft.ifftn(sfft.fftn(term) * _dealias_mask(grid)).real
    return FieldState(state.u.copy(), state.v - tau * term, state.t)


def strang_step(grid: TorusWaveguideGrid, state: FieldState, dt: float,
                alpha: float, dealias: bool = False,
                _half: LinearPropagator | None = None) -> FieldState:
    """One step of L(dt/2) o N(dt) o L(dt/2)."""
    half = _half or LinearPropagator(grid, dt / 2)
    return half(nonlinear_kick(grid, half(state), dt, alpha, dealias))


@dataclass
class RunRecord:
    """Trajectory handle: final state plus everything sampled along the way."""

    grid: TorusWaveguideGrid
    alpha: float
    final_state: FieldState
    series: diag.DiagnosticsSeries
    snapshots: dict[float, FieldState] = field(default_factory=dict)
    # back-propagated states V(t) = e^{-tH}(u, v) at the snapshot times
    vstates: dict[float, FieldState] = field(default_factory=dict)


def evolve(grid: TorusWaveguideGrid, state: FieldState, config: StepperConfig,
           cadence: int = 10, snapshot_times=(),
           exterior=None, track_scattering: bool = False,
           linear_only: bool = False) -> RunRecord:
    """Run to T, sampling diagnostics every `cadence` steps.

    `snapshot_times` are rounded to the nearest step; the state (and, with
    track_scattering, its back-propagated version) is stored there.
    `exterior`, if given, is a (x0, r) pair monitored via exterior_energy.
    `linear_only` disables the nonlinear kick, reproducing the free flow.
    """
    config.validate()
    validate_state(grid, state)
    dt, alpha = config.dt, config.alpha
    nsteps = int(round(config.T / dt)) if config.T > 0 else 0

    table = dispersion(grid)
    omega = table.omega
    half = LinearPropagator(grid, dt / 2, table)
    w2 = omega**2
    sw = grid.spectral_weight
    dealias_mask = _dealias_mask(grid) if config.dealias else None

    snap_steps = {int(round(ts / dt)): float(ts) for ts in snapshot_times}

    u_hat = sfft.fftn(state.u)
    v_hat = sfft.fftn(state.v)
    t0 = state.t

    series = diag.DiagnosticsSeries()
    prev_v_spec = None  # spectral (f, g) of V at the previous sample

    def physical_state(step: int) -> FieldState:
        return FieldState(sfft.ifftn(u_hat).real, sfft.ifftn(v_hat).real,
                          t0 + step * dt)

    def backrotate(step: int):
        t = step * dt + t0
        c, s = np.cos(omega * t), np.sin(omega * t)
        f = c * u_hat - (s / omega) * v_hat
        g = omega * s * u_hat + c * v_hat
        return f, g

    def sample(step: int) -> None:
        nonlocal prev_v_spec
        snap = physical_state(step)
        if not (np.all(np.isfinite(snap.u)) and np.all(np.isfinite(snap.v))):
            raise BlowUpError(f"non-finite field at t={snap.t}")
        cauchy = 0.0
        if track_scattering:
            f, g = backrotate(step)
            if prev_v_spec is not None:
                pf, pg = prev_v_spec
                cauchy = float(np.sqrt(sw * (
                    np.sum(w2 * np.abs(f - pf) ** 2)
                    + np.sum(np.abs(g - pg) ** 2))))
            prev_v_spec = (f, g)
        diag.record_sample(grid, snap, alpha, series, exterior=exterior,
                           cauchy_residual=cauchy)
        e = series.energy[-1]
        e0 = series.energy[0]
        if e0 > 0 and abs(e - e0) > 0.01 * e0:
            raise BlowUpError(
                f"energy drift {abs(e - e0) / e0:.3e} at t={snap.t} exceeds 1%")

    def store(step: int) -> None:
        ts = snap_steps[step]
        snap = physical_state(step)
        snapshots[ts] = snap
        if track_scattering:
            f, g = backrotate(step)
            vstates[ts] = FieldState(sfft.ifftn(f).real, sfft.ifftn(g).real, 0.0)

    snapshots: dict[float, FieldState] = {}
    vstates: dict[float, FieldState] = {}

    sample(0)
    if 0 in snap_steps:
        store(0)

    for step in range(1, nsteps + 1):
        u_hat, v_hat = half.apply_spectral(u_hat, v_hat)
        if not linear_only:
            term = sfft.fftn(_power_term(sfft.ifftn(u_hat).real, alpha))
            if dealias_mask is not None:
                term = term * dealias_mask
            v_hat = v_hat - dt * term
        u_hat, v_hat = half.apply_spectral(u_hat, v_hat)
        if step % cadence == 0 or step == nsteps:
            sample(step)
        if step in snap_steps:
            store(step)

    final = physical_state(nsteps)
    return RunRecord(grid=grid, alpha=alpha, final_state=final, series=series,
                     snapshots=snapshots, vstates=vstates)


def reference_rk4(grid: TorusWaveguideGrid, state: FieldState, dt: float,
                  alpha: float, nsteps: int) -> FieldState:
    """Classical RK4 on the same semidiscretization; order-4 oracle for tests."""
    validate_state(grid, state)
    w2 = grid.omega_squared()

    def rhs(u_hat, v_hat):
        u = sfft.ifftn(u_hat).real
        return v_hat, -w2 * u_hat - sfft.fftn(_power_term(u, alpha))

    u_hat = sfft.fftn(state.u)
    v_hat = sfft.fftn(state.v)
    for _ in range(nsteps):
        k1u, k1v = rhs(u_hat, v_hat)
        k2u, k2v = rhs(u_hat + 0.5 * dt * k1u, v_hat + 0.5 * dt * k1v)
        k3u, k3v = rhs(u_hat + 0.5 * dt * k2u, v_hat + 0.5 * dt * k2v)
        k4u, k4v = rhs(u_hat + dt * k3u, v_hat + dt * k3v)
        u_hat = u_hat + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v_hat = v_hat + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return FieldState(sfft.ifftn(u_hat).real, sfft.ifftn(v_hat).real,
                      state.t + nsteps * dt)
