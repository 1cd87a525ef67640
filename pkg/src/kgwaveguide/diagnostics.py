"""Monitored functionals: energy, norms, space-time accumulators, decay fits.

Every function here is a pure function of a snapshot; the accumulators in
DiagnosticsSeries are built up with the trapezoid rule in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import FieldState, TorusWaveguideGrid, forward_transform, lp_norm

__all__ = [
    "DiagnosticsSeries",
    "energy",
    "strichartz_increment",
    "morawetz_increment",
    "ExteriorEnergy",
    "exterior_energy",
    "local_potential_mass",
    "decay_fit",
    "record_sample",
]

CSV_COLUMNS = ("t", "E", "H_norm", "L2", "Linf", "Lp_pot",
               "strichartz_accum", "morawetz_accum", "exterior_energy",
               "cauchy_residual")


@dataclass
class DiagnosticsSeries:
    """Time-indexed record of every monitored functional."""

    times: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    h_norm: list[float] = field(default_factory=list)
    l2: list[float] = field(default_factory=list)
    linf: list[float] = field(default_factory=list)
    lp_pot: list[float] = field(default_factory=list)
    strichartz_accum: list[float] = field(default_factory=list)
    morawetz_accum: list[float] = field(default_factory=list)
    exterior_energy: list[float] = field(default_factory=list)
    cauchy_residual: list[float] = field(default_factory=list)
    # instantaneous integrands, kept for the trapezoid accumulators
    _strichartz_inst: list[float] = field(default_factory=list)
    _morawetz_inst: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def row(self, i: int) -> tuple[float, ...]:
        return (self.times[i], self.energy[i], self.h_norm[i], self.l2[i],
                self.linf[i], self.lp_pot[i], self.strichartz_accum[i],
                self.morawetz_accum[i], self.exterior_energy[i],
                self.cauchy_residual[i])


def gradient_squared(grid: TorusWaveguideGrid, u: np.ndarray) -> np.ndarray:
    """|grad u|^2 pointwise, with derivatives taken spectrally (x and y)."""
    u_hat = forward_transform(grid, u)
    freqs = grid.frequency_grids()
    out = np.zeros(grid.shape)
    for f in freqs:
        # keep the complex modulus: discarding the imaginary part would
        # drop the (non-Hermitian) Nyquist contribution and break the
        # Parseval match with the spectral energy
        du = sfft.ifftn(1j * f * u_hat)
        out += np.abs(du) ** 2
    return out


def energy_density(grid: TorusWaveguideGrid, state: FieldState,
                   alpha: float) -> np.ndarray:
    return 0.5 * (state.v**2 + gradient_squared(grid, state.u) + state.u**2
                  + (2.0 / (alpha + 2.0)) * np.abs(state.u) ** (alpha + 2.0))


def energy(grid: TorusWaveguideGrid, state: FieldState, alpha: float) -> float:
    """Conserved energy: (1/2)(|v|_2^2 + |grad u|_2^2 + |u|_2^2) plus the
    defocusing potential term |u|_{alpha+2}^{alpha+2} / (alpha/2 + 1)."""
    u_hat = forward_transform(grid, state.u)
    w2 = grid.omega_squared()
    quad = 0.5 * grid.spectral_weight * np.sum(w2 * np.abs(u_hat) ** 2)
    kinetic = 0.5 * grid.cell_volume * np.sum(state.v**2)
    potential = (grid.cell_volume / (alpha + 2.0)) * np.sum(
        np.abs(state.u) ** (alpha + 2.0))
    return float(quad + kinetic + potential)


def strichartz_increment(grid: TorusWaveguideGrid, state: FieldState,
                         alpha: float) -> float:
    """Instantaneous |u(t)|_{L^{2(alpha+1)}}^{alpha+1}."""
    if not alpha > 0:
        raise ValueError(f"alpha={alpha} must be positive")
    return lp_norm(grid, state.u, 2.0 * (alpha + 1.0)) ** (alpha + 1.0)


def morawetz_increment(grid: TorusWaveguideGrid, state: FieldState, t: float,
                       alpha: float) -> float:
    """Weighted spatial integral of min{|u|^2, |u|^{alpha+2}} at time t.

    The weight is 1 / (<t> log(|t|+2) log(max{|x1|-t, 2})) with <t> =
    sqrt(1+t^2); the floor inside the last log keeps the weight bounded.
    """
    if t < 0:
        raise ValueError(f"t={t} must be nonnegative")
    a = np.abs(state.u)
    numer = np.minimum(a**2, a ** (alpha + 2.0))
    x1 = grid.coordinate_grids()[0]
    w = np.maximum(np.abs(x1) - t, 2.0)
    bracket = np.sqrt(1.0 + t * t)
    weight = 1.0 / (bracket * np.log(abs(t) + 2.0) * np.log(w))
    return float(grid.cell_volume * np.sum(numer * weight))


@dataclass(frozen=True)
class ExteriorEnergy:
    value: float
    horizon_exceeded: bool


def exterior_energy(grid: TorusWaveguideGrid, state: FieldState, x0, r: float,
                    t: float, alpha: float) -> ExteriorEnergy:
    """Energy outside the expanding ball B(x0, r+t) (minimum-image metric).

    Flagged horizon_exceeded once r+t reaches the box half-width, where the
    periodized exterior region is no longer meaningful.
    """
    if not r > 0:
        raise ValueError(f"r={r} must be positive")
    dist = grid.euclidean_distance(x0)
    outside = dist > r + t
    dens = energy_density(grid, state, alpha)
    value = float(grid.cell_volume * np.sum(dens[outside]))
    return ExteriorEnergy(value=value, horizon_exceeded=bool(r + t >= grid.L))


def local_potential_mass(grid: TorusWaveguideGrid, state: FieldState, x_c,
                         R: float, p: float) -> float:
    """Integral of |u|^p over the cylinder {|x - x_c| <= R} x T."""
    if not R > 0:
        raise ValueError(f"R={R} must be positive")
    inside = grid.euclidean_distance(x_c) <= R
    return float(grid.cell_volume * np.sum(np.abs(state.u[inside]) ** p))


def envelope_sup_norm(grid: TorusWaveguideGrid, state: FieldState) -> float:
    """Sup norm of the half-wave signal u - i (1-Lap)^{-1/2} v.

    Under the free flow this signal evolves by the group exp(it sqrt(1-Lap))
    whose sup norm obeys the clean t^{-d/2} decay; the real solution itself
    carries an O(1) carrier oscillation on top of that envelope.
    """
    u_hat = forward_transform(grid, state.u)
    v_hat = forward_transform(grid, state.v)
    omega = np.sqrt(grid.omega_squared())
    w = sfft.ifftn(u_hat - 1j * v_hat / omega)
    return float(np.abs(w).max())


def decay_fit(times, linf_values, window) -> float:
    """Least-squares slope of log |u|_inf against log t inside the window.

    For linear evolution of smooth localized data the slope approaches
    -d/2.  The window must start at t >= 2 (pre-horizon, past the initial
    transient); at least 5 samples are required.
    """
    t0, t1 = window
    if t0 < 2:
        raise ValueError(f"window start {t0} must be >= 2")
    times = np.asarray(times, dtype=float)
    values = np.asarray(linf_values, dtype=float)
    sel = (times >= t0) & (times <= t1)
    if sel.sum() < 5:
        raise ValueError(f"only {int(sel.sum())} samples in window, need >= 5")
    slope, _ = np.polyfit(np.log(times[sel]), np.log(values[sel]), 1)
    return float(slope)


def record_sample(grid: TorusWaveguideGrid, state: FieldState, alpha: float,
                  series: DiagnosticsSeries, exterior=None,
                  cauchy_residual: float = 0.0) -> None:
    """Append one fully-populated sample; accumulators advance by trapezoid."""
    t = state.t
    if series.times and t <= series.times[-1]:
        raise ValueError("sample times must be strictly increasing")

    s_inst = strichartz_increment(grid, state, alpha)
    m_inst = morawetz_increment(grid, state, max(t, 0.0), alpha)
    if series.times:
        dt = t - series.times[-1]
        s_acc = series.strichartz_accum[-1] + 0.5 * dt * (series._strichartz_inst[-1] + s_inst)
        m_acc = series.morawetz_accum[-1] + 0.5 * dt * (series._morawetz_inst[-1] + m_inst)
    else:
        s_acc = m_acc = 0.0

    if exterior is not None:
        x0, r = exterior
        ext = exterior_energy(grid, state, x0, r, t, alpha).value
    else:
        ext = 0.0

    u_hat = forward_transform(grid, state.u)
    w2 = grid.omega_squared()
    h1_sq = grid.spectral_weight * np.sum(w2 * np.abs(u_hat) ** 2)
    l2_v_sq = grid.cell_volume * np.sum(state.v**2)
    pot = (grid.cell_volume / (alpha + 2.0)) * np.sum(np.abs(state.u) ** (alpha + 2.0))

    series.times.append(t)
    series.energy.append(float(0.5 * (h1_sq + l2_v_sq)) + float(pot))
    series.h_norm.append(float(np.sqrt(h1_sq + l2_v_sq)))
    series.l2.append(lp_norm(grid, state.u, 2))
    series.linf.append(lp_norm(grid, state.u, np.inf))
    series.lp_pot.append(lp_norm(grid, state.u, alpha + 2.0))
    series.strichartz_accum.append(float(s_acc))
    series.morawetz_accum.append(float(m_acc))
    series.exterior_energy.append(ext)
    series.cauchy_residual.append(float(cauchy_residual))
    series._strichartz_inst.append(s_inst)
    series._morawetz_inst.append(m_inst)
