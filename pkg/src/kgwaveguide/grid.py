"""Discretized waveguide geometry, field storage, transforms and norms.

The domain is a periodized euclidean box [-L, L]^d times the circle of
circumference 2*pi.  All spectral machinery (frequencies, Plancherel
weights, quadrature) lives here; every other module works through it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft

__all__ = [
    "TorusWaveguideGrid",
    "FieldState",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "h1_norm",
    "energy_norm",
    "write_snapshot",
    "read_snapshot",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusWaveguideGrid:
    """Uniform grid on [-L, L]^d x T, with precomputed frequency tables.

    Euclidean frequencies are xi_k = pi*k/L, torus frequencies are the
    integers m; both in standard FFT ordering.
    """

    d: int
    L: float
    Nx: int
    Ny: int
    x: np.ndarray = field(repr=False)        # 1d euclidean coordinate axis
    y: np.ndarray = field(repr=False)        # torus coordinate axis
    xi: np.ndarray = field(repr=False)       # 1d euclidean frequency axis
    m: np.ndarray = field(repr=False)        # torus frequency axis (integers)
    cell_volume: float = 0.0

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.Nx,) * self.d + (self.Ny,)

    @property
    def npoints(self) -> int:
        n = self.Ny
        for _ in range(self.d):
            n *= self.Nx
        return n

    @property
    def total_measure(self) -> float:
        return (2.0 * self.L) ** self.d * 2.0 * np.pi

    @property
    def spectral_weight(self) -> float:
        """Weight making the DFT Parseval identity match the L2 quadrature."""
        return self.cell_volume / self.npoints

    def frequency_grids(self) -> tuple[np.ndarray, ...]:
        """Broadcastable (sparse) frequency arrays, one per axis."""
        axes = [self.xi] * self.d + [self.m]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def omega_squared(self) -> np.ndarray:
        """1 + |xi|^2 + m^2 on the full spectral grid."""
        freqs = self.frequency_grids()
        out = np.ones(self.shape)
        for f in freqs:
            out = out + f**2
        return out

    def coordinate_grids(self) -> tuple[np.ndarray, ...]:
        axes = [self.x] * self.d + [self.y]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def euclidean_distance(self, x_c) -> np.ndarray:
        """Minimum-image distance to the point x_c, broadcast over the grid."""
        x_c = np.atleast_1d(np.asarray(x_c, dtype=float))
        if x_c.shape != (self.d,):
            raise ValueError(f"center must have {self.d} components")
        coords = self.coordinate_grids()
        dist2 = np.zeros(self.shape)
        width = 2.0 * self.L
        for i in range(self.d):
            delta = coords[i] - x_c[i]
            delta = delta - width * np.round(delta / width)
            dist2 = dist2 + delta**2
        return np.sqrt(dist2)


@dataclass
class FieldState:
    """The pair (u, du/dt) sampled on a grid at a fixed time."""

    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.v.copy(), self.t)


def validate_state(grid: TorusWaveguideGrid, state: FieldState) -> None:
    """Raise on shape mismatch or non-finite samples."""
    if state.u.shape != grid.shape or state.v.shape != grid.shape:
        raise ValueError(
            f"field shape {state.u.shape}/{state.v.shape} does not match grid {grid.shape}"
        )
    if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.v))):
        raise FloatingPointError("non-finite samples in field state")


def make_grid(d: int, L: float, Nx: int, Ny: int) -> TorusWaveguideGrid:
    """Build a grid; validates all invariants.

    Nx, Ny must be powers of two with Nx >= 16, Ny >= 4; d in {1, 2}.
    """
    if d not in (1, 2):
        raise ValueError(f"numerical dimension d={d} unsupported (must be 1 or 2)")
    if not (np.isfinite(L) and L > 0):
        raise ValueError(f"L={L} must be positive")
    if not _is_power_of_two(Nx) or Nx < 16:
        raise ValueError(f"Nx={Nx} must be a power of two >= 16")
    if not _is_power_of_two(Ny) or Ny < 4:
        raise ValueError(f"Ny={Ny} must be a power of two >= 4")

    dx = 2.0 * L / Nx
    dy = 2.0 * np.pi / Ny
    x = -L + dx * np.arange(Nx)
    y = dy * np.arange(Ny)
    xi = 2.0 * np.pi * sfft.fftfreq(Nx, d=dx)      # = pi*k/L
    m = np.round(2.0 * np.pi * sfft.fftfreq(Ny, d=dy))
    cell_volume = dx**d * dy
    return TorusWaveguideGrid(d=d, L=float(L), Nx=Nx, Ny=Ny,
                              x=x, y=y, xi=xi, m=m, cell_volume=cell_volume)


def forward_transform(grid: TorusWaveguideGrid, fld: np.ndarray) -> np.ndarray:
    """Joint FFT over all axes.  Plancherel holds with grid.spectral_weight."""
    if fld.shape != grid.shape:
        raise ValueError(f"field shape {fld.shape} does not match grid {grid.shape}")
    return sfft.fftn(fld)


def inverse_transform(grid: TorusWaveguideGrid, coeffs: np.ndarray) -> np.ndarray:
    if coeffs.shape != grid.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
    return sfft.ifftn(coeffs)


def lp_norm(grid: TorusWaveguideGrid, fld: np.ndarray, p: float) -> float:
    """L^p norm by uniform-weight quadrature; p = inf gives the sup norm."""
    if p < 1:
        raise ValueError(f"p={p} must be >= 1")
    a = np.abs(fld)
    if np.isinf(p):
        return float(a.max())
    return float((grid.cell_volume * np.sum(a**p)) ** (1.0 / p))


def h1_norm_spectral(grid: TorusWaveguideGrid, coeffs: np.ndarray) -> float:
    """H^1 norm from spectral coefficients: (sum w2 * weight * |c|^2)^(1/2)."""
    w2 = grid.omega_squared()
    return float(np.sqrt(grid.spectral_weight * np.sum(w2 * np.abs(coeffs) ** 2)))


def h1_norm(grid: TorusWaveguideGrid, state_or_field) -> float:
    """H^1 norm of u, computed spectrally with weight 1 + |xi|^2 + m^2."""
    u = state_or_field.u if isinstance(state_or_field, FieldState) else state_or_field
    return h1_norm_spectral(grid, forward_transform(grid, u))


def energy_norm(grid: TorusWaveguideGrid, state: FieldState) -> float:
    """Norm of (u, v) in the energy space H^1 x L^2."""
    return float(np.hypot(h1_norm(grid, state.u), lp_norm(grid, state.v, 2)))


# ---------------------------------------------------------------------------
# Snapshot file format: <stem>.bin holds little-endian float64, row-major,
# u block then v block; <stem>.json is the sidecar header.

def write_snapshot(grid: TorusWaveguideGrid, state: FieldState, stem) -> Path:
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    data = np.concatenate([state.u.ravel(), state.v.ravel()]).astype("<f8")
    (stem.with_suffix(".bin")).write_bytes(data.tobytes())
    header = {"d": grid.d, "L": grid.L, "Nx": grid.Nx, "Ny": grid.Ny, "t": state.t}
    (stem.with_suffix(".json")).write_text(json.dumps(header, indent=2) + "\n")
    return stem.with_suffix(".bin")


def read_snapshot(stem) -> tuple[TorusWaveguideGrid, FieldState]:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    grid = make_grid(header["d"], header["L"], header["Nx"], header["Ny"])
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype="<f8")
    n = grid.npoints
    if raw.size != 2 * n:
        raise ValueError(f"snapshot has {raw.size} samples, expected {2 * n}")
    u = raw[:n].reshape(grid.shape).copy()
    v = raw[n:].reshape(grid.shape).copy()
    return grid, FieldState(u, v, float(header["t"]))
