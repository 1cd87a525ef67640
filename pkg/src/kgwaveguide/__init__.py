"""Pseudo-spectral simulator and verification harness for the defocusing
Klein-Gordon equation on a periodized waveguide (euclidean box times circle)."""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    FieldState,
    TorusWaveguideGrid,
    energy_norm,
    forward_transform,
    h1_norm,
    inverse_transform,
    lp_norm,
    make_grid,
    read_snapshot,
    write_snapshot,
)
from .propagator import apply_inverse_linear, apply_linear, dispersion  # noqa: F401
from .stepper import StepperConfig, evolve, nonlinear_kick, strang_step  # noqa: F401
