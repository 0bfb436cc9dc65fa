"""Spectral tools and numerical experiments for the Degasperis-Procesi equation."""
from .config import Config, ConfigError, load_config
from .dynamics import SolverConfig, TrajectoryRecord, energy_functional, integrate, rhs, rk4_step, v0
from .littlewood_paley import BesovParams, besov_norm, block, blocks, low_cutoff
from .spectral import Field, Grid1D, Spectrum, make_grid
from .wavepackets import make_envelope, make_fn, make_gn

__version__ = "0.1.0"

__all__ = [
    "Config",
    "ConfigError",
    "load_config",
    "SolverConfig",
    "TrajectoryRecord",
    "energy_functional",
    "integrate",
    "rhs",
    "rk4_step",
    "v0",
    "BesovParams",
    "besov_norm",
    "block",
    "blocks",
    "low_cutoff",
    "Field",
    "Grid1D",
    "Spectrum",
    "make_grid",
    "make_envelope",
    "make_fn",
    "make_gn",
]
