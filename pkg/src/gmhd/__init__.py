"""Pseudo-spectral laboratory for the generalized MHD-alpha system on the torus."""

from .spectral import GFunction, Grid, MultiplierSpec, SpectralField
from .conditions import TheoremInstance, check_hypotheses, min_gamma
from .solver import SolverConfig, picard_solve

__version__ = "0.1.0"

__all__ = [
    "GFunction",
    "Grid",
    "MultiplierSpec",
    "SpectralField",
    "TheoremInstance",
    "check_hypotheses",
    "min_gamma",
    "SolverConfig",
    "picard_solve",
]
