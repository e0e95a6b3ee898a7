"""Named families of divergence-free initial data."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .spectral import Grid, SpectralField, leray_project

FAMILIES = ("zero", "single_mode", "mode_sum", "taylor_green_like", "random_band_limited")


def transverse_direction(k: Sequence[int]) -> np.ndarray:
    """Unit vector orthogonal to ``k``."""
    k = np.asarray(k, dtype=float)
    if not np.any(k):
        raise ValueError("wave vector must be nonzero")
    if k.size == 2:
        e = np.array([-k[1], k[0]])
    else:
        a = np.array([0.0, 0.0, 1.0]) if abs(k[2]) < np.linalg.norm(k) else np.array([1.0, 0.0, 0.0])
        e = np.cross(k, a)
    return e / np.linalg.norm(e)


def single_mode(grid: Grid, k: Sequence[int], amplitude: float) -> SpectralField:
    """amplitude * e cos(k.x) with e orthogonal to k."""
    return SpectralField.plane_wave(grid, k, amplitude * transverse_direction(k))


def mode_sum(grid: Grid, modes: Sequence[Sequence[int]], amplitude: float) -> SpectralField:
    out = SpectralField.zeros(grid)
    for k in modes:
        out = out + single_mode(grid, k, amplitude)
    return out


def taylor_green_like(grid: Grid, amplitude: float) -> SpectralField:
    x = grid.points()
    if grid.dim == 2:
        vals = np.stack([np.sin(x[0]) * np.cos(x[1]), -np.cos(x[0]) * np.sin(x[1])])
    else:
        c = np.cos(x[2])
        vals = np.stack([np.sin(x[0]) * np.cos(x[1]) * c, -np.cos(x[0]) * np.sin(x[1]) * c, np.zeros_like(c)])
    # projection clears the rounding-level divergence left by the transform
    return leray_project(SpectralField.from_physical(grid, amplitude * vals))


def random_band_limited(grid: Grid, amplitude: float, rng: np.random.Generator, band: int = 4) -> SpectralField:
    """Projected Gaussian field on |k_j| <= band, scaled to L^2 norm ``amplitude``."""
    f = leray_project(SpectralField.random(grid, rng, band=band))
    norm = f.l2_norm()
    return f * (amplitude / norm) if norm else f


def make_initial(grid: Grid, family: str, amplitude: float = 1.0, *, k=None, modes=None,
                 band: int = 4, rng: np.random.Generator | None = None) -> SpectralField:
    if family == "zero":
        return SpectralField.zeros(grid)
    if family == "single_mode":
        if k is None:
            raise ValueError("single_mode needs a wave vector k")
        return single_mode(grid, k, amplitude)
    if family == "mode_sum":
        if not modes:
            raise ValueError("mode_sum needs a list of wave vectors")
        return mode_sum(grid, modes, amplitude)
    if family == "taylor_green_like":
        return taylor_green_like(grid, amplitude)
    if family == "random_band_limited":
        if rng is None:
            raise ValueError("random_band_limited needs a random generator")
        return random_band_limited(grid, amplitude, rng, band)
    raise ValueError(f"unknown initial-data family {family!r}; expected one of {FAMILIES}")
