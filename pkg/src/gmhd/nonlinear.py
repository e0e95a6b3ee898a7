"""Bilinear terms of the projected gMHD-alpha system.

All pointwise products are evaluated pseudo-spectrally: inputs are truncated,
transformed to the grid, multiplied, transformed back and truncated again.
"""

from __future__ import annotations

import enum

import numpy as np

from .spectral import (
    GridMismatchError,
    MultiplierSpec,
    SpectralField,
    _fftn,
    _ifftn,
    apply_helmholtz,
    apply_helmholtz_inverse,
    leray_project,
)

__all__ = [
    "DealiasRule",
    "tensor_divergence",
    "advective_form",
    "gradient_contraction",
    "w1",
    "w2",
    "w3",
    "filtered_velocity",
]


class DealiasRule(str, enum.Enum):
    TWO_THIRDS = "two_thirds"
    NONE = "none"


def _mask(f: SpectralField, rule: DealiasRule) -> np.ndarray | None:
    return f.grid.dealias_mask if DealiasRule(rule) is DealiasRule.TWO_THIRDS else None


def _grid_values(f: SpectralField, mask) -> np.ndarray:
    coeffs = f.coeffs if mask is None else f.coeffs * mask
    return _ifftn(coeffs, f.grid.axes).real


def _to_coeffs(values: np.ndarray, f: SpectralField, mask) -> np.ndarray:
    coeffs = _fftn(values, f.grid.axes)
    if mask is not None:
        coeffs *= mask
    return coeffs


def _same_grid(x: SpectralField, y: SpectralField):
    if x.grid != y.grid:
        raise GridMismatchError(f"grid mismatch: {x.grid} vs {y.grid}")
    if x.ncomp != x.grid.dim or y.ncomp != y.grid.dim:
        raise GridMismatchError("bilinear terms need vector fields with dim components")


def tensor_divergence(x: SpectralField, y: SpectralField, rule: DealiasRule = DealiasRule.TWO_THIRDS) -> SpectralField:
    """div(x (x) y), i.e. component j is sum_i d_i (x_i y_j).

    Equals (x . grad) y when x is divergence-free.
    """
    _same_grid(x, y)
    mask = _mask(x, rule)
    xs = _grid_values(x, mask)
    ys = _grid_values(y, mask)
    prod = xs[:, None] * ys[None, :]  # (i, j, ...)
    axes = tuple(a + 1 for a in x.grid.axes)
    coeffs = _fftn(prod, axes)
    if mask is not None:
        coeffs *= mask
    k = x.grid.wavevectors
    out = 1j * np.einsum("i...,ij...->j...", k, coeffs)
    return SpectralField(x.grid, out).symmetrized()


def advective_form(x: SpectralField, y: SpectralField, rule: DealiasRule = DealiasRule.TWO_THIRDS) -> SpectralField:
    """(x . grad) y with the spectral gradient of y."""
    _same_grid(x, y)
    mask = _mask(x, rule)
    xs = _grid_values(x, mask)
    ycoef = y.coeffs if mask is None else y.coeffs * mask
    k = x.grid.wavevectors
    out = np.zeros_like(y.coeffs)
    for j in range(y.ncomp):
        grads = _ifftn(1j * k * ycoef[j], x.grid.axes).real  # d_i y_j
        out[j] = _to_coeffs(np.sum(xs * grads, axis=0)[None], x, mask)[0]
    return SpectralField(x.grid, out).symmetrized()


def gradient_contraction(x: SpectralField, y: SpectralField, rule: DealiasRule = DealiasRule.TWO_THIRDS) -> SpectralField:
    """sum_i y_i grad(x_i), gradients taken spectrally."""
    _same_grid(x, y)
    mask = _mask(x, rule)
    ys = _grid_values(y, mask)
    xcoef = x.coeffs if mask is None else x.coeffs * mask
    k = x.grid.wavevectors
    acc = np.zeros((x.grid.dim,) + x.grid.shape)
    for i in range(x.ncomp):
        grad_xi = _ifftn(1j * k * xcoef[i], x.grid.axes).real
        acc += ys[i] * grad_xi
    return SpectralField(x.grid, _to_coeffs(acc, x, mask)).symmetrized()


def w1(x, y, spec3: MultiplierSpec, rule=DealiasRule.TWO_THIRDS, alpha: float = 1.0) -> SpectralField:
    """P (1 - alpha^2 L3)^{-1} div(x (x) y)."""
    return leray_project(apply_helmholtz_inverse(spec3, tensor_divergence(x, y, rule), alpha))


def w2(x, y, spec3: MultiplierSpec, rule=DealiasRule.TWO_THIRDS, alpha: float = 1.0) -> SpectralField:
    """P (1 - alpha^2 L3)^{-1} sum_i y_i grad(x_i)."""
    return leray_project(apply_helmholtz_inverse(spec3, gradient_contraction(x, y, rule), alpha))


def w3(x, y, rule=DealiasRule.TWO_THIRDS) -> SpectralField:
    """P div(x (x) y).  Not symmetric in its arguments."""
    return leray_project(tensor_divergence(x, y, rule))


def filtered_velocity(u: SpectralField, spec3: MultiplierSpec, alpha: float = 1.0) -> SpectralField:
    """v = (1 - alpha^2 L3) u."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return apply_helmholtz(spec3, u, alpha)
