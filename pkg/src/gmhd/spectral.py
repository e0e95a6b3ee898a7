"""Spectral fields on the periodic torus and the Fourier multipliers acting on them.

Coefficients follow the convention

    f(x) = sum_k c_k exp(i k.x),    c_k = mean_x f(x) exp(-i k.x),

so the constant mode is the mean of the field and ``sum |c_k|^2`` is the squared
L^2 norm under the normalized measure dx/(2 pi)^dim.  Arrays are stored in the
standard FFT index order, one leading axis per vector component.

Modes with any component equal to -N/2 (the Nyquist plane) are kept at zero:
odd multipliers such as ``i k`` cannot be made Hermitian there.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "GFunction",
    "UNIT",
    "LOG",
    "LOGLOG",
    "MultiplierSpec",
    "SpectralField",
    "GridMismatchError",
    "symbol_eval",
    "symbol_array",
    "apply_multiplier",
    "apply_semigroup",
    "apply_helmholtz",
    "apply_helmholtz_inverse",
    "leray_project",
    "divergence",
    "divergence_residual",
    "sobolev_norm",
    "lp_norm",
    "fft_workers",
]


def fft_workers() -> int:
    """Thread cap for the FFT backend, read from ``GMHD_THREADS``."""
    value = os.environ.get("GMHD_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _fftn(values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    return scipy.fft.fftn(values, axes=axes, norm="forward", workers=fft_workers())


def _ifftn(coeffs: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    return scipy.fft.ifftn(coeffs, axes=axes, norm="forward", workers=fft_workers())


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` points per axis on [0, 2 pi)^dim."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"points per axis must be even and >= 8, got {self.n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.dim + 1))

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Integer wave vectors, shape ``(dim, n, ..., n)``, components in [-n/2, n/2)."""
        k1 = np.rint(np.fft.fftfreq(self.n, 1.0 / self.n)).astype(np.int64)
        mesh = np.meshgrid(*([k1] * self.dim), indexing="ij")
        out = np.stack(mesh)
        out.flags.writeable = False
        return out

    @cached_property
    def k2(self) -> np.ndarray:
        out = np.sum(self.wavevectors.astype(float) ** 2, axis=0)
        out.flags.writeable = False
        return out

    @cached_property
    def kmag(self) -> np.ndarray:
        out = np.sqrt(self.k2)
        out.flags.writeable = False
        return out

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes with some component equal to -n/2."""
        out = np.any(self.wavevectors == -(self.n // 2), axis=0)
        out.flags.writeable = False
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the two-thirds rule (3 |k_j| < n on every axis)."""
        out = np.all(3 * np.abs(self.wavevectors) < self.n, axis=0)
        out.flags.writeable = False
        return out

    def points(self) -> np.ndarray:
        """Physical coordinates, shape ``(dim, n, ..., n)``."""
        x1 = 2.0 * np.pi * np.arange(self.n) / self.n
        return np.stack(np.meshgrid(*([x1] * self.dim), indexing="ij"))

    def index_of(self, k: Sequence[int]) -> tuple[int, ...]:
        """Array index of the wave vector ``k``."""
        if len(k) != self.dim:
            raise ValueError(f"wave vector {tuple(k)} has wrong length for dim={self.dim}")
        half = self.n // 2
        for kj in k:
            if not -half < kj < half:
                raise ValueError(f"wave vector {tuple(k)} outside the resolved band of n={self.n}")
        return tuple(int(kj) % self.n for kj in k)


def _unit(s):
    return np.ones_like(np.asarray(s, dtype=float))


def _log(s):
    return np.log(np.e + np.asarray(s, dtype=float))


def _loglog(s):
    return np.log(np.e + np.log(np.e + np.asarray(s, dtype=float)))


@dataclass(frozen=True)
class GFunction:
    """Damping function g applied to |xi| in the multiplier symbol.

    Built-in families satisfy g(0) = 1 and g >= 1.  ``custom`` wraps arbitrary
    callables for counterexamples; its family name is used for hashing, so
    keep names distinct.
    """

    family: str
    func: Callable = field(compare=False, repr=False)

    def __call__(self, s):
        return self.func(s)

    @classmethod
    def from_name(cls, name: str) -> GFunction:
        try:
            return _FAMILIES[name]
        except KeyError:
            raise ValueError(f"unknown g family {name!r}; expected one of {sorted(_FAMILIES)}") from None

    @classmethod
    def custom(cls, name: str, func: Callable) -> GFunction:
        return cls(f"custom:{name}", func)


UNIT = GFunction("unit", _unit)
LOG = GFunction("log", _log)
LOGLOG = GFunction("loglog", _loglog)
_FAMILIES = {g.family: g for g in (UNIT, LOG, LOGLOG)}


@dataclass(frozen=True)
class MultiplierSpec:
    """Dissipation operator with symbol -|xi|^gamma / g(|xi|).

    ``epsilon`` is the slack realizing gamma^- = gamma - epsilon; the operators
    themselves always use ``gamma``.
    """

    gamma: float
    g: GFunction = UNIT
    epsilon: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.gamma > 0 and not 0 < self.epsilon < self.gamma:
            raise ValueError(f"epsilon must lie in (0, gamma), got {self.epsilon}")

    @property
    def gamma_minus(self) -> float:
        return self.gamma - self.epsilon


def symbol_eval(spec: MultiplierSpec, k: Sequence[float]) -> float:
    """Symbol value -|k|^gamma / g(|k|) at a single wave vector."""
    kmag = math.sqrt(sum(float(kj) ** 2 for kj in k))
    if kmag == 0.0:
        return 0.0
    return -(kmag**spec.gamma) / float(spec.g(kmag))


@lru_cache(maxsize=64)
def _symbol_cached(spec: MultiplierSpec, grid: Grid) -> np.ndarray:
    kmag = grid.kmag
    with np.errstate(divide="ignore"):
        out = -np.power(kmag, spec.gamma) / spec.g(kmag)
    out[kmag == 0] = 0.0
    out.flags.writeable = False
    return out


def symbol_array(spec: MultiplierSpec, grid: Grid) -> np.ndarray:
    """Symbol evaluated on every wave vector of ``grid`` (read-only, cached)."""
    return _symbol_cached(spec, grid)


def _reverse_index(coeffs: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Array whose entry at k is the input entry at -k (indices mod n)."""
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


@dataclass
class SpectralField:
    """Vector (or scalar) field stored as Fourier coefficients.

    ``coeffs`` has shape ``(ncomp, n, ..., n)``.  The raw constructor stores
    what it is given; use :meth:`from_physical`, :meth:`plane_wave` or
    :meth:`symmetrized` to obtain a field representing a real function.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != self.grid.dim + 1 or self.coeffs.shape[1:] != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int | None = None) -> SpectralField:
        ncomp = grid.dim if ncomp is None else ncomp
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=complex))

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> SpectralField:
        values = np.asarray(values)
        if values.shape == grid.shape:
            values = values[None]
        coeffs = _fftn(values, grid.axes)
        return cls(grid, coeffs).symmetrized()

    @classmethod
    def plane_wave(
        cls,
        grid: Grid,
        k: Sequence[int],
        cos_amp: Sequence[float],
        sin_amp: Sequence[float] | None = None,
    ) -> SpectralField:
        """Real field ``cos_amp cos(k.x) + sin_amp sin(k.x)``."""
        a = np.asarray(cos_amp, dtype=float)
        b = np.zeros_like(a) if sin_amp is None else np.asarray(sin_amp, dtype=float)
        out = cls.zeros(grid, a.size)
        idx = grid.index_of(k)
        neg = grid.index_of([-kj for kj in k])
        if idx == neg:
            out.coeffs[(slice(None),) + idx] = a
        else:
            out.coeffs[(slice(None),) + idx] = 0.5 * (a - 1j * b)
            out.coeffs[(slice(None),) + neg] += 0.5 * (a + 1j * b)
        return out

    @classmethod
    def random(
        cls,
        grid: Grid,
        rng: np.random.Generator,
        ncomp: int | None = None,
        band: float | None = None,
        decay: float = 0.0,
    ) -> SpectralField:
        """Gaussian random real field.

        ``band`` keeps only modes with every |k_j| <= band; ``decay`` scales
        coefficients by (1 + |k|^2)^(-decay/2).
        """
        ncomp = grid.dim if ncomp is None else ncomp
        values = rng.standard_normal((ncomp,) + grid.shape)
        out = cls.from_physical(grid, values)
        if band is not None:
            out.coeffs *= np.all(np.abs(grid.wavevectors) <= band, axis=0)
        if decay:
            out.coeffs *= (1.0 + grid.k2) ** (-0.5 * decay)
        return out

    # -- basic algebra ------------------------------------------------------

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> SpectralField:
        return SpectralField(self.grid, self.coeffs.copy())

    def _check(self, other: SpectralField):
        if self.grid != other.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")
        if self.coeffs.shape != other.coeffs.shape:
            raise GridMismatchError(f"component mismatch: {self.ncomp} vs {other.ncomp}")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    # -- structure ----------------------------------------------------------

    def symmetrized(self) -> SpectralField:
        """Project onto real fields: average c(k) with conj(c(-k)), zero the Nyquist plane."""
        rev = _reverse_index(self.coeffs, self.grid.axes)
        coeffs = 0.5 * (self.coeffs + np.conj(rev))
        coeffs[:, self.grid.nyquist_mask] = 0.0
        return SpectralField(self.grid, coeffs)

    def hermitian_defect(self) -> float:
        """max |c(-k) - conj c(k)| including the Nyquist plane entries."""
        rev = _reverse_index(self.coeffs, self.grid.axes)
        defect = np.max(np.abs(rev - np.conj(self.coeffs)), initial=0.0)
        nyq = np.max(np.abs(self.coeffs[:, self.grid.nyquist_mask]), initial=0.0)
        return float(max(defect, nyq))

    def physical(self) -> np.ndarray:
        """Grid values; real for Hermitian fields, complex otherwise."""
        values = _ifftn(self.coeffs, self.grid.axes)
        if self.hermitian_defect() <= 1e-13 * max(1.0, float(np.max(np.abs(self.coeffs), initial=0.0))):
            return values.real
        return values

    def l2_norm(self) -> float:
        """Plancherel norm sqrt(sum |c_k|^2)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def inner(self, other: SpectralField) -> float:
        """Real part of the L^2 inner product under the normalized measure."""
        self._check(other)
        return float(np.real(np.sum(np.conj(self.coeffs) * other.coeffs)))

    def max_abs_diff(self, other: SpectralField) -> float:
        self._check(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0))


# -- multipliers ------------------------------------------------------------


def apply_multiplier(spec: MultiplierSpec, f: SpectralField) -> SpectralField:
    """Apply L: multiply every coefficient by the symbol."""
    return SpectralField(f.grid, f.coeffs * symbol_array(spec, f.grid))


def apply_semigroup(spec: MultiplierSpec, t: float, f: SpectralField, nu: float = 1.0) -> SpectralField:
    """Apply exp(t nu L)."""
    if not t >= 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    if t == 0:
        return f.copy()
    return SpectralField(f.grid, f.coeffs * np.exp((t * nu) * symbol_array(spec, f.grid)))


def _helmholtz_factor(spec: MultiplierSpec, grid: Grid, alpha: float) -> np.ndarray:
    return 1.0 - alpha**2 * symbol_array(spec, grid)


def apply_helmholtz(spec: MultiplierSpec, f: SpectralField, alpha: float = 1.0) -> SpectralField:
    """Apply (1 - alpha^2 L)."""
    return SpectralField(f.grid, f.coeffs * _helmholtz_factor(spec, f.grid, alpha))


def apply_helmholtz_inverse(spec: MultiplierSpec, f: SpectralField, alpha: float = 1.0) -> SpectralField:
    """Apply (1 - alpha^2 L)^{-1}; every factor lies in (0, 1]."""
    return SpectralField(f.grid, f.coeffs / _helmholtz_factor(spec, f.grid, alpha))


def leray_project(f: SpectralField) -> SpectralField:
    """Mode-wise projection (I - k k^T/|k|^2) onto divergence-free fields.

    Evaluated as k_perp (k_perp . u)/|k|^2 in 2D and -k x (k x u)/|k|^2 in 3D,
    which keeps the divergence of the output at rounding level relative to the
    output itself, even for nearly-gradient input.
    """
    grid = f.grid
    if f.ncomp != grid.dim:
        raise ValueError("leray_project needs a vector field with dim components")
    k = grid.wavevectors.astype(float)
    k2 = grid.k2.copy()
    k2[k2 == 0] = 1.0
    u = f.coeffs
    if grid.dim == 2:
        kp0, kp1 = -k[1], k[0]
        s = (kp0 * u[0] + kp1 * u[1]) / k2
        out = np.stack([kp0 * s, kp1 * s])
    else:
        w = np.stack(
            [
                k[1] * u[2] - k[2] * u[1],
                k[2] * u[0] - k[0] * u[2],
                k[0] * u[1] - k[1] * u[0],
            ]
        )
        out = -np.stack(
            [
                k[1] * w[2] - k[2] * w[1],
                k[2] * w[0] - k[0] * w[2],
                k[0] * w[1] - k[1] * w[0],
            ]
        ) / k2
    zero = (slice(None),) + (0,) * grid.dim
    out[zero] = u[zero]
    return SpectralField(grid, out)


def divergence(f: SpectralField) -> np.ndarray:
    """Spectral divergence coefficients sum_j i k_j u_j(k)."""
    k = f.grid.wavevectors
    return 1j * np.sum(k * f.coeffs, axis=0)


def divergence_residual(f: SpectralField) -> float:
    """max over k != 0 of |k . u(k)| / ||u(k)||, skipping exactly-zero modes."""
    k = f.grid.wavevectors.astype(float)
    kdotu = np.abs(np.sum(k * f.coeffs, axis=0))
    mag = np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0))
    live = mag > 0
    live[(0,) * f.grid.dim] = False
    if not np.any(live):
        return 0.0
    return float(np.max(kdotu[live] / mag[live]))


# -- norms ------------------------------------------------------------------


def lp_norm(values: np.ndarray, p: float) -> float:
    """L^p norm of grid values under the normalized measure.

    ``values`` has a leading component axis; the pointwise magnitude is the
    Euclidean norm over components.  ``p = inf`` gives the max norm.
    """
    mag = np.sqrt(np.sum(np.abs(values) ** 2, axis=0))
    if math.isinf(p):
        return float(np.max(mag))
    if p == 2:
        return float(np.sqrt(np.mean(mag**2)))
    peak = float(np.max(mag))
    if peak == 0.0:
        return 0.0
    return peak * float(np.mean((mag / peak) ** p)) ** (1.0 / p)


def bessel_potential(f: SpectralField, r: float) -> SpectralField:
    """Apply (1 - Laplacian)^{r/2}."""
    if r == 0:
        return f
    return SpectralField(f.grid, f.coeffs * (1.0 + f.grid.k2) ** (0.5 * r))


def sobolev_norm(f: SpectralField, r: float, p: float) -> float:
    """H^{r,p} norm: L^p grid quadrature of the Bessel potential of order r."""
    if not (math.isfinite(r) and math.isfinite(p)):
        raise ValueError(f"sobolev_norm needs finite r and p, got r={r}, p={p}")
    if p <= 1:
        raise ValueError(f"sobolev_norm needs p > 1, got {p}")
    if not np.all(np.isfinite(f.coeffs)):
        raise ValueError("sobolev_norm got non-finite coefficients")
    g = bessel_potential(f, r)
    return lp_norm(_ifftn(g.coeffs, f.grid.axes), p)
