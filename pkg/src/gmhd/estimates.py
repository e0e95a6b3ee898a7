"""Numerical checks of the operator estimates behind the existence argument.

All checks run on torus grids and report observed constants or exponents;
constants are compared across grid refinements, never against absolute values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .spectral import (
    Grid,
    MultiplierSpec,
    SpectralField,
    _ifftn,
    apply_helmholtz_inverse,
    apply_semigroup,
    bessel_potential,
    lp_norm,
    sobolev_norm,
    symbol_array,
)

__all__ = [
    "REPORT_HEADER",
    "SemigroupEstimateReport",
    "mode_maximization",
    "heat_smoothing_bound",
    "verify_semigroup_estimate",
    "RefinementReport",
    "verify_inverse_estimate",
    "IntegralEstimateReport",
    "singular_integral",
    "verify_integral_estimate",
    "embedding_exponent",
    "verify_sobolev_embedding",
    "verify_product_estimate",
]

REPORT_HEADER = "torus-grid proxy on [0,2pi)^n with normalized measure; not a verification in L^p(R^n)"


def _mode_field(grid: Grid, k) -> SpectralField:
    """Scalar cos(k.x)."""
    return SpectralField.plane_wave(grid, k, [1.0])


def _live_modes(grid: Grid) -> np.ndarray:
    return ~grid.nyquist_mask


# -- semigroup smoothing -------------------------------------------------------


def mode_maximization(spec: MultiplierSpec, grid: Grid, t: float, order: float,
                      homogeneous: bool = False, nu: float = 1.0) -> tuple[float, tuple[int, ...]]:
    """Closed-form sup over grid modes of w(k) exp(t nu symbol(k)).

    ``w(k)`` is (1+|k|^2)^(order/2), or |k|^order when ``homogeneous``.
    Returns the value and the maximizing wave vector.
    """
    weight = grid.kmag**order if homogeneous else (1.0 + grid.k2) ** (0.5 * order)
    vals = np.where(_live_modes(grid), weight * np.exp(t * nu * symbol_array(spec, grid)), -np.inf)
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    k = tuple(int(grid.wavevectors[(j,) + idx]) for j in range(grid.dim))
    return float(vals[idx]), k


def heat_smoothing_bound(t) -> np.ndarray:
    """sup over kappa > 0 of kappa exp(-t kappa^2) = (2 e t)^(-1/2)."""
    return (2.0 * math.e * np.asarray(t, dtype=float)) ** -0.5


@dataclass
class SemigroupEstimateReport:
    t: np.ndarray
    ratio: np.ndarray
    mode_oracle: np.ndarray | None
    homogeneous_oracle: np.ndarray
    fitted_exponent: float
    predicted_exponent: float
    predicted_exponent_gamma: float
    relative_error: float

    def rows(self):
        mode = self.mode_oracle if self.mode_oracle is not None else np.full_like(self.t, np.nan)
        pred = self.t**self.predicted_exponent
        return zip(self.t, self.ratio, mode, self.homogeneous_oracle, pred)

    columns = ("t", "observed_ratio", "mode_oracle", "homogeneous_oracle", "predicted_power")


def _fit_slope(t: np.ndarray, values: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(t), np.log(values), 1)
    return float(slope)


def verify_semigroup_estimate(spec: MultiplierSpec, r1: float, p1: float, r2: float, p2: float,
                              grid: Grid, t_values, trials: int = 8, seed: int = 0) -> SemigroupEstimateReport:
    """Observed R(t) = sup ||e^{tL} f||_{r2,p2} / ||f||_{r1,p1} and its log-log slope.

    The sup runs over ``trials`` random band-limited fields; when p1 = p2 = 2
    the analytically worst single mode is added, which attains the sup.
    ``t_values`` must sit above the grid's resolving scale, below which the
    worst case saturates.
    """
    if not 1 < p1 <= p2 < math.inf:
        raise ValueError(f"need 1 < p1 <= p2 < inf, got p1={p1}, p2={p2}")
    if r1 > r2:
        raise ValueError(f"need r1 <= r2, got r1={r1}, r2={r2}")
    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values <= 0):
        raise ValueError("t values must be positive")
    rng = np.random.default_rng(seed)
    fields = [SpectralField.random(grid, rng, ncomp=1, band=grid.n // 3) for _ in range(trials)]
    base = [sobolev_norm(f, r1, p1) for f in fields]
    hilbert = p1 == 2 and p2 == 2
    ratios, oracle, homog = [], [], []
    for t in t_values:
        best = max((sobolev_norm(apply_semigroup(spec, t, f), r2, p2) / b for f, b in zip(fields, base)), default=0.0)
        if hilbert:
            value, k = mode_maximization(spec, grid, t, r2 - r1)
            f = _mode_field(grid, k)
            best = max(best, sobolev_norm(apply_semigroup(spec, t, f), r2, p2) / sobolev_norm(f, r1, p1))
            oracle.append(value)
        homog.append(mode_maximization(spec, grid, t, r2 - r1, homogeneous=True)[0])
        ratios.append(best)
    ratios = np.array(ratios)
    n = grid.dim
    num = r2 - r1 + n / p1 - n / p2
    predicted = -num / spec.gamma_minus
    fitted = _fit_slope(t_values, ratios)
    rel = abs(fitted - predicted) / abs(predicted) if predicted else abs(fitted)
    return SemigroupEstimateReport(
        t=t_values,
        ratio=ratios,
        mode_oracle=np.array(oracle) if hilbert else None,
        homogeneous_oracle=np.array(homog),
        fitted_exponent=fitted,
        predicted_exponent=predicted,
        predicted_exponent_gamma=-num / spec.gamma if spec.gamma else math.inf,
        relative_error=rel,
    )


# -- refinement studies --------------------------------------------------------


@dataclass
class RefinementReport:
    sizes: list[int]
    sup_ratio: list[float]
    growth: list[float] = field(default_factory=list)
    limit: float = 0.05
    exponent: float | None = None

    def __post_init__(self):
        self.growth = [b / a - 1.0 for a, b in zip(self.sup_ratio, self.sup_ratio[1:])]

    @property
    def stable(self) -> bool:
        return all(math.isfinite(s) for s in self.sup_ratio) and all(g < self.limit for g in self.growth)

    columns = ("N", "sup_ratio", "growth_from_previous")

    def rows(self):
        growth = [math.nan] + self.growth
        return zip(self.sizes, self.sup_ratio, growth)


def _random_trials(grid: Grid, rng, trials: int, band: int, decay: float, ncomp: int = 1):
    return [SpectralField.random(grid, rng, ncomp=ncomp, band=band, decay=decay) for _ in range(trials)]


def verify_inverse_estimate(spec3: MultiplierSpec, r: float, p: float, dim: int = 2,
                            sizes=(16, 32, 64), trials: int = 8, seed: int = 0,
                            limit: float = 0.05) -> RefinementReport:
    """sup ||(1 - L3)^{-1} f||_{r,p} / ||f||_{r - gamma3^-, p} across grid sizes."""
    sup = []
    for n in sizes:
        grid = Grid(dim, n)
        rng = np.random.default_rng(seed)
        fields = _random_trials(grid, rng, trials, n // 3, 0.0)
        if p == 2:
            # the p = 2 sup is attained on a single mode
            factor = (1.0 + grid.k2) ** (0.5 * spec3.gamma_minus) / (1.0 - symbol_array(spec3, grid))
            factor = np.where(_live_modes(grid), factor, -np.inf)
            idx = np.unravel_index(int(np.argmax(factor)), factor.shape)
            k = tuple(int(grid.wavevectors[(j,) + idx]) for j in range(dim))
            fields.append(_mode_field(grid, k))
        best = max(
            sobolev_norm(apply_helmholtz_inverse(spec3, f), r, p) / sobolev_norm(f, r - spec3.gamma_minus, p)
            for f in fields
        )
        sup.append(best)
    return RefinementReport(list(sizes), sup, limit=limit)


# -- singular time integral ----------------------------------------------------


@dataclass
class IntegralEstimateReport:
    a: float
    b: float
    T: float
    t: np.ndarray
    values: np.ndarray
    closed_form: np.ndarray
    sup_value: float
    constant: float
    bound_exponent: float
    scaling_exponent: float
    max_rel_error: float

    columns = ("t", "quadrature", "closed_form", "rel_error")

    def rows(self):
        rel = np.abs(self.values - self.closed_form) / self.closed_form
        return zip(self.t, self.values, self.closed_form, rel)


def _unit_interval_integral(a: float, b: float, step: float) -> float:
    """int_0^1 (1 - x)^(-a) x^(-b) dx by double-exponential quadrature.

    x = expit(pi sinh y) clusters nodes at both endpoints; the Jacobian
    x (1 - x) pi cosh y absorbs the endpoint singularities.
    """
    decay = min(1.0 - a, 1.0 - b)
    y_max = math.log(2.0 * 45.0 / (math.pi * decay)) + 1.0
    m = int(math.ceil(y_max / step))
    y = step * np.arange(-m, m + 1)
    z = math.pi * np.sinh(y)
    log_x = special.log_expit(z)
    log_1mx = special.log_expit(-z)
    integrand = np.exp((1.0 - b) * log_x + (1.0 - a) * log_1mx) * math.pi * np.cosh(y)
    return float(step * np.sum(integrand))


def singular_integral(a: float, b: float, t: float, quad_points: int = 64) -> float:
    """int_0^t (t - s)^(-a) s^(-b) ds via s = t x; ``quad_points`` nodes per unit of y."""
    return t ** (1.0 - a - b) * _unit_interval_integral(a, b, 1.0 / quad_points)


def verify_integral_estimate(a: float, b: float, T: float, quad_points: int = 64,
                             samples: int = 16) -> IntegralEstimateReport:
    """Evaluate the integral on (0, T], compare with t^(1-a-b) B(1-a, 1-b)."""
    if not (a > 0 and b > 0):
        raise ValueError(f"need a, b > 0, got a={a}, b={b}")
    if a + b >= 1:
        raise ValueError(f"need a + b < 1, got {a + b}")
    if not T > 0:
        raise ValueError("T must be > 0")
    t = T * np.linspace(1.0 / samples, 1.0, samples)
    values = np.array([singular_integral(a, b, ti, quad_points) for ti in t])
    constant = float(special.beta(1.0 - a, 1.0 - b))
    closed = constant * t ** (1.0 - a - b)
    scaling = math.log(singular_integral(a, b, 2 * T, quad_points) / singular_integral(a, b, T, quad_points)) / math.log(2.0)
    return IntegralEstimateReport(
        a=a, b=b, T=T, t=t, values=values, closed_form=closed,
        sup_value=float(np.max(values)), constant=constant, bound_exponent=1.0 - a - b,
        scaling_exponent=scaling,
        max_rel_error=float(np.max(np.abs(values - closed) / closed)),
    )


# -- Sobolev embedding ---------------------------------------------------------


def embedding_exponent(s: float, r: float, p: float, n: int) -> float:
    """q with 1/q - r/n = 1/p - s/n."""
    if s < r:
        raise ValueError(f"need s >= r, got s={s}, r={r}")
    if not (s - r) * p < n:
        raise ValueError(f"need (s - r) p < n, got {(s - r) * p} >= {n}")
    inv_q = 1.0 / p - (s - r) / n
    if inv_q <= 0:
        raise ValueError("embedding exponent q is not positive")
    return 1.0 / inv_q


def verify_sobolev_embedding(s: float, r: float, p: float, dim: int = 2, sizes=(16, 32, 64),
                             trials: int = 8, seed: int = 0, decay: float = 1.0,
                             limit: float = 0.10) -> RefinementReport:
    """sup ||f||_{r,q} / ||f||_{s,p} over random band-limited fields, per grid size."""
    if p <= 1:
        raise ValueError("need p > 1")
    q = embedding_exponent(s, r, p, dim)
    sup = []
    for n in sizes:
        grid = Grid(dim, n)
        rng = np.random.default_rng(seed)
        fields = _random_trials(grid, rng, trials, n // 3, decay)
        sup.append(max(sobolev_norm(f, r, q) / sobolev_norm(f, s, p) for f in fields))
    return RefinementReport(list(sizes), sup, limit=limit, exponent=q)


# -- product estimate ----------------------------------------------------------


def _check_split(p, split):
    p1, p2, q1, q2 = split
    for x in split:
        if not 1 <= x <= math.inf:
            raise ValueError(f"Holder exponents must lie in [1, inf], got {split}")
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
    if abs(inv(p) - inv(p1) - inv(p2)) > 1e-12 or abs(inv(p) - inv(q1) - inv(q2)) > 1e-12:
        raise ValueError(f"split {split} does not satisfy 1/p = 1/p1 + 1/p2 = 1/q1 + 1/q2 for p={p}")


def _norm(f: SpectralField, r: float, p: float) -> float:
    """H^{r,p} norm allowing the endpoint exponents p = 1 and p = inf."""
    if 1 < p < math.inf:
        return sobolev_norm(f, r, p)
    return lp_norm(_ifftn(bessel_potential(f, r).coeffs, f.grid.axes), p)


def product_ratio(f: SpectralField, g: SpectralField, r: float, p: float, split) -> float:
    p1, p2, q1, q2 = split
    fg = SpectralField.from_physical(f.grid, f.physical() * g.physical())
    denom = _norm(f, 0.0, p1) * _norm(g, r, p2) + _norm(f, r, q1) * _norm(g, 0.0, q2)
    return _norm(fg, r, p) / denom


def verify_product_estimate(r: float, p: float, split, dim: int = 2, sizes=(16, 32),
                            trials: int = 8, seed: int = 0, decay: float = 1.0,
                            limit: float = 0.10) -> RefinementReport:
    """sup ||fg||_{r,p} / (||f||_{p1} ||g||_{r,p2} + ||f||_{r,q1} ||g||_{q2}) per grid size.

    Inputs are limited to |k_j| < N/4 so their product is resolved without aliasing.
    """
    if r < 0:
        raise ValueError("need r >= 0")
    if not 1 < p <= math.inf:
        raise ValueError("need 1 < p <= inf")
    _check_split(p, split)
    sup = []
    for n in sizes:
        grid = Grid(dim, n)
        rng = np.random.default_rng(seed)
        band = n // 4 - 1
        fs = _random_trials(grid, rng, trials, band, decay)
        gs = _random_trials(grid, rng, trials, band, decay)
        sup.append(max(product_ratio(f, g, r, p, split) for f, g in zip(fs, gs)))
    return RefinementReport(list(sizes), sup, limit=limit)
