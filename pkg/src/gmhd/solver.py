"""Duhamel fixed-point map for gMHD-alpha and its Picard iteration.

The Duhamel integral is discretized by product trapezoidal quadrature on a
uniform node set t_j = j T / M: the nonlinear forcing is interpolated linearly
between nodes and integrated exactly against the semigroup kernel, mode by
mode.  The node t_0 = 0 carries the initial data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import TheoremInstance
from .nonlinear import DealiasRule, filtered_velocity, w1, w2, w3
from .spectral import (
    MultiplierSpec,
    SpectralField,
    apply_semigroup,
    divergence_residual,
    leray_project,
    sobolev_norm,
    symbol_array,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "Trajectory",
    "ContractionDiagnostics",
    "NonConvergence",
    "Blowup",
    "A1OutOfRange",
    "compute_a1",
    "semigroup_trajectory",
    "duhamel_phi",
    "picard_solve",
    "weighted_distance",
    "trajectory_norms",
    "diagnostics",
]

DIV_TOL = 1e-10


class A1OutOfRange(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, trajectory=None, diagnostics=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.diagnostics = diagnostics


class NonConvergence(SolverError):
    pass


class Blowup(SolverError):
    pass


@dataclass
class SolverConfig:
    T: float
    nodes: int = 16
    picard_tol: float = 1e-10
    max_iters: int = 50
    # lower bound on iterations, so a ratio can be estimated even when tol is hit early
    min_iters: int = 1
    a1: float = 0.0
    alpha: float = 1.0
    nu1: float = 1.0
    nu2: float = 1.0
    # Sobolev indices of the X x Y distance; defaults give plain L^2 norms
    r0: float = 0.0
    p0: float = 2.0
    r1: float = 0.0
    p1: float = 2.0
    r2: float = 0.0
    p2: float = 2.0
    dealias: DealiasRule = DealiasRule.TWO_THIRDS
    nonlinear: bool = True
    blowup_factor: float = 1e6

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if self.nodes < 2:
            raise ValueError(f"need at least 2 nodes, got {self.nodes}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 1 <= self.min_iters <= self.max_iters:
            raise ValueError("min_iters must lie in [1, max_iters]")
        if self.a1 < 0:
            raise ValueError("a1 must be >= 0")
        for name in ("alpha", "nu1", "nu2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        self.dealias = DealiasRule(self.dealias)

    @classmethod
    def from_instance(cls, inst: TheoremInstance, **kwargs) -> SolverConfig:
        """Norm indices and weight exponent taken from a theorem instance."""
        return cls(a1=compute_a1(inst), r0=inst.r0, p0=inst.p0, r1=inst.r1, p1=inst.p1,
                   r2=inst.r2, p2=inst.p2, **kwargs)

    @property
    def times(self) -> np.ndarray:
        return self.T * np.arange(self.nodes + 1) / self.nodes


@dataclass
class Trajectory:
    """States at ``times``; index 0 is t = 0 and holds the initial data."""

    times: np.ndarray
    u: list[SpectralField]
    B: list[SpectralField]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if not (len(self.times) == len(self.u) == len(self.B)):
            raise ValueError("times, u and B must have equal lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        grids = {f.grid for f in self.u + self.B}
        if len(grids) > 1:
            raise ValueError("all states must share one grid")

    @property
    def grid(self):
        return self.u[0].grid

    def v(self, spec3: MultiplierSpec, alpha: float = 1.0) -> list[SpectralField]:
        return [filtered_velocity(uj, spec3, alpha) for uj in self.u]

    def negate_B(self) -> Trajectory:
        return Trajectory(self.times.copy(), [x.copy() for x in self.u], [-x for x in self.B])


@dataclass
class ContractionDiagnostics:
    iterate_residuals: list[float] = field(default_factory=list)
    weighted_norms: list[dict] = field(default_factory=list)
    converged: bool = False

    @property
    def estimated_ratio(self) -> float | None:
        """Geometric mean ratio of successive residuals (needs >= 3 residuals)."""
        r = self.iterate_residuals
        if len(r) < 3:
            return None
        if r[0] == 0.0:
            return 0.0
        return (r[-1] / r[0]) ** (1.0 / (len(r) - 1))

    @property
    def iterations(self) -> int:
        return len(self.iterate_residuals)


def compute_a1(inst: TheoremInstance) -> float:
    """Weight exponent (r1 - r0 + n/p0 - n/p1) / gamma1^-, required to lie in [0, 1)."""
    if not inst.g1m > 0:
        raise A1OutOfRange(f"gamma1^- = {inst.g1m} must be > 0")
    a1 = (inst.r1 - inst.r0 + inst.n / inst.p0 - inst.n / inst.p1) / inst.g1m
    if not 0 <= a1 < 1:
        raise A1OutOfRange(f"a1 = {a1} outside [0, 1)")
    return a1


def _check_specs(specs):
    if len(specs) != 3:
        raise ValueError("need three multiplier specs (L1, L2, L3)")
    return specs


def _check_initial(u0: SpectralField, B0: SpectralField):
    if u0.grid != B0.grid:
        raise ValueError(f"grid mismatch between u0 and B0: {u0.grid} vs {B0.grid}")
    for name, f in (("u0", u0), ("B0", B0)):
        if f.ncomp != f.grid.dim:
            raise ValueError(f"{name} must have {f.grid.dim} components")
        res = divergence_residual(f)
        if res > DIV_TOL:
            raise ValueError(f"{name} is not divergence-free (residual {res:.3e})")


def semigroup_trajectory(u0, B0, specs, cfg: SolverConfig) -> Trajectory:
    """Linear part only: t -> (exp(t L1) u0, exp(t L2) B0)."""
    L1, L2, _ = _check_specs(specs)
    times = cfg.times
    u = [apply_semigroup(L1, t, u0, cfg.nu1) for t in times]
    B = [apply_semigroup(L2, t, B0, cfg.nu2) for t in times]
    return Trajectory(times, u, B)


def _forcing(u, B, specs, cfg: SolverConfig):
    """W1(u,v) + W2(u,v) - W1(B,B) and W3(u,B) - W3(B,u) at one node."""
    _, _, L3 = specs
    v = filtered_velocity(u, L3, cfg.alpha)
    rule, alpha = cfg.dealias, cfg.alpha
    f1 = w1(u, v, L3, rule, alpha) + w2(u, v, L3, rule, alpha) - w1(B, B, L3, rule, alpha)
    f2 = w3(u, B, rule) - w3(B, u, rule)
    return f1, f2


def _trapezoid_weights(lam: np.ndarray, h: float):
    """Exact weights of int_0^h exp(lam tau) [N_a tau/h + N_b (h - tau)/h] dtau.

    Returns (wa, wb) multiplying the left and right node values; tau is the
    distance back from the right node.
    """
    z = lam * h
    wa = np.empty_like(z)
    wb = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    wa[small] = 0.5 + zs / 3 + zs**2 / 8 + zs**3 / 30 + zs**4 / 144
    wb[small] = 0.5 + zs / 6 + zs**2 / 24 + zs**3 / 120 + zs**4 / 720
    zb = z[~small]
    ez = np.exp(zb)
    wa[~small] = (ez * (zb - 1) + 1) / zb**2
    wb[~small] = (np.expm1(zb) - zb) / zb**2
    return h * wa, h * wb


def _duhamel_integrals(forcing: list[np.ndarray], lam: np.ndarray, h: float) -> list[np.ndarray]:
    """I_j = int_0^{t_j} exp((t_j - s) lam) N(s) ds for every node j."""
    decay = np.exp(lam * h)
    wa, wb = _trapezoid_weights(lam, h)
    out = [np.zeros_like(forcing[0])]
    for j in range(1, len(forcing)):
        out.append(decay * out[-1] + wa * forcing[j - 1] + wb * forcing[j])
    return out


def duhamel_phi(u0, B0, traj: Trajectory, specs, cfg: SolverConfig) -> Trajectory:
    """Apply the fixed-point map Phi = (Phi1, Phi2) to a trajectory."""
    L1, L2, _ = _check_specs(specs)
    _check_initial(u0, B0)
    times = cfg.times
    if len(traj.times) != len(times) or not np.allclose(traj.times, times, rtol=0, atol=1e-14 * cfg.T):
        raise ValueError("trajectory nodes do not match the solver configuration")
    if traj.grid != u0.grid:
        raise ValueError("trajectory grid does not match the initial data")
    lin = semigroup_trajectory(u0, B0, specs, cfg)
    if not cfg.nonlinear:
        return lin
    f1, f2 = zip(*(_forcing(uj, Bj, specs, cfg) for uj, Bj in zip(traj.u, traj.B)))
    h = cfg.T / cfg.nodes
    grid = u0.grid
    lam1 = cfg.nu1 * symbol_array(L1, grid)
    lam2 = cfg.nu2 * symbol_array(L2, grid)
    I1 = _duhamel_integrals([f.coeffs for f in f1], lam1, h)
    I2 = _duhamel_integrals([f.coeffs for f in f2], lam2, h)
    u = [leray_project(SpectralField(grid, lu.coeffs - i).symmetrized()) for lu, i in zip(lin.u, I1)]
    B = [leray_project(SpectralField(grid, lb.coeffs - i).symmetrized()) for lb, i in zip(lin.B, I2)]
    u[0], B[0] = u0.copy(), B0.copy()
    return Trajectory(times, u, B)


def _norm_record(traj: Trajectory, ref_u=None, ref_B=None, cfg: SolverConfig = None) -> dict:
    nodes = range(1, len(traj.times))
    du = traj.u if ref_u is None else [a - b for a, b in zip(traj.u, ref_u)]
    dB = traj.B if ref_B is None else [a - b for a, b in zip(traj.B, ref_B)]
    return {
        "u_r0p0": max(sobolev_norm(du[j], cfg.r0, cfg.p0) for j in nodes),
        "u_weighted_r1p1": max(traj.times[j] ** cfg.a1 * sobolev_norm(du[j], cfg.r1, cfg.p1) for j in nodes),
        "B_r2p2": max(sobolev_norm(dB[j], cfg.r2, cfg.p2) for j in nodes),
    }


def weighted_distance(a: Trajectory, b: Trajectory, cfg: SolverConfig) -> float:
    """X x Y distance: sup ||du||_{r0,p0} + sup t^a1 ||du||_{r1,p1} + sup ||dB||_{r2,p2}."""
    rec = _norm_record(a, b.u, b.B, cfg)
    return rec["u_r0p0"] + rec["u_weighted_r1p1"] + rec["B_r2p2"]


def _trajectory_size(traj: Trajectory, cfg: SolverConfig) -> float:
    rec = _norm_record(traj, cfg=cfg)
    return rec["u_r0p0"] + rec["u_weighted_r1p1"] + rec["B_r2p2"]


def trajectory_norms(traj: Trajectory, specs, cfg: SolverConfig) -> dict:
    """The suprema entering the X and Y ball conditions, over the nodes in (0, T].

    Keys: ``X_offset`` = sup ||u - e^{tL1} u0||_{r0,p0}, ``X_weighted`` =
    sup t^a1 ||u||_{r1,p1}, ``Y_offset`` = sup ||B - e^{tL2} B0||_{r2,p2}.
    """
    L1, L2, _ = _check_specs(specs)
    t = traj.times
    nodes = range(1, len(t))
    u0, B0 = traj.u[0], traj.B[0]
    return {
        "X_offset": max(sobolev_norm(traj.u[j] - apply_semigroup(L1, t[j], u0, cfg.nu1), cfg.r0, cfg.p0) for j in nodes),
        "X_weighted": max(t[j] ** cfg.a1 * sobolev_norm(traj.u[j], cfg.r1, cfg.p1) for j in nodes),
        "Y_offset": max(sobolev_norm(traj.B[j] - apply_semigroup(L2, t[j], B0, cfg.nu2), cfg.r2, cfg.p2) for j in nodes),
    }


def picard_solve(u0, B0, specs, cfg: SolverConfig) -> tuple[Trajectory, ContractionDiagnostics]:
    """Iterate the Duhamel map from the semigroup trajectory until the
    weighted residual drops to ``cfg.picard_tol``."""
    _check_specs(specs)
    _check_initial(u0, B0)
    diag = ContractionDiagnostics()
    traj = semigroup_trajectory(u0, B0, specs, cfg)
    initial = _trajectory_size(traj, cfg)
    for it in range(1, cfg.max_iters + 1):
        nxt = duhamel_phi(u0, B0, traj, specs, cfg)
        res = weighted_distance(nxt, traj, cfg)
        size = _trajectory_size(nxt, cfg)
        diag.iterate_residuals.append(res)
        diag.weighted_norms.append(trajectory_norms(nxt, specs, cfg))
        traj = nxt
        log.debug("picard iteration %d: residual %.3e, size %.3e", it, res, size)
        if not (math.isfinite(size) and math.isfinite(res)) or (
            initial > 0 and size > cfg.blowup_factor * initial
        ):
            raise Blowup(f"iterate norm {size:.3e} exceeds {cfg.blowup_factor:g} x initial {initial:.3e}",
                         traj, diag)
        if res <= cfg.picard_tol and (it >= cfg.min_iters or res == 0.0):
            diag.converged = True
            return traj, diag
    raise NonConvergence(
        f"residual {diag.iterate_residuals[-1]:.3e} above tolerance {cfg.picard_tol:g} after "
        f"{cfg.max_iters} iterations; the horizon T may be too large for contraction",
        traj, diag,
    )


@dataclass
class DiagnosticSeries:
    t: np.ndarray
    div_residual: np.ndarray
    E_kin: np.ndarray
    E_mag: np.ndarray
    E_filtered: np.ndarray

    COLUMNS = ("t", "div_residual", "E_kin", "E_mag", "E_filtered")

    def rows(self):
        return zip(self.t, self.div_residual, self.E_kin, self.E_mag, self.E_filtered)


def diagnostics(traj: Trajectory, spec3: MultiplierSpec, alpha: float = 1.0) -> DiagnosticSeries:
    """Per-node divergence residual, ||u||^2, ||B||^2 and <u, v>."""
    div = [max(divergence_residual(u), divergence_residual(b)) for u, b in zip(traj.u, traj.B)]
    ekin = [u.inner(u) for u in traj.u]
    emag = [b.inner(b) for b in traj.B]
    efil = [u.inner(v) for u, v in zip(traj.u, traj.v(spec3, alpha))]
    return DiagnosticSeries(traj.times.copy(), np.array(div), np.array(ekin), np.array(emag), np.array(efil))
