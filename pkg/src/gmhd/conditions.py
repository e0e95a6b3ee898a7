"""Parameter inequalities for local existence of gMHD-alpha mild solutions.

Every gamma_i^- is realized as gamma_i - epsilon with a single shared slack.
Strict inequalities are evaluated exactly; a warning is logged when a strict
comparison is decided by less than 1e-12.
"""

from __future__ import annotations

import logging
import math
import operator
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .spectral import GFunction

log = logging.getLogger(__name__)

__all__ = [
    "TheoremInstance",
    "Condition",
    "ConditionReport",
    "check_hypotheses",
    "min_gamma",
    "gamma1_thresholds",
    "gamma2_threshold",
    "special_case_instance",
    "check_special_cases",
    "DominanceResult",
    "dominance_audit",
    "sample_structural_instances",
    "AdmissibilityResult",
    "g_admissibility",
    "MikhlinReport",
    "mikhlin_check",
]

NEAR_BOUNDARY = 1e-12

_RELATIONS: dict[str, Callable[[float, float], bool]] = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class TheoremInstance:
    n: int
    r0: float
    r1: float
    r2: float
    p0: float
    p1: float
    p2: float
    gamma1: float
    gamma2: float
    gamma3: float
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        for name in ("p0", "p1", "p2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def g1m(self) -> float:
        return self.gamma1 - self.epsilon

    @property
    def g2m(self) -> float:
        return self.gamma2 - self.epsilon

    @property
    def g3m(self) -> float:
        return self.gamma3 - self.epsilon


@dataclass
class Condition:
    name: str
    lhs: float
    rhs: float
    relation: str
    satisfied: bool
    anchor: str


@dataclass
class ConditionReport:
    instance: TheoremInstance
    conditions: list[Condition]
    min_gamma1: float
    min_gamma2: float
    implied: list[Condition] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def get(self, name: str) -> Condition:
        for c in self.conditions + self.implied:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.satisfied]

    def to_dict(self) -> dict:
        return {
            "instance": asdict(self.instance),
            "conditions": [asdict(c) for c in self.conditions],
            "feasible": self.feasible,
            "min_gamma1": self.min_gamma1,
            "min_gamma2": self.min_gamma2,
            "implied": [asdict(c) for c in self.implied],
        }


def _cond(name: str, lhs: float, relation: str, rhs: float, anchor: str) -> Condition:
    ok = _RELATIONS[relation](lhs, rhs)
    if relation in ("<", ">") and abs(lhs - rhs) < NEAR_BOUNDARY:
        log.warning("condition %s decided within %.1e of its boundary (lhs=%r, rhs=%r)", name, NEAR_BOUNDARY, lhs, rhs)
    return Condition(name, float(lhs), float(rhs), relation, bool(ok), anchor)


# -- right-hand sides of the gamma conditions --------------------------------
# Each is the threshold gamma_1^- (or gamma_2^-) must strictly exceed.


def rhs_j1(i: TheoremInstance) -> float:
    n = i.n
    return 1 - i.r0 + i.r1 - i.g3m + n / i.p0


def rhs_k1(i: TheoremInstance) -> float:
    n = i.n
    return 1 - 2 * i.r0 + i.r1 + 2 * n / i.p0 - n / i.p1


def rhs_j2(i: TheoremInstance) -> float:
    n = i.n
    return 2 * i.r1 - 2 * i.r0 + 2 * n / i.p0 - 2 * n / i.p1


def rhs_k2(i: TheoremInstance) -> float:
    n = i.n
    return 3 * i.r1 - 2 * i.r0 - i.g3m + 3 * n / i.p0 - 3 * n / i.p1


def rhs_j3(i: TheoremInstance) -> float:
    n = i.n
    return i.r0 - 2 * i.r2 - i.g3m + 1 - n / i.p0 + 2 * n / i.p2


def rhs_k3(i: TheoremInstance) -> float:
    n = i.n
    return i.r1 - 2 * i.r2 - i.g3m + 1 + 2 * n / i.p2 - n / i.p1


def rhs_l(i: TheoremInstance) -> float:
    return 1 - i.r0 + i.n / i.p0


def gamma1_thresholds(inst: TheoremInstance) -> tuple[float, float]:
    """The two thresholds on gamma_1^- that survive the reduction (K2, K3)."""
    return rhs_k2(inst), rhs_k3(inst)


def gamma2_threshold(inst: TheoremInstance) -> float:
    return rhs_l(inst)


def _structural(i: TheoremInstance) -> list[Condition]:
    n, g3m = i.n, i.g3m
    return [
        _cond("p0_ge_n", i.p0, ">=", n, "hypothesis"),
        _cond("p1_ge_n", i.p1, ">=", n, "hypothesis"),
        _cond("p2_ge_n", i.p2, ">=", n, "hypothesis"),
        _cond("p0_le_p1", i.p0, "<=", i.p1, "hypothesis"),
        _cond("p2_lt_2p0", i.p2, "<", 2 * i.p0, "hypothesis"),
        _cond("r0_ge_0", i.r0, ">=", 0.0, "hypothesis"),
        _cond("r1_ge_0", i.r1, ">=", 0.0, "hypothesis"),
        _cond("r2_ge_0", i.r2, ">=", 0.0, "hypothesis"),
        _cond("gamma3m_minus_1_le_r0", g3m - 1, "<=", i.r0, "J1/K1"),
        _cond("r0_le_gamma3m", i.r0, "<=", g3m, "J1/K1"),
        _cond("gamma3m_le_r1", g3m, "<=", i.r1, "J1/K1"),
        _cond("r2_minus_1_plus_gamma3m_le_r0", i.r2 - 1 + g3m, "<=", i.r0, "J3/K3"),
        _cond("r2_le_r0", i.r2, "<=", i.r0, "L"),
        _cond("r0_lt_n_over_p1", i.r0, "<", n / i.p1, "J1/K1"),
        _cond("2r1_ge_2", 2 * i.r1, ">=", 2.0, "J2/K2"),
        _cond("2r1_ge_1_plus_gamma3m_minus_n_p0_plus_2n_p1", 2 * i.r1, ">=", 1 + g3m - n / i.p0 + 2 * n / i.p1, "J2/K2"),
        _cond("r2_lt_n_over_p2", i.r2, "<", n / i.p2, "J3/K3"),
        _cond("r2_lt_2n_p2_minus_n_p0", i.r2, "<", 2 * n / i.p2 - n / i.p0, "J3/K3"),
    ]


def _gamma_conditions(i: TheoremInstance) -> list[Condition]:
    return [
        _cond("K2_gamma1", i.g1m, ">", rhs_k2(i), "K2"),
        _cond("K3_gamma1", i.g1m, ">", rhs_k3(i), "K3"),
        _cond("L_gamma2", i.g2m, ">", rhs_l(i), "L"),
    ]


def _implied(i: TheoremInstance) -> list[Condition]:
    """Intermediate requirements that the final list makes redundant."""
    n, g3m = i.n, i.g3m
    return [
        _cond("J1_gamma1", i.g1m, ">", rhs_j1(i), "J1"),
        _cond("K1_gamma1", i.g1m, ">", rhs_k1(i), "K1"),
        _cond("J2_gamma1", i.g1m, ">", rhs_j2(i), "J2"),
        _cond("J3_gamma1", i.g1m, ">", rhs_j3(i), "J3"),
        _cond("r0_lt_n_over_p0", i.r0, "<", n / i.p0, "J1/K1"),
        _cond("r0_le_half_n_p0_plus_gamma3m", i.r0, "<=", 0.5 * (n / i.p0 + g3m), "K1"),
        # listed with the J1/K1 requirements but labelled after a J2 embedding
        _cond("r0_lt_n_over_p0_plus_gamma3m", i.r0, "<", n / i.p0 + g3m, "ambiguous:J1/K1|J2"),
        _cond("r1_ge_1_minus_n_p0_plus_n_p1", i.r1, ">=", 1 - n / i.p0 + n / i.p1, "J2/K2"),
        _cond("r2_minus_1_plus_gamma3m_le_r1", i.r2 - 1 + g3m, "<=", i.r1, "K3"),
        _cond("r0_minus_r2_lt_n_over_p0", i.r0 - i.r2, "<", n / i.p0, "L"),
        _cond("r0_le_n_over_p0", i.r0, "<=", n / i.p0, "L"),
    ]


def check_hypotheses(inst: TheoremInstance) -> ConditionReport:
    """Evaluate the full hypothesis list and both gamma thresholds."""
    conditions = _structural(inst) + _gamma_conditions(inst)
    return ConditionReport(
        instance=inst,
        conditions=conditions,
        min_gamma1=max(gamma1_thresholds(inst)),
        min_gamma2=gamma2_threshold(inst),
        implied=_implied(inst),
    )


def min_gamma(inst: TheoremInstance) -> tuple[float, float]:
    """Infimum admissible (gamma1, gamma2); the instance's own gammas are ignored."""
    return max(gamma1_thresholds(inst)) + inst.epsilon, gamma2_threshold(inst) + inst.epsilon


# -- special cases -------------------------------------------------------------


def special_case_instance(kind: str, n: int, p: float, q: float, gamma1: float, gamma2: float,
                          gamma3: float, epsilon: float = 1e-9) -> TheoremInstance:
    """General instance with p0 = p1 = p, p2 = q and the case's regularities."""
    if kind == "thm_1_1":
        r0, r1, r2 = 0.0, 2.0, 0.0
    elif kind == "thm_1_2":
        r0, r1, r2 = n / (2 * p), 2.0, n / (2 * q)
    else:
        raise ValueError(f"unknown special case {kind!r}; expected 'thm_1_1' or 'thm_1_2'")
    return TheoremInstance(n, r0, r1, r2, p, p, q, gamma1, gamma2, gamma3, epsilon)


def special_closed_form(kind: str, n: int, p: float, q: float, gamma3: float, epsilon: float) -> tuple[float, float]:
    g3m = gamma3 - epsilon
    if kind == "thm_1_1":
        return 6 - g3m, 1 + n / p
    return 6 - g3m - n / p, 1 + n / (2 * p)


def check_special_cases(kind: str, n: int, p: float, q: float, gamma1: float, gamma2: float,
                        gamma3: float, epsilon: float = 1e-9, tol: float = 1e-12) -> ConditionReport:
    inst = special_case_instance(kind, n, p, q, gamma1, gamma2, gamma3, epsilon)
    report = check_hypotheses(inst)
    g3m = gamma3 - epsilon
    if kind == "thm_1_1":
        pre = [
            _cond("case:p_ge_n", p, ">=", n, "case"),
            _cond("case:q_ge_n", q, ">=", n, "case"),
            _cond("case:2p_gt_q", 2 * p, ">", q, "case"),
            _cond("case:gamma3_ge_0", gamma3, ">=", 0.0, "case"),
            _cond("case:gamma3_le_1", gamma3, "<=", 1.0, "case"),
        ]
    else:
        pre = [
            _cond("case:p_ge_n", p, ">=", n, "case"),
            _cond("case:q_ge_n", q, ">=", n, "case"),
            _cond("case:q_lt_3p_over_2", q, "<", 1.5 * p, "case"),
            _cond("case:gamma3m_minus_1_le_n_2p", g3m - 1, "<=", n / (2 * p), "case"),
            _cond("case:n_2p_le_gamma3m", n / (2 * p), "<=", g3m, "case"),
            _cond("case:n_2q_minus_1_plus_gamma3m_le_n_2p", n / (2 * q) - 1 + g3m, "<=", n / (2 * p), "case"),
        ]
    closed1, closed2 = special_closed_form(kind, n, p, q, gamma3, epsilon)
    agree = [
        Condition("case:min_gamma1_closed_form", report.min_gamma1, closed1, "==",
                  abs(report.min_gamma1 - closed1) <= tol, "case"),
        Condition("case:min_gamma2_closed_form", report.min_gamma2, closed2, "==",
                  abs(report.min_gamma2 - closed2) <= tol, "case"),
    ]
    report.conditions.extend(pre + agree)
    return report


# -- dominance audit -----------------------------------------------------------


@dataclass
class DominanceResult:
    name: str
    difference: float
    closed_form: float
    matches: bool
    nonneg: bool


_DOMINANCE = [
    ("K1_over_J1", rhs_k1, rhs_j1, lambda i: i.g3m - i.r0 + i.n / i.p0 - i.n / i.p1),
    ("K2_over_J2", rhs_k2, rhs_j2, lambda i: i.r1 - i.g3m + i.n / i.p0 - i.n / i.p1),
    ("K3_over_J3", rhs_k3, rhs_j3, lambda i: i.r1 - i.r0 + i.n / i.p0 - i.n / i.p1),
    ("K2_over_K1", rhs_k2, rhs_k1, lambda i: 2 * i.r1 - 1 - i.g3m + i.n / i.p0 - 2 * i.n / i.p1),
]


def dominance_audit(inst: TheoremInstance, tol: float = 1e-12) -> list[DominanceResult]:
    """RHS(stronger) - RHS(weaker) for each reduction step, against its closed form."""
    out = []
    for name, strong, weak, closed in _DOMINANCE:
        diff = strong(inst) - weak(inst)
        cf = closed(inst)
        out.append(DominanceResult(name, diff, cf, abs(diff - cf) <= tol, diff >= -tol))
    return out


def structural_ok(inst: TheoremInstance) -> bool:
    return all(c.satisfied for c in _structural(inst))


def sample_structural_instances(count: int, rng: np.random.Generator, max_tries: int = 1_000_000) -> list[TheoremInstance]:
    """Rejection-sample instances satisfying every non-gamma hypothesis."""
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"only {len(out)} of {count} instances accepted after {max_tries} draws")
        n = int(rng.integers(2, 7))
        p0 = n * rng.uniform(1.0, 3.0)
        p1 = p0 * rng.uniform(1.0, 2.0)
        p2 = n * rng.uniform(1.0, 4.0)
        gamma3 = rng.uniform(0.01, 2.0)
        r0 = rng.uniform(0.0, 1.5)
        r1 = rng.uniform(0.0, 4.0)
        r2 = rng.uniform(0.0, 1.0)
        inst = TheoremInstance(n, r0, r1, r2, p0, p1, p2, 10.0, 10.0, gamma3)
        if structural_ok(inst):
            out.append(inst)
    return out


# -- damping-function admissibility -------------------------------------------

_ADMISSIBILITY_WEIGHTS = {
    # integrand is 1 / (s * weight(g1, g2, g3)(s))
    "tao": lambda g1, g2, g3, s: g1(s) ** 4,
    "wu": lambda g1, g2, g3, s: (g1(s) + g2(s)) ** 2,
    "yamazaki": lambda g1, g2, g3, s: g1(s) ** 2 * g2(s) * g3(s) ** 2,
}

_DECADES = (1e2, 1e4, 1e6)


@dataclass
class AdmissibilityResult:
    kind: str
    X: float
    partial_integral: float
    diverging: bool
    increments: tuple[float, float]
    increment_ratio: float
    reference_ratio: float


def _partial(kind, gs, X) -> float:
    weight = _ADMISSIBILITY_WEIGHTS[kind]
    # s = e^u turns ds/s into du
    val, _ = integrate.quad(lambda u: 1.0 / weight(*gs, math.exp(u)), 0.0, math.log(X),
                            epsabs=0.0, epsrel=1e-13, limit=500)
    return val


def g_admissibility(g: GFunction | tuple[GFunction, GFunction, GFunction], kind: str, X: float) -> AdmissibilityResult:
    """Partial integral over [1, X] and a divergence verdict from three decades.

    The verdict compares the growth of the partial integrals across
    X = 1e2, 1e4, 1e6 with that of the borderline divergent integrand
    1/(s log s): increments decaying faster than that are treated as
    summable.  This is evidence, not proof.
    """
    if kind not in _ADMISSIBILITY_WEIGHTS:
        raise ValueError(f"unknown admissibility kind {kind!r}")
    if not X > 1:
        raise ValueError(f"X must be > 1, got {X}")
    gs = tuple(g) if isinstance(g, tuple) else (g, g, g)
    value = _partial(kind, gs, X)
    i1, i2, i3 = (_partial(kind, gs, x) for x in _DECADES)
    d1, d2 = i2 - i1, i3 - i2
    ratio = d2 / d1 if d1 > 0 else 0.0
    u1, u2, u3 = (math.log(x) for x in _DECADES)
    reference = math.log(u3 / u2) / math.log(u2 / u1)
    return AdmissibilityResult(kind, X, value, ratio >= reference * (1 - 1e-9), (d1, d2), ratio, reference)


# -- Mikhlin-type derivative bounds -------------------------------------------


@dataclass
class MikhlinReport:
    bounds: dict[int, float]
    head: dict[int, float]
    tail: dict[int, float]
    passed: bool


def _central_difference(g, s: np.ndarray, k: int, rel_step: float) -> np.ndarray:
    h = rel_step * s
    acc = np.zeros_like(s)
    for j in range(k + 1):
        acc += (-1) ** j * math.comb(k, j) * g(s + (0.5 * k - j) * h)
    return acc / h**k


def mikhlin_check(g: GFunction, max_order: int, samples: np.ndarray | None = None,
                  rel_step: float = 1e-2, growth_limit: float = 2.0) -> MikhlinReport:
    """Estimate sup_s s^k |g^(k)(s)| on [1, 1e6] for 1 <= k <= max_order.

    Passes when every estimate is finite and the supremum over [1e3, 1e6]
    exceeds the one over [1, 1e3] by at most ``growth_limit``.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    s = np.logspace(0, 6, 241) if samples is None else np.asarray(samples, dtype=float)
    bounds, head, tail = {}, {}, {}
    passed = True
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_order + 1):
            scaled = s**k * np.abs(_central_difference(g, s, k, rel_step))
            scaled = np.where(np.isnan(scaled), np.inf, scaled)
            bounds[k] = float(np.max(scaled))
            head[k] = float(np.max(scaled[s <= 1e3], initial=0.0))
            tail[k] = float(np.max(scaled[s >= 1e3], initial=0.0))
            if not math.isfinite(bounds[k]) or tail[k] > growth_limit * max(head[k], 1e-12):
                passed = False
    return MikhlinReport(bounds, head, tail, passed)


def with_gammas(inst: TheoremInstance, gamma1: float, gamma2: float) -> TheoremInstance:
    return replace(inst, gamma1=gamma1, gamma2=gamma2)
