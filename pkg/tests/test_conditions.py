import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from gmhd import conditions as c
from gmhd.spectral import LOG, LOGLOG, UNIT, GFunction

EPS = 1e-9


def first_case(gamma1=5.5, gamma2=2.5, gamma3=1.0, n=3, p=3.0, q=3.0):
    return c.TheoremInstance(n, 0.0, 2.0, 0.0, p, p, q, gamma1, gamma2, gamma3, EPS)


class TestCheckHypotheses:
    def test_first_case_feasible(self):
        rep = c.check_hypotheses(first_case())
        assert rep.feasible, rep.failed()
        assert rep.min_gamma1 == pytest.approx(6 - (1 - EPS), abs=1e-12)
        assert rep.min_gamma2 == pytest.approx(2.0, abs=1e-12)

    def test_gamma_below_threshold(self):
        rep = c.check_hypotheses(first_case(gamma1=4.9))
        assert not rep.feasible and rep.failed() == ["K2_gamma1"]

    def test_r0_above_gamma3(self):
        inst = c.TheoremInstance(3, 0.9, 2.0, 0.0, 3, 3, 3, 8.0, 3.0, 0.5)
        rep = c.check_hypotheses(inst)
        assert not rep.get("r0_le_gamma3m").satisfied
        assert not rep.feasible

    def test_second_case_example(self):
        inst = c.TheoremInstance(3, 0.5, 2.0, 0.5, 3, 3, 3, 4.0, 2.0, 1.3, EPS)
        rep = c.check_hypotheses(inst)
        assert rep.min_gamma1 == pytest.approx(6 - (1.3 - EPS) - 1.0, abs=1e-12)
        assert rep.min_gamma2 == pytest.approx(1.5, abs=1e-12)
        # with r2 = r0 = 1/2 the requirement r2 - 1 + gamma3^- <= r0 needs gamma3^- <= 1
        assert not rep.get("r2_minus_1_plus_gamma3m_le_r0").satisfied

    def test_every_listed_condition_present(self):
        names = {x.name for x in c.check_hypotheses(first_case()).conditions}
        expected = {
            "p0_ge_n", "p1_ge_n", "p2_ge_n", "p0_le_p1", "p2_lt_2p0", "gamma3m_minus_1_le_r0", "r0_le_gamma3m",
            "gamma3m_le_r1", "r2_minus_1_plus_gamma3m_le_r0", "r2_le_r0", "r0_lt_n_over_p1", "2r1_ge_2",
            "2r1_ge_1_plus_gamma3m_minus_n_p0_plus_2n_p1", "r2_lt_n_over_p2", "r2_lt_2n_p2_minus_n_p0",
            "K2_gamma1", "K3_gamma1", "L_gamma2",
        }
        assert expected <= names

    def test_ambiguous_anchor_flagged(self):
        rep = c.check_hypotheses(first_case())
        assert rep.get("r0_lt_n_over_p0_plus_gamma3m").anchor.startswith("ambiguous")

    def test_json_shape(self):
        d = json.loads(json.dumps(c.check_hypotheses(first_case()).to_dict()))
        assert {"instance", "conditions", "feasible", "min_gamma1", "min_gamma2"} <= set(d)
        assert set(d["conditions"][0]) == {"name", "lhs", "rhs", "relation", "satisfied", "anchor"}

    def test_near_boundary_warning(self, caplog):
        inst = first_case(gamma1=5.0 + 2 * EPS)
        with caplog.at_level("WARNING"):
            c.check_hypotheses(inst)
        assert any("K2_gamma1" in r.message for r in caplog.records)

    def test_instance_validation(self):
        with pytest.raises(ValueError):
            c.TheoremInstance(1, 0, 0, 0, 3, 3, 3, 1, 1, 1)
        with pytest.raises(ValueError):
            c.TheoremInstance(3, 0, 0, 0, 3, 3, 3, 1, 1, 1, epsilon=0.0)


class TestMinGamma:
    def test_first_case(self):
        g1, g2 = c.min_gamma(first_case())
        assert g1 == pytest.approx(6 - 1 + 2 * EPS, abs=1e-12)
        assert g2 == pytest.approx(2 + EPS, abs=1e-12)

    def test_collapsed_indices(self):
        # r0 = r1 = r2 = r, p0 = p1 = p2 = p: K2 -> r - gamma3^-, K3 -> 1 - r - gamma3^- + n/p
        r, p, n, g3 = 1.1, 4.0, 3, 1.0
        inst = c.TheoremInstance(n, r, r, r, p, p, p, 9.0, 9.0, g3, EPS)
        assert c.rhs_k2(inst) == pytest.approx(r - (g3 - EPS), abs=1e-14)
        assert c.rhs_k3(inst) == pytest.approx(1 - r - (g3 - EPS) + n / p, abs=1e-14)
        assert c.min_gamma(inst)[0] == pytest.approx(max(r, 1 - r + n / p) - g3 + 2 * EPS, abs=1e-12)

    def test_r2_linearity(self):
        inst = c.TheoremInstance(3, 0.5, 2.0, 0.1, 3, 3, 4, 9.0, 9.0, 1.0)
        bumped = c.TheoremInstance(3, 0.5, 2.0, 0.35, 3, 3, 4, 9.0, 9.0, 1.0)
        assert c.rhs_k3(inst) - c.rhs_k3(bumped) == pytest.approx(0.5, abs=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-6, 2.0))
    def test_exactness(self, seed, delta):
        inst = c.sample_structural_instances(1, np.random.default_rng(seed))[0]
        g1, g2 = c.min_gamma(inst)
        above = c.check_hypotheses(c.with_gammas(inst, g1 + delta, g2 + delta))
        below = c.check_hypotheses(c.with_gammas(inst, g1 - delta, g2 - delta))
        assert above.feasible
        assert {"K2_gamma1", "K3_gamma1"} & set(below.failed()) and "L_gamma2" in below.failed()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0, 5), st.floats(0, 5))
    def test_monotone_in_gamma(self, seed, d1, d2):
        inst = c.sample_structural_instances(1, np.random.default_rng(seed))[0]
        g1, g2 = c.min_gamma(inst)
        base = c.with_gammas(inst, g1 + 1e-3, g2 + 1e-3)
        assert c.check_hypotheses(base).feasible
        assert c.check_hypotheses(c.with_gammas(base, base.gamma1 + d1, base.gamma2 + d2)).feasible


class TestSpecialCases:
    def test_first_case_numbers(self):
        rep = c.check_special_cases("thm_1_1", 3, 3.0, 3.0, 5.5, 2.5, 1.0, EPS)
        assert rep.feasible
        assert rep.min_gamma1 == pytest.approx(5.0, abs=1e-8)
        assert rep.min_gamma2 == pytest.approx(2.0, abs=1e-12)

    def test_first_case_q_too_large(self):
        rep = c.check_special_cases("thm_1_1", 3, 3.0, 6.0, 5.5, 2.5, 1.0, EPS)
        assert not rep.get("case:2p_gt_q").satisfied and not rep.feasible

    def test_second_case_numbers(self):
        rep = c.check_special_cases("thm_1_2", 3, 4.0, 4.0, 6.0, 3.0, 1.2, EPS)
        assert rep.min_gamma1 == pytest.approx(6 - (1.2 - EPS) - 0.75, abs=1e-12)
        assert rep.min_gamma1 == pytest.approx(4.05, abs=1e-8)
        assert rep.get("case:min_gamma1_closed_form").satisfied

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            c.check_special_cases("thm_9", 3, 3.0, 3.0, 5.0, 2.0, 1.0)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(2, 8), st.floats(1.0, 4.0), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
    def test_first_case_agrees_with_generic(self, n, pscale, qfrac, g3):
        p = n * pscale
        q = n + qfrac * (2 * p - n) * 0.999
        assume(q < 2 * p)
        rep = c.check_special_cases("thm_1_1", n, p, q, 7.0, 3.0, g3, EPS)
        generic = c.check_hypotheses(c.TheoremInstance(n, 0.0, 2.0, 0.0, p, p, q, 7.0, 3.0, g3, EPS))
        assert abs(rep.min_gamma1 - generic.min_gamma1) <= 1e-12
        assert abs(rep.min_gamma1 - (6 - (g3 - EPS))) <= 1e-12
        assert abs(rep.min_gamma2 - (1 + n / p)) <= 1e-12


class TestDominance:
    def test_first_case_all_nonnegative(self):
        res = c.dominance_audit(first_case())
        assert [r.name for r in res] == ["K1_over_J1", "K2_over_J2", "K3_over_J3", "K2_over_K1"]
        assert all(r.nonneg and r.matches for r in res)

    def test_boundary_case_zero(self):
        g3 = 0.8
        inst = c.TheoremInstance(3, g3 - EPS, 2.0, 0.0, 3, 3, 3, 9.0, 9.0, g3, EPS)
        assert c.dominance_audit(inst)[0].difference == 0.0

    def test_sampler_accepts_only_structural(self):
        insts = c.sample_structural_instances(50, np.random.default_rng(0))
        assert len(insts) == 50 and all(c.structural_ok(i) for i in insts)


class TestAdmissibility:
    def test_unit_harmonic(self):
        res = c.g_admissibility(UNIT, "tao", math.e)
        assert res.partial_integral == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("kind", ["tao", "wu", "yamazaki"])
    def test_unit_diverges(self, kind):
        assert c.g_admissibility(UNIT, kind, 1e3).diverging

    def test_log_tao_against_simpson(self):
        u = np.linspace(0.0, math.log(1e4), 200_001)
        oracle = integrate.simpson(1.0 / np.log(math.e + np.exp(u)) ** 4, x=u)
        got = c.g_admissibility(LOG, "tao", 1e4).partial_integral
        assert got == pytest.approx(oracle, abs=1e-8)

    @pytest.mark.parametrize("kind", ["tao", "wu", "yamazaki"])
    def test_log_family_is_integrable(self, kind):
        # int du / u^m with m >= 2 converges, so no divergence should be claimed
        assert not c.g_admissibility(LOG, kind, 1e3).diverging

    def test_loglog_increments_positive(self):
        res = c.g_admissibility(LOGLOG, "wu", 1e3)
        assert all(d > 0 for d in res.increments)

    def test_mixed_triple_and_errors(self):
        res = c.g_admissibility((UNIT, LOG, LOG), "yamazaki", 10.0)
        assert 0 < res.partial_integral < math.log(10.0)
        with pytest.raises(ValueError):
            c.g_admissibility(UNIT, "nope", 10.0)
        with pytest.raises(ValueError):
            c.g_admissibility(UNIT, "tao", 1.0)


class TestMikhlin:
    def test_unit(self):
        rep = c.mikhlin_check(UNIT, 3)
        assert rep.passed and all(v == 0.0 for v in rep.bounds.values())

    def test_log_first_derivative(self):
        s = np.logspace(0, 6, 241)
        rep = c.mikhlin_check(LOG, 1, samples=s)
        assert rep.passed
        assert rep.bounds[1] == pytest.approx(float(np.max(s / (math.e + s))), rel=1e-3)
        assert rep.bounds[1] < 1.0 + 1e-4

    @pytest.mark.parametrize("g", [LOG, LOGLOG])
    def test_builtin_pass_to_dimension_order(self, g):
        assert c.mikhlin_check(g, 3 // 2 + 1).passed

    def test_exponential_fails(self):
        assert not c.mikhlin_check(GFunction.custom("exp", np.exp), 1).passed

    def test_order_validation(self):
        with pytest.raises(ValueError):
            c.mikhlin_check(UNIT, 0)
