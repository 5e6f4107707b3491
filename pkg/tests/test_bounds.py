"""Closed-form bound values against independently evaluated constants.

Non-trivial expected values were frozen from 50-digit evaluations of the
displayed formulas (mpmath); trivial ones are asserted directly.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smbounds import bounds as bnd

# 50-digit formula evaluations, truncated to double precision
LOG_H_2_1_1 = -0.46209812037329687  # -(2/3) log 2
B1_1_1 = 0.68314375796392577       # exp{-1/(1 + sqrt(5/3) + 1/3)}
B2_1_1 = 0.68728927879097220       # e^{-3/8}
PRO_1_1 = 0.78615137775742329      # exp{-arcsinh(1/2)/2}
HAEUSLER_8_1_1 = 1.7767894190798570e-4   # exp{8(1 - log 8)}
F_8_1 = 7.6943736113082207e-6
BENNETT_INV_THR_1_1 = 1.7475468957064284  # 1/3 + sqrt(2)


def close(a, b, rel=1e-12, abs_=1e-15):
    return a == pytest.approx(b, rel=rel, abs=abs_)


class TestTailQueryAndLogProb:
    def test_query_validation(self):
        with pytest.raises(ValueError):
            bnd.TailQuery(-0.1, 1.0, 2)
        with pytest.raises(ValueError):
            bnd.TailQuery(1.0, 0.0, 2)
        with pytest.raises(ValueError):
            bnd.TailQuery(1.0, 1.0, 0)
        with pytest.raises(ValueError):
            bnd.TailQuery(math.nan, 1.0, 2)

    def test_logprob_clamps(self):
        assert bnd.LogProb.from_log(0.5).log_value == 0.0
        assert bnd.LogProb.from_log(-2.0).value == pytest.approx(math.exp(-2.0))
        assert bnd.LogProb.from_log(-math.inf).value == 0.0
        with pytest.raises(ValueError):
            bnd.LogProb(0.1)
        with pytest.raises(ValueError):
            bnd.LogProb.from_log(math.nan)

    @given(st.floats(-1e6, 0.0))
    def test_logprob_linear_view_in_unit_interval(self, lv):
        assert 0.0 <= bnd.LogProb(lv).value <= 1.0


class TestHoeffding:
    def test_x_zero_is_one(self):
        assert bnd.hoeffding(bnd.TailQuery(0.0, 1.0, 5)).value == 1.0

    def test_moderate_value(self):
        lp = bnd.hoeffding(bnd.TailQuery(1.0, 1.0, 2))
        assert close(lp.log_value, LOG_H_2_1_1)
        assert close(lp.value, 2.0 ** (-2.0 / 3.0))

    def test_x_equals_n_convention(self):
        # the x = n branch is a definition, not a limit
        assert close(bnd.hoeffding(bnd.TailQuery(2.0, 1.0, 2)).value, 1.0 / 9.0)

    def test_limit_from_below_matches_convention(self):
        at_n = bnd.hoeffding(bnd.TailQuery(2.0, 1.0, 2)).log_value
        just_below = bnd.hoeffding(bnd.TailQuery(2.0 - 1e-9, 1.0, 2)).log_value
        assert at_n == pytest.approx(just_below, abs=1e-7)

    def test_indicator_beyond_horizon(self):
        assert bnd.hoeffding(bnd.TailQuery(3.0, 1.0, 2)).value == 0.0

    def test_large_n_stability(self):
        lp = bnd.hoeffding(bnd.TailQuery(1.0, 1.0, 10**6))
        assert math.isfinite(lp.log_value)
        assert lp.log_value == pytest.approx(bnd.freedman(1.0, 1.0).log_value, rel=1e-6)

    def test_horizon_gap_decays_like_one_over_n(self):
        lf = bnd.freedman(2.0, 1.5).log_value
        gaps = [abs(bnd.hoeffding(bnd.TailQuery(2.0, 1.5, n)).log_value - lf)
                for n in (10**3, 10**4, 10**5)]
        for a, b in zip(gaps, gaps[1:]):
            assert a / b == pytest.approx(10.0, rel=0.05)


class TestChainMembers:
    def test_freedman(self):
        assert bnd.freedman(0.0, 2.0).value == 1.0
        assert close(bnd.freedman(1.0, 1.0).value, math.e / 4.0)

    def test_bennett(self):
        assert bnd.bennett(0.0, 1.0).value == 1.0
        assert close(bnd.bennett(1.0, 1.0).value, B1_1_1)

    def test_bernstein(self):
        assert bnd.bernstein(0.0, 1.0).value == 1.0
        assert close(bnd.bernstein(1.0, 1.0).value, B2_1_1)

    def test_prohorov(self):
        assert bnd.prohorov(0.0, 1.0).value == 1.0
        assert close(bnd.prohorov(1.0, 1.0).value, PRO_1_1)

    def test_spot_orderings_at_1_1(self):
        f = bnd.freedman(1.0, 1.0).value
        assert f <= B1_1_1 <= B2_1_1
        assert bnd.hoeffding(bnd.TailQuery(1.0, 1.0, 2)).value <= PRO_1_1

    @given(
        st.floats(0.0, 50.0),
        st.floats(0.05, 20.0),
        st.integers(1, 10**4),
    )
    @settings(max_examples=300)
    def test_chain_property(self, x, v, n):
        lh = bnd.hoeffding(bnd.TailQuery(x, v, n)).log_value
        lf = bnd.freedman(x, v).log_value
        lb1 = bnd.bennett(x, v).log_value
        lb2 = bnd.bernstein(x, v).log_value
        lpro = bnd.prohorov(x, v).log_value
        slack = 1e-10
        assert lh <= lf + slack
        assert lf <= lb1 + slack
        assert lb1 <= lb2 + slack
        assert lh <= lpro + slack
        assert max(lh, lf, lb1, lb2, lpro) <= 0.0


class TestAzumaFamily:
    def test_branches_tie_at_x0_b1(self):
        u, branch = bnd.azuma_denominator(0.0, 10, 1.0)
        assert u == 40.0 and branch == "tie"
        assert bnd.azuma_refined(0.0, 10, 1.0).bound.value == 1.0

    def test_variance_branch(self):
        az = bnd.azuma_refined(1.0, 10, 0.5)
        assert az.branch == "variance"
        assert close(az.u, 64.0 / 3.0)
        assert close(az.bound.value, math.exp(-3.0 / 32.0))

    def test_range_branch_past_the_crossover(self):
        # crossover at x = (3/4) n (1-b)^2 = 1.875
        az = bnd.azuma_refined(3.0, 10, 0.5)
        assert az.branch == "range"
        assert az.u == 22.5
        assert close(az.bound.value, math.exp(-0.8))

    def test_bounded_range_matches_rescaled_query(self):
        assert bnd.hoeffding_bounded(0.0, 4, 0.5).value == 1.0
        got = bnd.hoeffding_bounded(1.0, 2, 0.5).log_value
        assert close(got, LOG_H_2_1_1, rel=1e-9, abs_=1e-12)

    def test_bounded_range_below_refined_azuma(self):
        ho = bnd.hoeffding_bounded(1.0, 2, 0.5).log_value
        az = bnd.azuma_refined(1.0, 2, 0.5).bound.log_value
        assert ho <= az + 1e-12

    def test_supermartingale_regime_rejects_large_b(self):
        with pytest.raises(ValueError):
            bnd.hoeffding_bounded(1.0, 2, 1.5, supermartingale=True)
        assert bnd.hoeffding_bounded(1.0, 2, 1.5).value <= 1.0  # martingale form is fine


class TestTruncationFamily:
    def test_fuk_nagaev_trivial(self):
        fn = bnd.fuk_nagaev(0.0, 1.0, 1.0, 5, 0.0)
        assert fn.total.value == 1.0

    def test_fuk_nagaev_rescales(self):
        fn = bnd.fuk_nagaev(2.0, 2.0, 2.0, 2, 0.0)
        assert close(fn.h_term.log_value, LOG_H_2_1_1)
        assert close(fn.total.value, 2.0 ** (-2.0 / 3.0))

    def test_fuk_nagaev_adds_exceedance(self):
        fn = bnd.fuk_nagaev(2.0, 2.0, 2.0, 2, 0.25)
        assert close(fn.total.value, 2.0 ** (-2.0 / 3.0) + 0.25)
        with pytest.raises(ValueError):
            bnd.fuk_nagaev(1.0, 1.0, 1.0, 2, 1.5)

    def test_courbot(self):
        assert bnd.courbot(0.0, 1.0, 1.0, 0.0, 0.0).value == 1.0
        assert close(bnd.courbot(2.0, 2.0, 2.0, 0.0, 0.0).value, math.e / 4.0)
        with pytest.raises(ValueError):
            bnd.courbot(1.0, 1.0, 1.0, -0.1, 0.0)

    def test_courbot_dominates_fuk_nagaev(self):
        # the one-term form is smaller and the max-exceedance term is smaller
        for x, y, v, n in [(2.0, 1.0, 1.5, 5), (4.0, 2.0, 2.0, 10), (1.0, 0.5, 1.0, 3)]:
            per_step = 0.01
            p_max = 1.0 - (1.0 - per_step) ** n
            fn = bnd.fuk_nagaev(x, y, v, n, p_max)
            cb = bnd.courbot(x, y, v, n * per_step, 0.0)
            assert fn.total.log_value <= cb.log_value + 1e-12

    def test_haeusler_clamps(self):
        # raw exponent 2(1 - log 2) > 0, so the probability clamps to 1
        assert bnd.haeusler(2.0, 1.0, 1.0).value == 1.0
        # boundary x y = e v^2 gives exactly 1
        assert bnd.haeusler(math.e, 1.0, 1.0).log_value == pytest.approx(0.0, abs=1e-15)

    def test_haeusler_above_rescaled_f_on_clamped_region(self):
        lp = bnd.haeusler(8.0, 1.0, 1.0)
        assert close(lp.value, HAEUSLER_8_1_1, rel=1e-12)
        assert close(bnd.freedman(8.0, 1.0).value, F_8_1, rel=1e-12)
        assert bnd.freedman(8.0, 1.0).value <= lp.value


class TestIndependentCaseForms:
    def test_bennett_classic(self):
        assert bnd.bennett_classic(0.0, 1.0, 3).value == 1.0
        assert close(bnd.bennett_classic(1.0, 1.0, 1).value, math.e / 4.0)

    def test_bennett_classic_is_rescaled_freedman(self):
        got = bnd.bennett_classic(0.5, 1.0, 4).log_value
        want = bnd.freedman(2.0, 2.0).log_value
        assert got == pytest.approx(want, abs=1e-13)

    def test_hoeffding_independent(self):
        assert bnd.hoeffding_independent(0.0, 1.0, 5).value == 1.0
        got = bnd.hoeffding_independent(0.5, 0.5, 2).log_value
        assert close(got, LOG_H_2_1_1)
        with pytest.raises(ValueError):
            bnd.hoeffding_independent(1.0, 1.0, 2)

    def test_hoeffding_improves_bennett(self):
        for t in (0.1, 0.3, 0.6):
            for s2 in (0.25, 1.0, 4.0):
                ho = bnd.hoeffding_independent(t, s2, 4).log_value
                be = bnd.bennett_classic(t, s2, 4).log_value
                assert ho <= be + 1e-12

    @given(
        st.floats(0.001, 0.95),
        st.floats(0.05, 8.0),
        st.integers(1, 40),
    )
    @settings(max_examples=200)
    def test_reduction_identity_property(self, t, s2, n):
        li = bnd.hoeffding_independent(t, s2, n).log_value
        lh = bnd.hoeffding(bnd.TailQuery(n * t, math.sqrt(n * s2), n)).log_value
        assert li == pytest.approx(lh, abs=1e-12)


class TestBennettInverse:
    def test_continuity_at_zero(self):
        thr, lp = bnd.bennett_inverse(1e-12, 1.0)
        assert thr == pytest.approx(0.0, abs=1e-5)
        assert lp.value == pytest.approx(1.0, abs=1e-9)

    def test_threshold_values(self):
        thr, lp = bnd.bennett_inverse(1.0, 1.0)
        assert close(thr, BENNETT_INV_THR_1_1)
        assert lp.value == pytest.approx(math.exp(-1.0))
        thr2, _ = bnd.bennett_inverse(2.0, 0.5)
        assert close(thr2, 5.0 / 3.0)

    def test_bound_reached_at_threshold(self):
        for level in (0.5, 1.0, 2.0, 5.0, 10.0):
            for v in (0.25, 1.0, 4.0):
                thr, _ = bnd.bennett_inverse(level, v)
                assert bnd.bennett(thr, v).value <= math.exp(-level) * (1.0 + 1e-12)


def test_default_grid_covers_boundary_points():
    grid = bnd.default_grid()
    # 10 x-values per (v, n) cell minus duplicates where 0.3n/0.7n/n land on
    # the fixed x list
    assert 300 <= len(grid) <= 350
    assert any(q.x == q.n for q in grid)
    assert any(q.x == 0.0 for q in grid)
    assert {q.n for q in grid} == set(bnd.GRID_N)
