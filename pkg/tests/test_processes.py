"""Increment-law zoo: moments, truncation, sampling, and event logic."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smbounds import processes as prc

ZOO = [
    prc.TwoPointExtremal(0.5),
    prc.TwoPointExtremal(1.0),
    prc.TwoPointBounded(0.5),
    prc.TwoPointBounded(1.0),
    prc.DriftedTwoPoint(0.5, 0.1),
    prc.CenteredExponential(),
]


class TestLawConstruction:
    def test_extremal_atoms(self):
        law = prc.TwoPointExtremal(0.25)
        assert law.atoms() == ((1.0, 0.2), (-0.25, 0.8))
        assert law.mean() == pytest.approx(0.0, abs=1e-15)
        assert law.second_moment() == pytest.approx(0.25, rel=1e-15)

    def test_bounded_second_moment(self):
        assert prc.TwoPointBounded(0.5).second_moment() == pytest.approx(0.5, rel=1e-15)

    def test_drifted_atoms_and_moments(self):
        law = prc.DriftedTwoPoint(0.5, 0.1)
        (hi, p_hi), (lo, p_lo) = law.atoms()
        assert (hi, lo) == (0.9, -0.6)
        assert (p_hi, p_lo) == pytest.approx((1 / 3, 2 / 3), rel=1e-15)
        assert law.mean() == pytest.approx(-0.1, abs=1e-15)
        assert law.second_moment() == pytest.approx(0.51, rel=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            prc.TwoPointExtremal(0.0)
        with pytest.raises(ValueError):
            prc.TwoPointBounded(-1.0)
        with pytest.raises(ValueError):
            prc.DriftedTwoPoint(0.5, 0.6)  # delta > b

    def test_parse_law_round_trip(self):
        for law in ZOO:
            assert prc.parse_law(law.label()) == law
        with pytest.raises(ValueError):
            prc.parse_law("gaussian:1")
        with pytest.raises(ValueError):
            prc.parse_law("drifted:0.5")


class TestMoments:
    def test_truncated_below_support_top(self):
        assert prc.TwoPointBounded(0.5).truncated_second_moment(2.0) == pytest.approx(0.5)
        # only the -sigma2 atom survives truncation at y = 0.5
        assert prc.TwoPointExtremal(1.0).truncated_second_moment(0.5) == pytest.approx(0.5)

    def test_truncated_tends_to_full_variance(self):
        for law in ZOO:
            full = law.second_moment()
            assert law.truncated_second_moment(1e6) == pytest.approx(full, abs=1e-9)

    def test_cexp_truncated_closed_form(self):
        # E[(Z-1)^2 1{Z <= c}] = 1 - e^{-c} (c^2 + 1)
        law = prc.CenteredExponential()
        for y in (0.5, 1.0, 3.0, 10.0):
            c = y + 1.0
            want = 1.0 - math.exp(-c) * (c * c + 1.0)
            assert law.truncated_second_moment(y) == pytest.approx(want, rel=1e-12)

    def test_exceedance(self):
        per, p_max = prc.exceedance_tail(prc.TwoPointBounded(0.5), 1.0, 5)
        assert per == 0.0 and p_max == 0.0
        per, p_max = prc.exceedance_tail(prc.CenteredExponential(), 3.0, 5)
        assert per == pytest.approx(math.exp(-4.0), rel=1e-14)
        assert p_max == pytest.approx(1.0 - (1.0 - math.exp(-4.0)) ** 5, rel=1e-12)
        s2 = 0.7
        per, _ = prc.exceedance_tail(prc.TwoPointExtremal(s2), 0.5, 1)
        assert per == pytest.approx(s2 / (1 + s2), rel=1e-14)


class TestSampling:
    N_BIG = 10**6

    def test_rademacher_case(self):
        law = prc.TwoPointBounded(1.0)
        inc = law.sample(prc.make_generator(1), (self.N_BIG,))
        assert set(np.unique(inc)) == {-1.0, 1.0}
        assert abs(inc.mean()) < 4.0 / math.sqrt(self.N_BIG)

    def test_bounded_support_over_many_draws(self):
        for law in ZOO:
            if law.support_max <= 1.0:
                inc = law.sample(prc.make_generator(2), (self.N_BIG,))
                assert inc.max() <= 1.0

    def test_second_moment_within_five_se(self):
        for i, law in enumerate(ZOO):
            inc = law.sample(prc.make_generator(100 + i), (self.N_BIG,))
            m2 = law.second_moment()
            atoms = law.atoms()
            if atoms is not None:
                m4 = sum(p * v**4 for v, p in atoms)
            else:
                m4 = 9.0  # E[(Z-1)^4] for Z ~ Exp(1)
            se = math.sqrt(max(m4 - m2 * m2, 1e-30) / self.N_BIG)
            assert abs((inc * inc).mean() - m2) < 5.0 * se + 1e-12

    def test_supermartingale_drift(self):
        law = prc.DriftedTwoPoint(0.5, 0.1)
        inc = law.sample(prc.make_generator(3), (self.N_BIG,))
        var = law.second_moment() - law.mean() ** 2
        se = math.sqrt(var / self.N_BIG)
        assert inc.mean() <= 0.0 + 5.0 * se

    def test_extremal_clt_band(self):
        law = prc.TwoPointExtremal(0.5)
        inc = law.sample(prc.make_generator(4), (10**4,))
        assert abs(inc.mean()) < 4.0 * math.sqrt(0.5 / 10**4)


class TestSimulatePath:
    def test_deterministic(self):
        law = prc.TwoPointExtremal(0.5)
        a = prc.simulate_path(law, 10, seed=42)
        b = prc.simulate_path(law, 10, seed=42)
        assert np.array_equal(a.increments, b.increments)
        assert np.array_equal(a.partial_sums, b.partial_sums)

    def test_record_contents(self):
        law = prc.TwoPointBounded(0.5)
        path = prc.simulate_path(law, 8, seed=7, y=0.75)
        assert len(path) == 8
        assert np.allclose(path.partial_sums, np.cumsum(path.increments))
        assert np.allclose(path.qc, 0.5 * np.arange(1, 9))
        assert np.all(np.diff(path.qc) > 0)
        assert np.all(path.trunc_var <= path.qc + 1e-15)
        assert path.max_increment == path.increments.max()

    def test_no_trunc_var_without_y(self):
        path = prc.simulate_path(prc.TwoPointBounded(0.5), 3, seed=1)
        assert path.trunc_var is None


def _manual_path(increments, m2, trunc_rate=None):
    inc = np.asarray(increments, dtype=float)
    steps = np.arange(1, len(inc) + 1, dtype=float)
    return prc.PathRecord(
        increments=inc,
        partial_sums=np.cumsum(inc),
        qc=m2 * steps,
        trunc_var=trunc_rate * steps if trunc_rate is not None else None,
        max_increment=float(inc.max()),
    )


class TestEventHit:
    def test_boundary_hit_at_first_step_is_inclusive(self):
        path = _manual_path([1.0, -1.0], m2=1.0)
        spec = prc.EventSpec(1.0, 1.0, prc.EventVariant.STOPPED_ANY_K)
        assert prc.event_hit(path, spec)

    def test_budget_exceeded_at_the_only_reach(self):
        # X first reaches x at k=1 but the budget is already blown there
        path = _manual_path([1.0, -1.0], m2=1.0)
        spec = prc.EventSpec(1.0, 0.7, prc.EventVariant.STOPPED_ANY_K)  # v^2 < m2
        assert not prc.event_hit(path, spec)
        max_spec = prc.EventSpec(1.0, 0.7, prc.EventVariant.MAX_WITH_FINAL_QC)
        assert not prc.event_hit(path, max_spec)
        assert path.partial_sums.max() >= 1.0

    def test_nesting_implications_on_random_paths(self):
        law = prc.TwoPointBounded(1.0)
        for seed in range(200):
            path = prc.simulate_path(law, 12, seed=seed)
            for x, v in [(2.0, 3.0), (0.0, 3.5), (4.0, 3.6), (1.0, 2.0)]:
                final = prc.event_hit(path, prc.EventSpec(x, v, prc.EventVariant.FINAL_ONLY))
                max_qc = prc.event_hit(path, prc.EventSpec(x, v, prc.EventVariant.MAX_WITH_FINAL_QC))
                stopped = prc.event_hit(path, prc.EventSpec(x, v, prc.EventVariant.STOPPED_ANY_K))
                assert (not final) or max_qc
                assert (not max_qc) or stopped

    def test_truncated_requires_trunc_var(self):
        path = _manual_path([1.0], m2=1.0)
        spec = prc.EventSpec(0.5, 1.0, prc.EventVariant.TRUNCATED_ANY_K, y=2.0)
        with pytest.raises(ValueError):
            prc.event_hit(path, spec)
        path_t = _manual_path([1.0], m2=1.0, trunc_rate=0.5)
        assert prc.event_hit(path_t, spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            prc.EventSpec(1.0, 1.0, prc.EventVariant.TRUNCATED_ANY_K)  # y missing
        with pytest.raises(ValueError):
            prc.EventSpec(1.0, 1.0, prc.EventVariant.FINAL_ONLY, y=1.0)  # stray y
        with pytest.raises(ValueError):
            prc.EventSpec(1.0, 0.0, prc.EventVariant.FINAL_ONLY)

    def test_vectorized_matches_scalar(self):
        law = prc.TwoPointExtremal(0.5)
        inc = law.sample(prc.make_generator(11), (64, 9))
        for variant in prc.EventVariant:
            y = 0.8 if variant is prc.EventVariant.TRUNCATED_ANY_K else None
            spec = prc.EventSpec(1.5, 1.9, variant, y=y)
            flags = prc.event_hits(law, inc, spec)
            for i in range(64):
                steps = np.arange(1, 10, dtype=float)
                path = prc.PathRecord(
                    increments=inc[i],
                    partial_sums=np.cumsum(inc[i]),
                    qc=law.second_moment() * steps,
                    trunc_var=law.truncated_second_moment(y) * steps if y else None,
                    max_increment=float(inc[i].max()),
                )
                assert flags[i] == prc.event_hit(path, spec)


class TestGeneratorKeying:
    def test_streams_are_distinct(self):
        a = prc.make_generator(1, 0).random(8)
        b = prc.make_generator(1, 1).random(8)
        assert not np.array_equal(a, b)

    def test_same_key_same_stream(self):
        a = prc.make_generator(5, 3).random(8)
        b = prc.make_generator(5, 3).random(8)
        assert np.array_equal(a, b)

    @given(st.integers(0, 2**63), st.integers(0, 2**20))
    @settings(max_examples=25)
    def test_keying_is_stable_under_reconstruction(self, seed, stream):
        a = prc.make_generator(seed, stream).random(4)
        b = prc.make_generator(seed, stream).random(4)
        assert np.array_equal(a, b)
