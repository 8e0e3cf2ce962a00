import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taxlab.fiscal import (
    DELTA_CLIP_PP,
    TaxSchedule,
    US_FEDERAL_2024,
    UtilityParams,
    apply_delta,
    apply_taxes,
    bounded_utility,
    isoelastic_utility,
    marginal_rate,
    social_welfare,
    tax_due,
)


def schedules():
    """Hypothesis strategy for valid schedules with 1..6 brackets."""
    def build(parts):
        widths, rates = parts
        thresholds = [0.0]
        for w in widths:
            thresholds.append(thresholds[-1] + w)
        return TaxSchedule(tuple(thresholds), tuple(rates[: len(thresholds)]))

    return st.integers(min_value=1, max_value=6).flatmap(
        lambda b: st.tuples(
            st.lists(st.floats(1.0, 1e5), min_size=b - 1, max_size=b - 1),
            st.lists(st.floats(0.0, 0.99), min_size=b, max_size=b),
        ).map(build)
    )


def oracle_tax(schedule, z):
    # Independent route: integrate the marginal rate step function between
    # consecutive knots below z.
    knots = [t for t in schedule.thresholds if t < z] + [z]
    total = 0.0
    for lo, hi in zip(knots, knots[1:]):
        total += marginal_rate(schedule, 0.5 * (lo + hi)) * (hi - lo)
    return total


class TestTaxDue:
    def test_two_bracket_example(self):
        s = TaxSchedule((0.0, 10000.0), (0.1, 0.3))
        assert tax_due(s, 15000.0) == pytest.approx(2500.0, abs=1e-9)

    def test_zero_income(self):
        assert tax_due(US_FEDERAL_2024, 0.0) == 0.0

    def test_flat_zero_schedule(self):
        s = TaxSchedule((0.0,), (0.0,))
        assert tax_due(s, 123456.0) == 0.0

    def test_negative_income_rejected(self):
        with pytest.raises(ValueError):
            tax_due(US_FEDERAL_2024, -1.0)

    @given(schedules(), st.floats(0.0, 5e5))
    @settings(max_examples=150, deadline=None)
    def test_matches_marginal_rate_integral(self, s, z):
        assert tax_due(s, z) == pytest.approx(oracle_tax(s, z), rel=1e-12, abs=1e-9)

    @given(schedules(), st.floats(0.0, 5e5), st.floats(0.0, 5e5))
    @settings(max_examples=150, deadline=None)
    def test_monotone_in_income(self, s, z1, z2):
        lo, hi = sorted((z1, z2))
        assert tax_due(s, lo) <= tax_due(s, hi) + 1e-9

    @given(schedules())
    @settings(max_examples=80, deadline=None)
    def test_continuous_at_thresholds(self, s):
        for t in s.thresholds[1:]:
            eps = max(t * 1e-9, 1e-9)
            assert tax_due(s, t + eps) - tax_due(s, t - eps) == pytest.approx(
                0.0, abs=max(1.0, t) * 1e-6)

    @given(schedules(), st.floats(1.0, 5e5), st.floats(1.0, 5e5))
    @settings(max_examples=150, deadline=None)
    def test_progressive_average_rate(self, s, z1, z2):
        # With nondecreasing marginal rates the average rate is nondecreasing.
        rates = sorted(s.rates)
        s = TaxSchedule(s.thresholds, tuple(rates))
        lo, hi = sorted((z1, z2))
        assert tax_due(s, lo) / lo <= tax_due(s, hi) / hi + 1e-9


class TestMarginalRate:
    def test_right_continuous_at_threshold(self):
        s = TaxSchedule((0.0, 50000.0), (0.1, 0.3))
        assert marginal_rate(s, 50000.0) == 0.3
        assert marginal_rate(s, 49999.999) == 0.1

    def test_first_bracket(self):
        assert marginal_rate(US_FEDERAL_2024, 5000.0) == 0.10

    def test_top_bracket_unbounded(self):
        assert marginal_rate(US_FEDERAL_2024, 1e9) == 0.37


class TestSchedule:
    def test_first_threshold_must_be_zero(self):
        with pytest.raises(ValueError):
            TaxSchedule((100.0,), (0.1,))

    def test_thresholds_strictly_increasing(self):
        with pytest.raises(ValueError):
            TaxSchedule((0.0, 5.0, 5.0), (0.1, 0.1, 0.1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            TaxSchedule((0.0, 5.0), (0.1,))

    def test_rates_outside_bounds(self):
        with pytest.raises(ValueError):
            TaxSchedule((0.0,), (0.995,))
        with pytest.raises(ValueError):
            TaxSchedule((0.0,), (-0.01,))

    def test_json_roundtrip(self):
        d = US_FEDERAL_2024.to_dict()
        assert TaxSchedule.from_dict(d) == US_FEDERAL_2024

    def test_from_dict_defaults_bounds(self):
        s = TaxSchedule.from_dict({"thresholds": [0.0], "rates": [0.5]})
        assert s.rate_min == 0.0 and s.rate_max == 0.99

    def test_from_dict_missing_keys(self):
        with pytest.raises(ValueError):
            TaxSchedule.from_dict({"rates": [0.5]})


class TestApplyTaxes:
    def test_flat_half_two_workers(self):
        s = TaxSchedule((0.0,), (0.5,))
        post, total, rebate = apply_taxes(s, [100.0, 0.0])
        assert total == pytest.approx(50.0)
        assert rebate == pytest.approx(25.0)
        assert post == pytest.approx([75.0, 25.0])

    def test_budget_balance_exact(self):
        rng = np.random.default_rng(3)
        z = rng.uniform(0, 2e5, 500)
        post, _, _ = apply_taxes(US_FEDERAL_2024, z)
        assert np.sum(post) == pytest.approx(np.sum(z), rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            apply_taxes(US_FEDERAL_2024, [])

    def test_negative_income_rejected(self):
        with pytest.raises(ValueError):
            apply_taxes(US_FEDERAL_2024, [-5.0])

    @given(schedules(),
           st.lists(st.floats(0.0, 5e5), min_size=1, max_size=40))
    @settings(max_examples=150, deadline=None)
    def test_budget_balance_property(self, s, incomes):
        post, total, rebate = apply_taxes(s, incomes)
        scale = max(1.0, float(np.sum(incomes)))
        assert float(np.sum(post)) == pytest.approx(float(np.sum(incomes)),
                                                    abs=scale * 1e-9)
        assert rebate == pytest.approx(total / len(incomes))


class TestApplyDelta:
    def test_clip_then_clamp(self):
        s = TaxSchedule((0.0, 1000.0), (0.30, 0.30))
        out = apply_delta(s, [25.0, -30.0])
        assert out.rates == pytest.approx((0.50, 0.10))

    def test_clamp_to_rate_bounds(self):
        s = TaxSchedule((0.0,), (0.95,))
        assert apply_delta(s, [20.0]).rates[0] == 0.99
        s2 = TaxSchedule((0.0,), (0.05,))
        assert apply_delta(s2, [-20.0]).rates[0] == 0.0

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            apply_delta(US_FEDERAL_2024, [1.0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            apply_delta(TaxSchedule((0.0,), (0.5,)), [float("nan")])

    @given(schedules(),
           st.lists(st.floats(-100.0, 100.0), min_size=1, max_size=6))
    @settings(max_examples=150, deadline=None)
    def test_results_always_valid(self, s, deltas):
        deltas = (deltas * 6)[: s.n_brackets]
        out = apply_delta(s, deltas)
        for old, new in zip(s.rates, out.rates):
            assert s.rate_min <= new <= s.rate_max
            assert abs(new - old) <= DELTA_CLIP_PP / 100.0 + 1e-12

    def test_idempotent_at_bounds(self):
        s = TaxSchedule((0.0,), (0.99,))
        assert apply_delta(apply_delta(s, [20.0]), [20.0]).rates[0] == 0.99


class TestUtility:
    def test_sqrt_case(self):
        # eta=0.5, psi=0.01, delta=2, c=10000, l=40:
        # (100-1)/0.5 - 0.01*1600 = 198 - 16 = 182
        p = UtilityParams(eta=0.5, psi=0.01, delta=2.0)
        assert isoelastic_utility(10000.0, 40.0, p) == pytest.approx(182.0)

    def test_eta_zero_linear(self):
        p = UtilityParams(eta=0.0, psi=0.0, delta=2.0)
        assert isoelastic_utility(50.0, 10.0, p) == pytest.approx(49.0)

    def test_consumption_floor_applies(self):
        p = UtilityParams(eta=0.5, psi=0.0, delta=2.0)
        assert isoelastic_utility(-100.0, 0.0, p) == isoelastic_utility(0.0, 0.0, p)
        assert math.isfinite(isoelastic_utility(0.0, 0.0, p))

    def test_eta_one_rejected(self):
        with pytest.raises(ValueError):
            UtilityParams(eta=1.0)

    def test_bad_params_rejected(self):
        with pytest.raises(ValueError):
            UtilityParams(delta=1.0)
        with pytest.raises(ValueError):
            UtilityParams(psi=-0.1)
        with pytest.raises(ValueError):
            UtilityParams(eta=-0.5)
        with pytest.raises(ValueError):
            UtilityParams(phi=-1.0)

    def test_negative_labor_rejected(self):
        with pytest.raises(ValueError):
            isoelastic_utility(10.0, -1.0, UtilityParams())

    @given(st.floats(1.0, 1e6), st.floats(1.0, 1e6), st.floats(0.0, 80.0),
           st.sampled_from([0.0, 0.3, 0.5, 0.9, 1.5, 3.0]))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_consumption(self, c1, c2, labor, eta):
        p = UtilityParams(eta=eta, psi=0.01, delta=2.0)
        lo, hi = sorted((c1, c2))
        assert isoelastic_utility(lo, labor, p) <= isoelastic_utility(hi, labor, p) + 1e-12

    @given(st.floats(1.0, 1e6), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
    @settings(max_examples=200, deadline=None)
    def test_monotone_decreasing_in_labor(self, c, l1, l2):
        p = UtilityParams(eta=0.5, psi=0.02, delta=2.0)
        lo, hi = sorted((l1, l2))
        assert isoelastic_utility(c, hi, p) <= isoelastic_utility(c, lo, p) + 1e-12

    def test_bounded_penalty(self):
        p = UtilityParams(eta=0.5, psi=0.01, delta=2.0, phi=3.5)
        base = isoelastic_utility(10000.0, 40.0, p)
        assert bounded_utility(10000.0, 40.0, 1, p) == pytest.approx(base)
        assert bounded_utility(10000.0, 40.0, 0, p) == pytest.approx(base - 3.5)

    def test_bounded_flag_validated(self):
        with pytest.raises(ValueError):
            bounded_utility(10.0, 1.0, 2, UtilityParams())


class TestSocialWelfare:
    def test_weighted_sum(self):
        # u/z: 10/100 + 5/50 = 0.2
        assert social_welfare([100.0, 50.0], [10.0, 5.0]) == pytest.approx(0.2)

    def test_floor_guards_zero_income(self):
        out = social_welfare([0.0], [1e-6])
        assert out == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            social_welfare([1.0, 2.0], [1.0])

    def test_linear_in_utilities(self):
        z = [100.0, 200.0, 50.0]
        u1 = [1.0, 2.0, 3.0]
        u2 = [0.5, -1.0, 4.0]
        lhs = social_welfare(z, np.add(u1, u2))
        assert lhs == pytest.approx(social_welfare(z, u1) + social_welfare(z, u2))
