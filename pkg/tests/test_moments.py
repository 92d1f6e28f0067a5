"""Power-sum pair search and the block birthday simulation."""

from fractions import Fraction

import pytest

import permtest as pt
from permtest.errors import ParameterError, SearchBudgetError


def power_sum(values, j):
    return sum(v**j for v in values)


class TestFindMomentPair:
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_exact_power_sums(self, order):
        pair = pt.find_moment_pair(8, order)
        assert sorted(pair.values_p) != sorted(pair.values_q)
        for j in range(1, order + 1):
            assert power_sum(pair.values_p, j) == power_sum(pair.values_q, j)
            assert pair.power_sums[j - 1] == Fraction(
                power_sum(pair.values_p, j), pair.total**j
            )

    def test_order_one_any_distinct_pair(self):
        pair = pt.find_moment_pair(8, 1)
        assert pt.tv_distance(pair.p, pair.q) > 0
        assert pair.power_sums[0] == 1  # total mass

    def test_order_two_distance(self):
        pair = pt.find_moment_pair(8, 2)
        assert pt.tv_distance(pair.p, pair.q) >= 1 / 6 - 1e-12

    def test_order_three_distance(self):
        pair = pt.find_moment_pair(8, 3)
        assert pt.tv_distance(pair.p, pair.q) >= 0.1

    def test_known_certificates(self):
        # Independent witnesses that matched pairs of these orders exist
        # within the search bounds (the search may return better ones).
        a, b = (1, 5, 6), (2, 3, 7)
        assert power_sum(a, 1) == power_sum(b, 1) == 12
        assert power_sum(a, 2) == power_sum(b, 2) == 62
        c, d = (0, 4, 7, 11), (1, 2, 9, 10)
        for j in (1, 2, 3):
            assert power_sum(c, j) == power_sum(d, j)

    def test_sorted_output(self):
        pair = pt.find_moment_pair(8, 2)
        assert list(pair.values_p) == sorted(pair.values_p)
        assert list(pair.values_q) == sorted(pair.values_q)

    def test_deterministic(self):
        a = pt.find_moment_pair(8, 3)
        b = pt.find_moment_pair(8, 3)
        assert a.values_p == b.values_p and a.values_q == b.values_q

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            pt.find_moment_pair(8, 0)
        with pytest.raises(ParameterError):
            pt.find_moment_pair(2, 2)

    def test_budget_exhaustion_reported(self):
        # Order far past the budget: no pair with values <= 60, k <= 8.
        with pytest.raises(SearchBudgetError):
            pt.find_moment_pair(8, 6)


class TestBirthdayLoad:
    def test_cannot_exceed_order(self):
        assert pt.birthday_load(10, 2, 2, seed=1, reps=100) == 0.0

    def test_single_block_certain(self):
        assert pt.birthday_load(1, 2, 1, seed=1, reps=100) == 1.0

    def test_poissonization_regime(self):
        # Expected triple count m^3 / (6 blocks^2) ~ 0.021 at these sizes,
        # so the overload probability stays tiny.
        load = pt.birthday_load(10**4, 232, 2, seed=3, reps=200)
        assert load <= 0.05

    def test_weights_accepted(self):
        load = pt.birthday_load(4, 40, 2, seed=5, reps=200, weights=[1, 1, 1, 1])
        assert load == pytest.approx(
            pt.birthday_load(4, 40, 2, seed=5, reps=200), abs=1e-12
        )

    def test_weight_validation(self):
        with pytest.raises(ParameterError):
            pt.birthday_load(3, 5, 1, seed=0, reps=10, weights=[1, 2])

    def test_monotone_in_samples(self):
        lo = pt.birthday_load(100, 20, 2, seed=9, reps=400)
        hi = pt.birthday_load(100, 200, 2, seed=9, reps=400)
        assert hi >= lo
