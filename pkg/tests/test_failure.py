import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import binomial_failure_enumeration, hypergeometric_failure_table
from shardrisk.failure import (
    DeltaResult,
    FailureQuery,
    delta_exact_binomial,
    delta_exact_hypergeometric,
    failure_threshold,
    theorem1_bounds,
    union_bound_fixed_sizes,
    union_bound_hypergeometric,
    union_bound_random_sizes,
)
from shardrisk.partitions import (
    AverageAdversary,
    CommitteeLayout,
    ExactAdversary,
    layout_from_split,
)
from shardrisk.probcore import binomial_tail_and_cdf, kl_divergence

THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)


def avg_query(sizes, rate, threshold=THIRD) -> FailureQuery:
    return FailureQuery(CommitteeLayout(sizes), AverageAdversary(rate), threshold)


def exact_query(sizes, count, threshold=THIRD) -> FailureQuery:
    return FailureQuery(CommitteeLayout(sizes), ExactAdversary(count), threshold)


class TestFailureThreshold:
    def test_examples(self):
        assert failure_threshold(THIRD, 5) == 2
        assert failure_threshold(THIRD, 3) == 2  # boundary: A * size integral
        assert failure_threshold(HALF, 2) == 2

    def test_rejects_degenerate_fraction(self):
        with pytest.raises(ValueError):
            failure_threshold(Fraction(1), 5)
        with pytest.raises(ValueError):
            failure_threshold(0.0, 5)


class TestDeltaExactBinomial:
    def test_two_committees_of_five(self):
        result = delta_exact_binomial(avg_query((5, 5), 0.25))
        assert result.delta == pytest.approx(0.59954833984375, abs=1e-12)
        assert result.method == "exact-binomial"
        assert not result.clamped and result.precondition_ok

    def test_no_adversaries(self):
        assert delta_exact_binomial(avg_query((4, 4, 4), 0.0)).delta == 0.0

    def test_certain_adversaries(self):
        assert delta_exact_binomial(avg_query((2,), 1.0)).delta == 1.0

    def test_log_survival_consistent(self):
        result = delta_exact_binomial(avg_query((5, 5), 0.25))
        assert result.log_survival == pytest.approx(2 * math.log(0.6328125), abs=1e-13)

    @pytest.mark.parametrize("sizes", [(2, 3), (4, 4), (1, 2, 3), (5, 5)])
    @pytest.mark.parametrize("rate", [0.25, 0.6])
    @pytest.mark.parametrize("threshold", [THIRD, HALF])
    def test_matches_exhaustive_enumeration(self, sizes, rate, threshold):
        expected = binomial_failure_enumeration(sizes, rate, threshold)
        got = delta_exact_binomial(avg_query(sizes, rate, threshold)).delta
        assert got == pytest.approx(expected, abs=1e-10)

    def test_per_committee_rates(self):
        query = FailureQuery(
            CommitteeLayout((5, 5)), AverageAdversary((0.25, 0.0)), THIRD
        )
        assert delta_exact_binomial(query).delta == pytest.approx(0.3671875, abs=1e-12)


class TestDeltaExactHypergeometric:
    def test_two_committees_two_adversaries(self):
        result = delta_exact_hypergeometric(exact_query((2, 2), 2, HALF))
        assert result.delta == pytest.approx(1 / 3, abs=1e-12)

    def test_concentration_impossible(self):
        # M no larger than any committee's allowance: no failure possible
        assert delta_exact_hypergeometric(exact_query((3, 3), 1)).delta == 0.0

    def test_saturated_committees(self):
        assert delta_exact_hypergeometric(exact_query((3, 3), 6)).delta == 1.0

    def test_node_cap_enforced(self):
        with pytest.raises(ValueError):
            delta_exact_hypergeometric(exact_query((200, 200), 100), node_cap=300)

    @pytest.mark.parametrize("sizes", [(2, 2), (3, 4), (1, 2, 3), (4, 4, 4)])
    @pytest.mark.parametrize("threshold", [THIRD, HALF])
    def test_matches_exhaustive_enumeration(self, sizes, threshold):
        fail, total = hypergeometric_failure_table(sizes, threshold)
        n = sum(sizes)
        for m in range(n + 1):
            expected = fail[m] / math.comb(n, m)
            got = delta_exact_hypergeometric(exact_query(sizes, m, threshold)).delta
            assert got == pytest.approx(expected, abs=1e-10), (sizes, m)

    def test_monotone_nonincreasing_in_threshold(self):
        thresholds = [Fraction(1, 5), Fraction(1, 3), Fraction(1, 2), Fraction(4, 5)]
        values = [
            delta_exact_hypergeometric(exact_query((10, 10), 7, a)).delta
            for a in thresholds
        ]
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


class TestTheorem1Bounds:
    def test_sandwich_on_two_committees(self):
        query = avg_query((5, 5), 0.25)
        exact = delta_exact_binomial(query).delta
        lower, ash, ferrante = theorem1_bounds(query)
        assert lower.delta <= exact + 1e-12
        assert exact <= ferrante.delta + 1e-12
        assert ferrante.delta <= ash.delta + 1e-12

    def test_single_committee_tail_chain(self):
        query = avg_query((100,), 0.25)
        _, log_tail = binomial_tail_and_cdf(100, 0.25, 33)
        exact_tail = math.exp(log_tail)
        lower, ash, ferrante = theorem1_bounds(query)
        assert lower.delta <= exact_tail + 1e-12
        assert exact_tail <= ferrante.delta + 1e-12
        assert ferrante.delta <= ash.delta + 1e-12

    def test_upper_degenerates_near_precondition_boundary(self):
        # rate just below the failure fraction: the KL term vanishes
        query = avg_query((10,) * 4, 0.3999999)
        _, ash, _ = theorem1_bounds(query)
        assert ash.delta > 0.999
        assert ash.precondition_ok

    def test_precondition_violation_degrades(self):
        query = avg_query((10,) * 4, 0.5)  # rate above q = 0.4
        lower, ash, ferrante = theorem1_bounds(query)
        for result in (lower, ash, ferrante):
            assert not result.precondition_ok
            assert result.delta == 1.0

    def test_unit_committee_hits_q_equals_one(self):
        # a size-1 committee fails at count 1, so q = 1 and the bound
        # precondition fails: flag and degrade rather than error
        query = avg_query((1, 50), 0.25)
        lower, ash, ferrante = theorem1_bounds(query)
        for result in (lower, ash, ferrante):
            assert not result.precondition_ok
            assert result.delta == 1.0
        # the exact evaluator has no such restriction
        exact = delta_exact_binomial(query).delta
        assert 0.25 <= exact <= 1.0

    def test_grid_sandwich(self):
        for n in range(10, 201, 38):
            for k in (1, 7, 50):
                for rate in (0.1, 0.25):
                    query = avg_query((n,) * k, rate)
                    exact = delta_exact_binomial(query).delta
                    lower, ash, ferrante = theorem1_bounds(query)
                    assert lower.precondition_ok
                    assert lower.delta <= exact + 1e-12
                    assert exact <= ferrante.delta + 1e-12
                    assert ferrante.delta <= ash.delta + 1e-12


class TestUnionBounds:
    def test_fixed_sizes_exceeds_unity_and_clamps(self):
        result = union_bound_fixed_sizes(avg_query((5, 5), 0.25))
        assert result.clamped
        assert result.delta == 1.0
        expected_raw = 2 * math.exp(-5 * kl_divergence(0.4, 0.25))
        assert math.exp(result.raw_log_delta) == pytest.approx(expected_raw, rel=1e-12)

    def test_single_committee_equals_product_form(self):
        query = avg_query((50,), 0.25)
        _, ash, _ = theorem1_bounds(query)
        fixed = union_bound_fixed_sizes(query)
        assert fixed.delta == pytest.approx(ash.delta, rel=1e-12)

    def test_sum_form_dominates_product_form(self):
        for n in (10, 40, 120):
            for k in (2, 9, 30):
                query = avg_query((n,) * k, 0.25)
                _, ash, _ = theorem1_bounds(query)
                fixed = union_bound_fixed_sizes(query)
                assert fixed.raw_log_delta >= ash.raw_log_delta - 1e-12

    def test_random_sizes_single_committee_reduction(self):
        q = (33 + 1) / 100
        tight, _ = union_bound_random_sizes(100, [1.0], [0.25], THIRD, [100])
        assert tight.delta == pytest.approx(
            math.exp(-100 * kl_divergence(q, 0.25)), rel=1e-12
        )

    def test_random_sizes_simple_form_is_looser(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            k = int(rng.integers(1, 6))
            raw = rng.random(k) + 0.05
            probs = list(raw / raw.sum())
            rates = list(rng.uniform(0.05, 0.3, size=k))
            hints = [int(h) for h in rng.integers(10, 200, size=k)]
            tight, simple = union_bound_random_sizes(500, probs, rates, THIRD, hints)
            assert simple.raw_log_delta >= tight.raw_log_delta - 1e-12

    def test_random_sizes_dominates_fixed_at_expected_sizes(self):
        tight, simple = union_bound_random_sizes(
            100, [0.5, 0.5], [0.25, 0.25], THIRD, [50, 50]
        )
        fixed = union_bound_fixed_sizes(avg_query((50, 50), 0.25))
        assert tight.raw_log_delta >= fixed.raw_log_delta - 1e-12
        assert simple.raw_log_delta >= tight.raw_log_delta - 1e-12

    def test_hypergeometric_tail_sum_tight_for_disjoint_events(self):
        exact_sum, _ = union_bound_hypergeometric(exact_query((2, 2), 2, HALF))
        assert exact_sum.delta == pytest.approx(1 / 3, abs=1e-12)

    def test_hypergeometric_bounds_vanish_without_adversaries(self):
        exact_sum, hoeffding = union_bound_hypergeometric(exact_query((4, 4), 0))
        assert exact_sum.delta == 0.0
        assert hoeffding.delta == 0.0

    def test_hypergeometric_tail_sum_dominates_exact(self):
        query = exact_query((50, 50), 25)
        exact_sum, hoeffding = union_bound_hypergeometric(query)
        exact = delta_exact_hypergeometric(query).delta
        assert exact_sum.raw_log_delta >= math.log(exact) - 1e-10
        assert hoeffding.raw_log_delta >= exact_sum.raw_log_delta - 1e-12


class TestDominanceObservation:
    """The average-rate failure probability versus the exactly-M one.

    The claimed ordering (average >= exact at matched adversary mass) holds
    in the rare-failure regime but provably reverses once per-committee
    failure becomes likely; see the (4,4,4,4)/M=4 counterexample.  The
    check therefore asserts the ordering where failure is rare and reports
    the relation elsewhere.
    """

    def test_rare_event_regime(self):
        violations = []
        for k in (2, 4, 8):
            layout = layout_from_split(1000, k)
            binom = delta_exact_binomial(
                FailureQuery(layout, AverageAdversary(0.25), THIRD)
            ).delta
            hyper = delta_exact_hypergeometric(
                FailureQuery(layout, ExactAdversary(250), THIRD)
            ).delta
            if binom < hyper - 1e-12:
                violations.append((k, binom, hyper))
        assert not violations, violations

    def test_reversal_is_real_not_numerical(self):
        # exact counterexample checked against brute-force enumeration
        sizes = (4, 4, 4, 4)
        binom = delta_exact_binomial(avg_query(sizes, 0.25)).delta
        hyper = delta_exact_hypergeometric(exact_query(sizes, 4)).delta
        assert binom == pytest.approx(binomial_failure_enumeration(sizes, 0.25, THIRD),
                                      abs=1e-12)
        fail, _ = hypergeometric_failure_table(sizes, THIRD)
        assert hyper == pytest.approx(fail[4] / math.comb(16, 4), abs=1e-12)
        assert hyper > binom  # the conjectured ordering does not hold here


class TestDeltaMonotonicity:
    def test_binomial_delta_nonincreasing_in_threshold(self):
        thresholds = [Fraction(1, 5), Fraction(1, 3), Fraction(1, 2), Fraction(7, 10)]
        values = [
            delta_exact_binomial(avg_query((10, 10), 0.25, a)).delta
            for a in thresholds
        ]
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


class TestQueryValidation:
    def test_average_evaluator_rejects_exact_model(self):
        with pytest.raises(ValueError):
            delta_exact_binomial(exact_query((4, 4), 2))

    def test_exact_evaluator_rejects_average_model(self):
        with pytest.raises(ValueError):
            delta_exact_hypergeometric(avg_query((4, 4), 0.25))

    def test_count_beyond_total_rejected(self):
        with pytest.raises(ValueError):
            exact_query((2, 2), 5)

    def test_threshold_one_allowed_for_exact_evaluators(self):
        query = FailureQuery(CommitteeLayout((3, 3)), ExactAdversary(4), Fraction(1))
        assert delta_exact_hypergeometric(query).delta == 0.0
        query_b = FailureQuery(CommitteeLayout((3, 3)), AverageAdversary(0.9), Fraction(1))
        assert delta_exact_binomial(query_b).delta == 0.0
