"""Two-moment bound families: values, preconditions, and window choice."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from eventbounds.bounds_l2 import best_l2, lower_l1, lower_l2, upper_u1, upper_u2
from eventbounds.core import EventSystem, exact_occurrence, normalize
from eventbounds.errors import NotApplicableError
from eventbounds.moments import moment_set


def fair(n):
    return EventSystem(n=n, weights={m: Fraction(1, 1 << n) for m in range(1 << n)})


@pytest.fixture(scope="module")
def fair3_d0():
    return moment_set(fair(3), 0, 2)


@pytest.fixture(scope="module")
def fair3_d1():
    return moment_set(fair(3), 1, 2)


class TestUpperU1:
    def test_fair_three_at_d0_r1_is_the_union_bound(self, fair3_d0):
        certificate = upper_u1(fair3_d0, 3, 1, 0)
        assert certificate.value == Fraction(3, 2)
        assert certificate.clamped == 1
        assert certificate.index_set == (1, 2)
        assert certificate.coefficients == (0, 1)

    def test_fair_three_at_d1_r2(self, fair3_d1):
        certificate = upper_u1(fair3_d1, 3, 2, 1)
        assert certificate.value == Fraction(3, 4)
        assert certificate.index_set == (1, 2)

    def test_same_value_for_both_targets(self, fair3_d1):
        at_least = upper_u1(fair3_d1, 3, 2, 1, "at-least")
        exactly = upper_u1(fair3_d1, 3, 2, 1, "exactly")
        assert at_least.value == exactly.value
        assert exactly.target == "exactly"

    def test_requires_r_above_d(self, fair3_d1):
        with pytest.raises(NotApplicableError):
            upper_u1(fair3_d1, 3, 1, 1)


class TestUpperU2:
    def test_fair_three_at_d0_r1(self, fair3_d0):
        at_least, exactly = upper_u2(fair3_d0, 3, 1, 0)
        assert at_least.value == 1
        assert at_least.index_set == (2, 4)
        assert exactly.target == "exactly"
        assert exactly.value >= exact_occurrence(fair(3)).p[1]

    def test_requires_r_below_n(self, fair3_d0):
        with pytest.raises(NotApplicableError):
            upper_u2(fair3_d0, 3, 3, 0)


class TestLowerL1:
    def test_fair_three_at_d0_r1_is_the_mean_over_n(self, fair3_d0):
        certificate = lower_l1(fair3_d0, 3, 1, 0)
        assert certificate.value == Fraction(1, 2)
        assert certificate.index_set == (1, 4)

    def test_fair_three_at_d1_r2(self, fair3_d1):
        certificate = lower_l1(fair3_d1, 3, 2, 1)
        assert certificate.value == Fraction(1, 4)

    def test_exactly_target_only_at_r_equal_n(self, fair3_d0):
        certificate = lower_l1(fair3_d0, 3, 3, 0, "exactly")
        assert certificate.target == "exactly"
        assert certificate.value <= exact_occurrence(fair(3)).p[3]
        with pytest.raises(NotApplicableError):
            lower_l1(fair3_d0, 3, 2, 0, "exactly")

    def test_requires_r_above_d(self, fair3_d1):
        with pytest.raises(NotApplicableError):
            lower_l1(fair3_d1, 3, 1, 1)


class TestLowerL2:
    def test_fair_three_window_one(self, fair3_d1):
        at_least, exactly = lower_l2(fair3_d1, 3, 1, m=1)
        assert at_least.value == Fraction(3, 4)
        assert at_least.m == 1
        assert at_least.index_set == (1, 2)
        assert exactly.value == 0
        assert exactly.coefficients == (1, -2)

    def test_needs_positive_d(self, fair3_d0):
        with pytest.raises(NotApplicableError):
            lower_l2(fair3_d0, 3, 0)

    def test_rejects_window_out_of_range(self, fair3_d1):
        with pytest.raises(ValueError):
            lower_l2(fair3_d1, 3, 1, m=4)

    def test_automatic_window_sweeps_to_the_best(self):
        system = EventSystem(
            n=4,
            weights={
                1: Fraction(2, 7),
                7: Fraction(1, 7),
                15: Fraction(4, 7),
            },
        )
        moments = moment_set(system, 1, 2)
        auto, _ = lower_l2(moments, 4, 1)
        for position, term in enumerate(auto.terms):
            sweep = [
                lower_l2(moments, 4, 1, m=m)[0].terms[position].value
                for m in range(1, 4)
            ]
            assert term.value == max(sweep)


class TestBestL2:
    def test_picks_the_tighter_upper_family(self, fair3_d0):
        best = best_l2(fair3_d0, 3, 1, 0, "at-least", "upper")
        u1 = upper_u1(fair3_d0, 3, 1, 0)
        u2 = upper_u2(fair3_d0, 3, 1, 0)[0]
        assert best.value == min(u1.value, u2.value)
        assert best.formula_id == "u2"

    def test_single_applicable_family_passes_through(self, fair3_d0):
        best = best_l2(fair3_d0, 3, 3, 0, "at-least", "upper")
        assert best.formula_id == "u1"

    def test_lower_side_includes_the_window_family_at_r_equal_d(self, fair3_d1):
        best = best_l2(fair3_d1, 3, 1, 1, "at-least", "lower")
        assert best.value == Fraction(3, 4)
        assert best.formula_id == "l2"

    def test_no_applicable_family_raises(self, fair3_d0):
        with pytest.raises(NotApplicableError):
            best_l2(fair3_d0, 3, 2, 0, "exactly", "lower")


@given(
    st.integers(min_value=2, max_value=6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(
                st.integers(min_value=0, max_value=9),
                min_size=1 << n,
                max_size=1 << n,
            ).filter(lambda ws: any(ws)),
        )
    )
)
@settings(max_examples=60, deadline=None)
def test_sandwich_property(params):
    n, raw = params
    system = normalize(n, {m: w for m, w in enumerate(raw) if w})
    occurrence = exact_occurrence(system)
    for d in range(0, n):
        moments = moment_set(system, d, 2)
        for r in range(max(d, 1), n + 1):
            for target in ("at-least", "exactly"):
                truth = occurrence.at_least(r) if target == "at-least" else occurrence.p[r]
                for side in ("upper", "lower"):
                    try:
                        certificate = best_l2(moments, n, r, d, target, side)
                    except NotApplicableError:
                        continue
                    if side == "upper":
                        assert truth <= certificate.clamped
                    else:
                        assert certificate.clamped <= truth
