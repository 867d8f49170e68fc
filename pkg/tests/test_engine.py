"""Dual solves, feasibility, index-set search, and sharpness witnesses."""

from fractions import Fraction

import pytest

from eventbounds.core import EventSystem, exact_occurrence
from eventbounds.engine import (
    Feasibility,
    check_feasibility,
    bound_value,
    jordan_exact,
    search_index_sets,
    sharpness_witness,
    solve_coefficients,
    target_vector,
    witness_system,
)
from eventbounds.errors import (
    DegenerateConfigurationError,
    NotApplicableError,
    ResourceLimitError,
)
from eventbounds.moments import moment_matrix, moment_set, z_vector


def fair(n):
    return EventSystem(n=n, weights={m: Fraction(1, 1 << n) for m in range(1 << n)})


F32 = moment_matrix(3, 0, 2)  # rows (1,1,1,1) and (0,1,2,3)
V1 = target_vector(3, 0, 1)  # at-least one event: v = (0,1,1,1)
S = (Fraction(1), Fraction(3, 2))  # fair-3 moments at d=0, ell=2


class TestTargetVector:
    def test_at_least_is_a_step(self):
        assert target_vector(3, 0, 2).v == (0, 0, 1, 1)
        assert target_vector(3, 1, 2).v == (0, 1, 1)

    def test_exactly_is_an_indicator(self):
        assert target_vector(3, 0, 2, "exactly").v == (0, 0, 1, 0)

    def test_at_least_d_is_all_ones(self):
        assert target_vector(4, 2, 2).v == (1, 1, 1)

    def test_rejects_bad_orders(self):
        with pytest.raises(ValueError):
            target_vector(3, 2, 1)


class TestSolveAndFeasibility:
    def test_known_solves(self):
        assert solve_coefficients(F32, (1, 2), V1) == (0, 1)
        assert solve_coefficients(F32, (2, 4), V1) == (1, 0)

    def test_both_solves_are_upper_feasible(self):
        for index_set in ((1, 2), (2, 4)):
            a = solve_coefficients(F32, index_set, V1)
            assert check_feasibility(F32, a, V1).allows_upper

    def test_bound_values(self):
        assert bound_value(S, solve_coefficients(F32, (1, 2), V1)) == Fraction(3, 2)
        assert bound_value(S, solve_coefficients(F32, (2, 4), V1)) == 1

    def test_full_index_set_reaches_equality(self):
        fmat = moment_matrix(3, 0, 4)
        a = solve_coefficients(fmat, (1, 2, 3, 4), target_vector(3, 0, 1))
        assert check_feasibility(fmat, a, target_vector(3, 0, 1)) is Feasibility.EQUALITY

    def test_infeasible_set_is_reported(self):
        # positions (1, 3) put b below v at position 2 and above at 4
        a = solve_coefficients(F32, (1, 3), V1)
        assert check_feasibility(F32, a, V1) is Feasibility.INFEASIBLE

    def test_index_set_validation(self):
        with pytest.raises(ValueError):
            solve_coefficients(F32, (2, 1), V1)
        with pytest.raises(ValueError):
            solve_coefficients(F32, (1, 5), V1)
        with pytest.raises(ValueError):
            solve_coefficients(F32, (1, 2, 3), V1)


class TestSearch:
    def test_search_picks_the_tightest_upper(self):
        result = search_index_sets(F32, V1, S, "upper")
        assert result.best is not None
        assert result.best.value == 1
        # (2,3), (2,4) and (3,4) all reach 1; ties go to the lex-first set
        assert result.best.index_set == (2, 3)
        assert result.feasible == ((1, 2), (2, 3), (2, 4), (3, 4))

    def test_search_lower_side(self):
        result = search_index_sets(F32, V1, S, "lower")
        assert result.best is not None
        assert result.best.index_set == (1, 4)
        assert result.best.value == Fraction(1, 2)
        assert result.best.value <= exact_occurrence(fair(3)).at_least(1)

    def test_enumeration_cap(self):
        fmat = moment_matrix(220, 0, 3)
        v = target_vector(220, 0, 10)
        with pytest.raises(ResourceLimitError):
            search_index_sets(fmat, v, (1, 1, 1), "upper")


class TestWitness:
    def test_attaining_witness_on_fair_three(self):
        witness = sharpness_witness(F32, (2, 4), S)
        assert witness.nonnegative
        assert witness.z == (0, Fraction(3, 4), 0, Fraction(1, 4))
        assert sum(x * y for x, y in zip(witness.z, V1.v)) == 1

    def test_negative_witness_is_flagged(self):
        witness = sharpness_witness(F32, (1, 2), S)
        assert not witness.nonnegative
        assert witness.z == (Fraction(-1, 2), Fraction(3, 2), 0, 0)

    def test_witness_system_reproduces_the_moments(self):
        witness = sharpness_witness(F32, (2, 4), S)
        induced = witness_system(witness, (), 3, 0)
        assert moment_set(induced, 0, 2).vector(()).values == S
        occurrence = exact_occurrence(induced)
        assert occurrence.at_least(1) == 1

    def test_witness_system_rejects_negative_witnesses(self):
        witness = sharpness_witness(F32, (1, 2), S)
        with pytest.raises(ValueError):
            witness_system(witness, (), 3, 0)

    def test_witness_system_pins_the_tuple_events(self):
        system = fair(3)
        fmat = moment_matrix(3, 1, 2)
        moments = moment_set(system, 1, 2)
        v = target_vector(3, 1, 2)
        result = search_index_sets(fmat, v, moments.vector((2,)), "upper")
        witness = result.best.witness
        assert witness.nonnegative
        induced = witness_system(witness, (2,), 3, 1)
        reproduced = moment_set(induced, 1, 2).vector((2,))
        assert reproduced.values == moments.vector((2,)).values
        attained = sum(x * y for x, y in zip(z_vector(induced, (2,)).entries, v.v))
        assert attained == result.best.value


class TestJordan:
    def test_reproduces_the_oracle_exactly(self):
        system = fair(3)
        occurrence = exact_occurrence(system)
        fmat = moment_matrix(3, 0, 4)
        s = moment_set(system, 0, 4).vector(())
        assert jordan_exact(fmat, target_vector(3, 0, 1), s) == Fraction(7, 8)
        assert jordan_exact(fmat, target_vector(3, 0, 2, "exactly"), s) == occurrence.p[2]

    def test_requires_the_full_order(self):
        with pytest.raises(NotApplicableError):
            jordan_exact(F32, V1, S)


class TestLinearSolveEdgeCases:
    def test_singular_system_is_reported(self):
        fmat = moment_matrix(4, 0, 2)
        # duplicate positions cannot arise through the public API; the
        # validation layer rejects them before the solver sees a singular
        # system
        with pytest.raises(ValueError):
            solve_coefficients(fmat, (2, 2), target_vector(4, 0, 1))

    def test_float_target_uses_float_path(self):
        a = solve_coefficients(F32, (1, 2), (0.0, 1.0, 1.0, 1.0))
        assert a == (0.0, 1.0)
        assert isinstance(a[0], float)
