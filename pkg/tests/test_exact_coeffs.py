from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from eseries.exact_coeffs import (
    KNOWN_MISPRINTS,
    PRINTED_B,
    PRINTED_D,
    SHIFT,
    Route,
    a_coeff,
    b_coeff,
    c_coeff,
    check_consistency,
    check_positivity,
    check_route_agreement,
    coefficient_table,
    d_from_b,
    d_from_recurrence,
    format_rational,
    log_g_coeff,
    optimal_shift,
    parse_rational,
    shifted_coeff,
)
from eseries.precision_eval import to_mpf


def test_b_matches_printed_values():
    for n, value in PRINTED_B.items():
        assert b_coeff(n) == value


def test_b6_is_the_recurrence_value_not_the_published_one():
    assert b_coeff(6) == Fraction(3625, 580608)
    assert KNOWN_MISPRINTS[("b", 6)] == Fraction(1945, 580608)
    assert b_coeff(6) != KNOWN_MISPRINTS[("b", 6)]


def test_b_against_taylor_expansion_in_reciprocal_variable():
    # (1+1/x)^x / e = 1 - sum b_k y^k with y = 1/(x+1); contour derivatives avoid y = 0
    f = lambda y: mpmath.exp(-(1 - y) / y * mpmath.log1p(-y) - 1)
    taylor = mpmath.taylor(f, 0, 8, method="quad")
    assert abs(taylor[0] - 1) < 1e-30
    for k in range(1, 9):
        assert abs(-taylor[k] - to_mpf(b_coeff(k))) < 1e-30
    assert abs(-taylor[6].real - mpmath.mpf("0.0062434551366843")) < 1e-15


def test_printed_d_values_only_depend_on_the_first_five_b():
    # the published d_1..d_5 stay valid whatever b_6 is
    assert [d_from_b(n) for n in range(1, 6)] == [PRINTED_D[n] for n in range(1, 6)]


@pytest.mark.parametrize("route", [d_from_b, d_from_recurrence])
def test_d_matches_printed_values_on_both_routes(route):
    for n, value in PRINTED_D.items():
        assert route(n) == value


def test_a_and_log_g_small_indices():
    assert [a_coeff(n) for n in range(3)] == [Fraction(-1, 2), Fraction(-1, 4), Fraction(-17, 96)]
    assert log_g_coeff(0) == 1
    assert [log_g_coeff(n) for n in range(1, 4)] == [Fraction(-1, 2), Fraction(-1, 8), Fraction(-17, 288)]


def test_c_is_negated_d():
    assert c_coeff(0) == 1
    assert [c_coeff(n) for n in range(1, 4)] == [Fraction(-1, 2), 0, Fraction(-5, 288)]


def test_routes_agree_up_to_200():
    assert check_route_agreement(200) == []


def test_a_log_consistency_up_to_200():
    assert check_consistency(200) == []


def test_sign_pattern_up_to_200():
    assert check_positivity(200) == []


def test_route_agreement_reports_the_perturbed_index():
    def perturbed(n):
        return d_from_recurrence(n) + (Fraction(1, 10**30) if n == 7 else 0)

    failures = check_route_agreement(10, perturbed)
    assert [f["index"] for f in failures] == [7]
    assert failures[0]["check"] == "route-agreement"


def test_optimal_shift_is_eleven_twelfths():
    assert optimal_shift() == SHIFT
    assert shifted_coeff(2, optimal_shift()) == 0


@settings(deadline=None, max_examples=40)
@given(s=st.integers(min_value=1, max_value=40))
def test_unit_shift_reproduces_b(s):
    assert shifted_coeff(s, 1) == b_coeff(s)


@settings(deadline=None, max_examples=30)
@given(n=st.integers(min_value=1, max_value=120))
def test_conversion_equals_recurrence(n):
    assert d_from_b(n) == d_from_recurrence(n)


def test_shift_outside_unit_interval_rejected():
    with pytest.raises(ValueError):
        shifted_coeff(3, 0)
    with pytest.raises(ValueError):
        shifted_coeff(3, Fraction(3, 2))


@pytest.mark.parametrize("bad", [-1, 1.5, "3"])
def test_bad_index_rejected(bad):
    with pytest.raises(ValueError):
        b_coeff(bad)


def test_recurrence_route_starts_at_one():
    with pytest.raises(ValueError):
        d_from_recurrence(0)


def test_table_is_contiguous():
    table = coefficient_table("d-conversion", 5)
    assert table.route is Route.D_CONVERSION
    assert table.indices == [1, 2, 3, 4, 5]
    assert table.values == [PRINTED_D[n] for n in range(1, 6)]
    assert table.constant_term == 1

    b_table = coefficient_table(Route.B_SERIES, 3)
    assert b_table.indices == [0, 1, 2, 3]
    assert b_table.constant_term is None


def test_unknown_route_rejected():
    with pytest.raises(ValueError):
        coefficient_table("e-series", 5)


def test_rational_text_round_trip():
    assert format_rational(Fraction(139, 17280)) == "139/17280"
    assert format_rational(Fraction(4, 2)) == "2"
    assert parse_rational(" 5/288 ") == Fraction(5, 288)
    with pytest.raises(ValueError):
        parse_rational("five")
