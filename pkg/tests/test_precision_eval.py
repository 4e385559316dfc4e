from fractions import Fraction

import mpmath
import pytest

from eseries.exact_coeffs import SHIFT
from eseries.precision_eval import (
    ConvergenceError,
    FIT_FAMILIES,
    ExpansionSpec,
    PrecisionContext,
    PrecisionError,
    euler,
    eval_truncated,
    expected_truncation_exponent,
    fit_leading_coeffs,
    geometric_samples,
    lemma1_order_probe,
    nonzero_depth,
    omega_sequence,
    order_probe,
    pow_expr,
    reciprocal_form,
    relative_error_seq,
    richardson_limit,
    series_spec,
    shift_comparison,
    to_mpf,
    truncation_order_report,
)

TINY = mpmath.mpf(10) ** -70


def test_context_rejects_small_mantissa():
    with pytest.raises(ValueError):
        PrecisionContext(mantissa_bits=32)
    with pytest.raises(ValueError):
        PrecisionContext(tolerance="0")


def test_headroom_guard():
    PrecisionContext().require_headroom(10**6)
    with pytest.raises(PrecisionError):
        PrecisionContext(mantissa_bits=64).require_headroom(10**6)


def test_to_mpf_rounds_once():
    assert to_mpf(Fraction(1, 3)) == mpmath.mpf(1) / 3
    assert to_mpf(7) == 7


def test_euler_is_exp_one(ctx):
    assert abs(euler(ctx) - mpmath.e) < TINY
    assert euler(PrecisionContext(mantissa_bits=512)) != euler(ctx)


def test_pow_expr_small_arguments(ctx):
    assert abs(pow_expr(1, ctx) - 2) < TINY
    assert abs(pow_expr(Fraction(1, 2), ctx) - mpmath.sqrt(3)) < TINY
    assert abs(pow_expr(mpmath.mpf(2), ctx) - mpmath.mpf(9) / 4) < TINY


@pytest.mark.parametrize("x", [0, -1, Fraction(-1, 2)])
def test_pow_expr_rejects_nonpositive(x, ctx):
    with pytest.raises(ValueError):
        pow_expr(x, ctx)


def test_eval_truncated_depth_zero_is_e(ctx):
    assert eval_truncated(5, ExpansionSpec(SHIFT), ctx) == euler(ctx)


def test_eval_truncated_single_term(ctx):
    value = eval_truncated(1, series_spec(SHIFT, 1), ctx)
    assert abs(value - mpmath.e * mpmath.mpf(17) / 23) < TINY


def test_eval_truncated_rational_and_mpf_paths_agree(ctx):
    spec = series_spec(SHIFT, 5)
    exact = eval_truncated(Fraction(7), spec, ctx)
    horner = eval_truncated(mpmath.mpf(7), spec, ctx)
    assert abs(exact - horner) < TINY


def test_reciprocal_form_matches_shifted_half():
    assert reciprocal_form(2, Fraction(11, 6)) == ExpansionSpec(SHIFT, (Fraction(1, 2),))
    with pytest.raises(ValueError):
        reciprocal_form(0, 1)


def test_spec_rejects_shift_outside_unit_interval():
    with pytest.raises(ValueError):
        ExpansionSpec(Fraction(0), (1,))
    with pytest.raises(ValueError):
        ExpansionSpec(Fraction(5, 4), (1,))


def test_relative_error_reconstructs_power(ctx):
    spec = series_spec(SHIFT, 3)
    for n in (1, 10, 1000):
        omega = relative_error_seq(n, spec, ctx)
        assert abs(eval_truncated(n, spec, ctx) * mpmath.exp(omega) - pow_expr(n, ctx)) < TINY


def test_relative_error_rejects_nonpositive_bracket(ctx):
    with pytest.raises(ValueError):
        relative_error_seq(1, ExpansionSpec(1, (Fraction(5),)), ctx)
    with pytest.raises(ValueError):
        relative_error_seq(0, series_spec(SHIFT, 1), ctx)


def test_richardson_removes_inverse_powers():
    samples = [2**j for j in range(6)]
    values = [1 + mpmath.mpf(1) / n + mpmath.mpf(3) / n**2 for n in samples]
    estimates = richardson_limit(values)
    assert len(estimates) == len(values)
    assert abs(estimates[-1] - 1) < TINY


def test_geometric_samples():
    assert geometric_samples(64, 1024) == [64, 128, 256, 512, 1024]
    with pytest.raises(ValueError):
        geometric_samples(100, 150)
    with pytest.raises(ValueError):
        geometric_samples(10, 5)


def test_probe_recovers_known_limits(ctx):
    estimate = order_probe(lambda n: mpmath.mpf(1) / n, 2, ctx=ctx)
    assert estimate.exponent == 1
    assert abs(estimate.limit_constant - 1) < 1e-12
    assert abs(estimate.tail_constant - 1) < 1e-12


def test_probe_flags_wrong_exponent(ctx):
    with pytest.raises(ConvergenceError):
        order_probe(lambda n: mpmath.mpf(1) / n, 3, ctx=ctx)


def test_probe_requires_k_above_one(ctx):
    with pytest.raises(ValueError):
        order_probe(lambda n: mpmath.mpf(1) / n, 1, ctx=ctx)


def test_probe_on_single_term_expansion(ctx):
    omega = lambda n: relative_error_seq(n, series_spec(SHIFT, 1), ctx)
    estimate = order_probe(omega, 4, ctx=ctx)
    # n^4 (omega_n - omega_{n+1}) -> 3 d_3 with d_3 = 5/288, sign from the omitted tail
    assert abs(estimate.limit_constant + mpmath.mpf(15) / 288) < 1e-9
    assert abs(estimate.tail_constant + mpmath.mpf(5) / 288) < 1e-9


@pytest.mark.parametrize(
    "shift, depth, exponent",
    [(1, 1, 2), (SHIFT, 1, 3), (SHIFT, 3, 4), (SHIFT, 4, 5)],
)
def test_truncation_exponents(shift, depth, exponent, ctx):
    report = truncation_order_report(shift, depth, ctx)
    assert abs(report.exponent - exponent) < 0.05
    assert expected_truncation_exponent(shift, depth) == exponent


def test_truncation_constant_is_first_omitted_coefficient(ctx):
    report = truncation_order_report(SHIFT, 1, ctx)
    assert abs(report.limit_constant + mpmath.mpf(5) / 288) < 1e-6


def test_nonzero_depth_skips_vanishing_coefficient():
    assert [nonzero_depth(SHIFT, t) for t in (1, 2, 3)] == [1, 3, 4]
    assert [nonzero_depth(1, t) for t in (1, 2, 3)] == [1, 2, 3]


@pytest.mark.parametrize("terms", [1, 3, 4])
def test_shift_gains_one_order(terms, ctx):
    comparison = shift_comparison(terms, ctx)
    assert abs(comparison.shifted.exponent - comparison.base.exponent - 1) < 0.05


def test_c_fit_finds_zero(ctx):
    report = fit_leading_coeffs("c", [Fraction(-1, 10), 0, Fraction(1, 10)], ctx)
    assert abs(report.root) < 1e-6
    for row in report.rows:
        assert abs(row.leading - to_mpf(row.expected_leading)) <= 0.01 * abs(to_mpf(row.expected_leading)) + 1e-8
    last = report.rows[-1]
    assert abs(last.subleading - to_mpf(last.expected_subleading)) < 1e-4


def test_d_fit_finds_five_over_288(ctx):
    report = fit_leading_coeffs("d", [0, Fraction(1, 100), Fraction(1, 50)], ctx)
    assert report.expected_root == Fraction(5, 288)
    assert abs(report.root - 5 / 288) < 1e-6
    assert abs(report.rows[0].leading + mpmath.mpf(5) / 96) < 1e-6


def test_fit_without_sign_change(ctx):
    with pytest.raises(ConvergenceError):
        fit_leading_coeffs("c", [Fraction(1, 10), Fraction(1, 5)], ctx)


def test_fit_unknown_family(ctx):
    with pytest.raises(ValueError):
        fit_leading_coeffs("q", [0, 1], ctx)


def test_probe_is_exported_under_its_operation_name():
    assert lemma1_order_probe is order_probe


@pytest.mark.parametrize(
    "make_omega, k, sample_range, limit, tail",
    [
        (lambda ctx: (lambda n: mpmath.mpf(1) / n**2), 3, None, 2, 1),
        (lambda ctx: omega_sequence(FIT_FAMILIES["c"].spec(1), ctx), 3, None, 2, None),
        (lambda ctx: omega_sequence(FIT_FAMILIES["d"].spec(Fraction(5, 288)), ctx), 5, None, Fraction(-139, 4320), None),
        (lambda ctx: (lambda n: mpmath.mpf(3) / n**2), 3, (100, 100_000), 6, 3),
        (lambda ctx: (lambda n: mpmath.mpf(7) / n**3), 4, (100, 100_000), 21, 7),
    ],
    ids=["inverse-square", "c-family-at-one", "d-family-at-root", "3-over-n-squared", "7-over-n-cubed"],
)
def test_probe_limits(make_omega, k, sample_range, limit, tail, ctx):
    estimate = order_probe(make_omega(ctx), k, sample_range=sample_range, ctx=ctx)
    assert estimate.exponent == k - 1
    assert abs(estimate.limit_constant - to_mpf(limit)) < 1e-6
    if tail is not None:
        assert abs(estimate.tail_constant - to_mpf(tail)) < 1e-6


def test_doubled_precision_leaves_order_estimates_unchanged(ctx):
    doubled = ctx.doubled()
    assert doubled.mantissa_bits == 2 * ctx.mantissa_bits == 512
    base = truncation_order_report(SHIFT, 1, ctx)
    fine = truncation_order_report(SHIFT, 1, doubled)
    assert abs(base.exponent - fine.exponent) < 1e-4
    assert abs(base.limit_constant - fine.limit_constant) < 1e-4


def test_thirty_terms_reach_twenty_digits(ctx):
    spec = series_spec(SHIFT, 30)
    assert abs(eval_truncated(5, spec, ctx) - pow_expr(5, ctx)) < 1e-20
    assert abs(relative_error_seq(10, spec, ctx)) < 1e-25


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_truncation_error_never_grows_with_depth(n, ctx):
    target = pow_expr(n, ctx)
    errors = [abs(eval_truncated(n, series_spec(SHIFT, depth), ctx) - target) for depth in range(1, 61)]
    for shallow, deep in zip(errors, errors[1:]):
        assert deep <= shallow
    assert errors[-1] < errors[0]


def test_power_approaches_e_from_below_monotonically(ctx):
    e = euler(ctx)
    gaps = [e - pow_expr(n, ctx) for n in range(1, 10_001)]
    assert all(gap > 0 for gap in gaps)
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
