#!/usr/bin/env python3
"""
Validation suite for the coefficient routes, convergence orders and Carleman weights.
Run after changing any recurrence or precision setting.
"""

import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath

sys.path.insert(0, str(Path(__file__).parent.parent))

from eseries.carleman import (  # noqa: E402
    FamilyKind,
    WeightFamily,
    finite_carleman_report,
    parse_family,
    parse_sequence,
    pointwise_margin,
    tightness_ranking,
)
from eseries.exact_coeffs import (  # noqa: E402
    KNOWN_MISPRINTS,
    PRINTED_B,
    PRINTED_D,
    b_coeff,
    check_consistency,
    check_positivity,
    check_route_agreement,
    d_from_b,
    d_from_recurrence,
)
from eseries.integral_repr import HRoute, alzer_h, d_from_integral, g_mass  # noqa: E402
from eseries.precision_eval import (  # noqa: E402
    PrecisionContext,
    euler,
    fit_leading_coeffs,
    to_mpf,
    truncation_order_report,
)

CTX = PrecisionContext()
CHECK_MAX = 200
MARGIN_N = 100_000
REPORT_N = 10_000


def validate_exact_routes():
    """Printed values and cross-route agreement of the exact coefficients."""
    print("\n" + "="*60)
    print("VALIDATING: Exact coefficient routes")
    print("="*60)

    errors = []
    warnings = []
    start = time.time()

    print("\n[TEST 1] Printed b values...")
    for n, value in PRINTED_B.items():
        if b_coeff(n) != value:
            errors.append(f"b_{n} = {b_coeff(n)}, printed {value}")
    if not errors:
        print(f"  ✓ b_0..b_{max(PRINTED_B)} match")
    for (name, n), value in KNOWN_MISPRINTS.items():
        warnings.append(f"published {name}_{n} = {value} is a misprint; recurrence gives {b_coeff(n) if name == 'b' else d_from_b(n)}")

    print("\n[TEST 2] Printed d values on both routes...")
    for n, value in PRINTED_D.items():
        for name, route in (("conversion", d_from_b), ("recurrence", d_from_recurrence)):
            if route(n) != value:
                errors.append(f"d_{n} by {name} = {route(n)}, printed {value}")
    print(f"  ✓ d_1..d_{max(PRINTED_D)} checked")

    print(f"\n[TEST 3] Route agreement, consistency and signs up to {CHECK_MAX}...")
    failures = check_route_agreement(CHECK_MAX) + check_consistency(CHECK_MAX) + check_positivity(CHECK_MAX)
    for failure in failures:
        errors.append(f"{failure['check']} failed at index {failure['index']}")
    if not failures:
        print("  ✓ No disagreements")

    elapsed = time.time() - start
    if elapsed > 5:
        warnings.append(f"Exact routes took {elapsed:.1f}s (expected < 5s)")
    return errors, warnings


def validate_integral_route():
    """Quadrature against the exact values."""
    print("\n" + "="*60)
    print("VALIDATING: Integral route")
    print("="*60)

    errors = []
    warnings = []
    tol = mpmath.mpf(10) ** -12

    with CTX.workprec():
        print("\n[TEST 1] Mass of g...")
        mass = g_mass(ctx=CTX)
        if abs(mass.value - euler(CTX) / 24) >= tol:
            errors.append(f"int g = {mpmath.nstr(mass.value, 20)}, expected e/24")
        else:
            print(f"  ✓ e/24 with {mass.nodes_used} nodes")

        print("\n[TEST 2] d_2..d_12 from the integral...")
        for n in range(2, 13):
            result = d_from_integral(n, ctx=CTX)
            diff = abs(result.value - to_mpf(d_from_b(n)))
            if diff >= tol:
                errors.append(f"d_{n}: integral differs by {mpmath.nstr(diff, 3)}")
            else:
                print(f"  ✓ d_{n}: |diff| = {mpmath.nstr(diff, 3)}")

        print("\n[TEST 3] h(x) both ways...")
        for x in (1, 2, 10, 100):
            diff = abs(alzer_h(x, HRoute.DIRECT, ctx=CTX) - alzer_h(x, HRoute.INTEGRAL, ctx=CTX))
            if diff >= tol:
                errors.append(f"h({x}): routes differ by {mpmath.nstr(diff, 3)}")
            else:
                print(f"  ✓ h({x})")

    return errors, warnings


def validate_orders():
    """Fits and truncation exponents."""
    print("\n" + "="*60)
    print("VALIDATING: Convergence orders")
    print("="*60)

    errors = []
    warnings = []

    print("\n[TEST 1] Parameter fits...")
    fits = (("c", [Fraction(-1, 10), 0, Fraction(1, 10)]), ("d", [0, Fraction(1, 100), Fraction(1, 50)]))
    for family, params in fits:
        report = fit_leading_coeffs(family, params, CTX)
        if abs(report.root - float(report.expected_root)) > 1e-6:
            errors.append(f"{family}-fit root {report.root:.10g}, expected {report.expected_root}")
        else:
            print(f"  ✓ {family} = {report.root:.10g}")

    print("\n[TEST 2] Truncation exponents...")
    cases = ((1, 1, 2), (Fraction(11, 12), 1, 3), (Fraction(11, 12), 3, 4), (Fraction(11, 12), 4, 5))
    for shift, depth, expected in cases:
        estimate = truncation_order_report(shift, depth, CTX)
        exponent = float(estimate.exponent)
        if abs(exponent - expected) > 0.05:
            errors.append(f"shift {shift}, K={depth}: exponent {exponent:.4f}, expected {expected}")
        else:
            print(f"  ✓ shift {shift}, K={depth}: {exponent:.4f}")

    return errors, warnings


def validate_carleman():
    """Pointwise margins, finite reports and ranking."""
    print("\n" + "="*60)
    print("VALIDATING: Carleman weights")
    print("="*60)

    errors = []
    warnings = []

    print(f"\n[TEST 1] Pointwise margins up to {MARGIN_N:,}...")
    families = [
        WeightFamily(FamilyKind.CLASSICAL_E),
        WeightFamily(FamilyKind.BICHENG_DEBNATH),
        WeightFamily(FamilyKind.PING_GUOZHENG),
        WeightFamily(FamilyKind.YANG_PARAM),
        WeightFamily(FamilyKind.B_SERIES, 6),
        WeightFamily(FamilyKind.D_SERIES, 4),
    ]
    for family in families:
        margin = pointwise_margin(family, MARGIN_N, CTX)
        if margin <= 0:
            errors.append(f"{family.label}: margin {mpmath.nstr(margin, 5)} is not positive")
        else:
            print(f"  ✓ {family.label}: min margin {mpmath.nstr(margin, 5)}")

    print(f"\n[TEST 2] Finite reports at N={REPORT_N:,}...")
    for seq in ("geometric", "power", "finite"):
        for name in ("classical", "bicheng-debnath", "d-series:3"):
            report = finite_carleman_report(parse_sequence(seq), parse_family(name), REPORT_N, CTX)
            if not report.holds:
                errors.append(f"{seq} / {name}: lhs {mpmath.nstr(report.lhs, 8)} >= rhs {mpmath.nstr(report.rhs, 8)}")
            else:
                print(f"  ✓ {seq} / {name}")

    print("\n[TEST 3] Tightness ranking at N=1,000...")
    ranking = tightness_ranking([parse_family("bicheng-debnath"), parse_family("d-series:3")], 1000, CTX)
    if ranking[0].family.label != "d-series:3":
        errors.append(f"Expected d-series:3 first, got {ranking[0].family.label}")
    else:
        print("  ✓ d-series:3 ranks above bicheng-debnath")

    return errors, warnings


def main():
    print("="*60)
    print("SERIES VALIDATION SUITE")
    print("="*60)

    all_errors = []
    all_warnings = []

    for check in (validate_exact_routes, validate_integral_route, validate_orders, validate_carleman):
        errors, warnings = check()
        all_errors.extend(errors)
        all_warnings.extend(warnings)

    print("\n" + "="*60)
    print("VALIDATION SUMMARY")
    print("="*60)

    if all_warnings:
        print(f"\n⚠️  WARNINGS ({len(all_warnings)}):")
        for w in all_warnings:
            print(f"   - {w}")

    if all_errors:
        print(f"\n❌ ERRORS ({len(all_errors)}):")
        for e in all_errors:
            print(f"   - {e}")
        print("\n❌ VALIDATION FAILED")
        return 1
    else:
        print("\n✅ ALL VALIDATIONS PASSED")
        return 0


if __name__ == "__main__":
    sys.exit(main())
