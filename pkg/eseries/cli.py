"""
Command-line entry point: python -m eseries <command> [options]

Commands
  coeffs    exact coefficient tables (b, d by two routes, a, c, ln g)
  verify    route agreement, a/ln g consistency and sign checks up to --max
  quad      quadrature route: g mass and moments, h(x) both ways, d_n
  order     convergence-order experiments (truncation, shift comparison, fits)
  carleman  weight margins, finite inequality reports, tightness ranking

Every command prints one document (JSON or CSV) to stdout or --out.
Exit status: 0 pass, 1 a check failed, 2 bad usage.
"""

import argparse
import io
import json
import logging
import sys
from fractions import Fraction

import mpmath
import pandas as pd

from eseries import config
from eseries.carleman import (
    FamilyKind,
    WeightFamily,
    finite_carleman_report,
    margin_profile,
    parse_family,
    parse_sequence,
    tightness_ranking,
)
from eseries.exact_coeffs import (
    KNOWN_MISPRINTS,
    PRINTED_B,
    PRINTED_D,
    Route,
    check_consistency,
    check_positivity,
    check_route_agreement,
    coefficient_table,
    d_from_b,
    d_from_recurrence,
    format_rational,
    parse_rational,
)
from eseries.integral_repr import (
    HRoute,
    QuadratureConfig,
    QuadratureError,
    Rule,
    alzer_h,
    d_from_integral,
    g_moment,
    h_integral,
)
from eseries.precision_eval import (
    FIT_FAMILIES,
    ConvergenceError,
    PrecisionContext,
    PrecisionError,
    euler,
    expected_truncation_exponent,
    fit_leading_coeffs,
    shift_comparison,
    to_mpf,
    truncation_order_report,
)

logger = logging.getLogger(__name__)

DEFAULT_FIT_PARAMS = {
    "c": "-1/10,0,1/10",
    "d": "0,1/100,1/50",
}
EXPONENT_TOLERANCE = 0.05
FIT_ROOT_TOLERANCE = 1e-6
FIT_COEFF_RTOL = 0.01


class Emitter:
    """Renders values at a fixed digit count so repeated runs print identical text."""

    def __init__(self, digits):
        self.digits = digits

    def value(self, v):
        if isinstance(v, Fraction):
            return format_rational(v)
        if isinstance(v, mpmath.mpf):
            return mpmath.nstr(v, self.digits)
        if isinstance(v, float):
            return repr(v)
        return v

    def row(self, row):
        return {k: self.value(v) for k, v in row.items()}


def _context(args):
    return PrecisionContext(mantissa_bits=args.precision_bits, tolerance=args.tolerance)


def _quad_config(args):
    return QuadratureConfig(
        rule=Rule(args.rule),
        target_abs_tolerance=parse_rational(args.quad_tolerance),
        max_levels=args.max_levels,
    )


def _printed_for(route):
    if route is Route.B_SERIES:
        return PRINTED_B
    if route in (Route.D_CONVERSION, Route.D_RECURRENCE):
        return PRINTED_D
    return {}


def _misprints_for(route):
    if route is Route.B_SERIES:
        family = "b"
    elif route in (Route.D_CONVERSION, Route.D_RECURRENCE):
        family = "d"
    else:
        return {}
    return {n: v for (name, n), v in KNOWN_MISPRINTS.items() if name == family}


def cmd_coeffs(args, ctx, emit):
    route = Route(args.route)
    table = coefficient_table(route, args.max)
    printed = _printed_for(route)
    misprints = _misprints_for(route)
    rows, mismatches = [], []
    with ctx.workprec():
        for n, value in table.entries:
            row = {"n": n, "value": value, "decimal": to_mpf(value)}
            if n in printed:
                row["printed"] = printed[n]
                if printed[n] != value:
                    mismatches.append(n)
            if n in misprints:
                row["published_misprint"] = misprints[n]
            rows.append(row)
    logger.info(f"{route.value}: {len(rows)} coefficients, {len(mismatches)} printed mismatches")
    return {
        "rows": [emit.row(r) for r in rows],
        "expected": {str(n): format_rational(v) for n, v in printed.items() if n <= args.max},
        "known_misprints": {str(n): format_rational(v) for n, v in misprints.items() if n <= args.max},
        "status": "FAIL" if mismatches else "PASS",
    }


def cmd_verify(args, ctx, emit):
    if args.max < 1:
        raise ValueError(f"verify needs --max >= 1, got {args.max}")
    recurrence = d_from_recurrence
    if args.inject_fault is not None:
        fault = args.inject_fault

        def recurrence(n):
            value = d_from_recurrence(n)
            return value + Fraction(1, 10**30) if n == fault else value

    failures = (
        check_route_agreement(args.max, recurrence)
        + check_consistency(args.max)
        + check_positivity(args.max)
    )
    for failure in failures:
        logger.error(f"{failure['check']} failed at index {failure['index']}")
    return {
        "result": {"checked_up_to": args.max, "failures": failures},
        "expected": {"failures": []},
        "status": "FAIL" if failures else "PASS",
    }


def _quad_row(result, expected, diff, emit):
    return emit.row({
        "value": result.value,
        "expected": expected,
        "abs_diff": diff,
        "error_estimate": result.error_estimate,
        "nodes_used": result.nodes_used,
        "levels": result.levels,
    })


def cmd_quad(args, ctx, emit):
    cfg = _quad_config(args)
    tolerance = ctx.comparison_tolerance
    with ctx.workprec():
        e = euler(ctx)
        if args.target == "g-mass":
            result = g_moment(0, cfg, ctx)
            expected = e / 24
        elif args.target == "g-moment":
            if args.j not in (0, 1):
                raise ValueError("closed forms are known for moments j = 0 and j = 1 only")
            result = g_moment(args.j, cfg, ctx)
            expected = e / 24 if args.j == 0 else e / 48
        elif args.target == "d":
            result = d_from_integral(args.n, cfg, ctx)
            expected = to_mpf(d_from_b(args.n))
        else:
            x = parse_rational(args.x)
            result = h_integral(x, cfg, ctx)
            expected = alzer_h(x, HRoute.DIRECT, cfg, ctx)
        diff = abs(result.value - expected)
        row = _quad_row(result, expected, diff, emit)
        if args.target == "h":
            row = {"x": emit.value(x), **row}
        ok = diff <= tolerance
    return {
        "rows": [row],
        "expected": {"abs_diff_below": args.tolerance},
        "status": "PASS" if ok else "FAIL",
    }


def _parse_list(text, convert):
    return [convert(item) for item in text.split(",") if item.strip()]


def _exponent_row(label, shift, depth, estimate, expected):
    ok = abs(float(estimate.exponent) - expected) <= EXPONENT_TOLERANCE
    return {
        "series": label,
        "shift": shift,
        "depth": depth,
        "exponent": estimate.exponent,
        "expected_exponent": expected,
        "constant": estimate.limit_constant,
        "n_min": estimate.sample_range[0],
        "n_max": estimate.sample_range[1],
    }, ok


def _fit_rows(args, ctx, sample_range):
    family = args.experiment.split("-")[0]
    params = _parse_list(args.params or DEFAULT_FIT_PARAMS[family], parse_rational)
    report = fit_leading_coeffs(family, params, ctx, sample_range)
    rows, ok = [], True
    with ctx.workprec():
        for fit in report.rows:
            expected_lead = fit.expected_leading
            slack = FIT_COEFF_RTOL * abs(to_mpf(expected_lead)) + to_mpf(Fraction(1, 10**8))
            ok &= bool(abs(fit.leading - to_mpf(expected_lead)) <= slack)
            rows.append({
                "param": fit.param,
                "leading": fit.leading,
                "expected_leading": expected_lead,
                "subleading": fit.subleading,
                "expected_subleading": fit.expected_subleading,
            })
    ok &= abs(report.root - float(report.expected_root)) <= FIT_ROOT_TOLERANCE
    rows.append({"param": "root", "leading": report.root, "expected_leading": report.expected_root})
    expected = {
        "root": format_rational(report.expected_root),
        "root_tolerance": FIT_ROOT_TOLERANCE,
        "order": FIT_FAMILIES[family].order,
    }
    return rows, expected, ok


def cmd_order(args, ctx, emit):
    rows, ok = [], True
    sample_range = (args.n_min, args.n_max)

    if args.experiment == "truncation":
        shift = parse_rational(args.shift)
        for depth in _parse_list(args.K, int):
            estimate = truncation_order_report(shift, depth, ctx, sample_range)
            row, passed = _exponent_row("truncated", shift, depth, estimate, expected_truncation_exponent(shift, depth))
            rows.append(row)
            ok &= passed
        expected = {"exponent_tolerance": EXPONENT_TOLERANCE}

    elif args.experiment == "shift-compare":
        for terms in _parse_list(args.terms, int):
            comparison = shift_comparison(terms, ctx, sample_range)
            gap = comparison.shifted.exponent - comparison.base.exponent
            passed = abs(float(gap) - 1) <= EXPONENT_TOLERANCE
            ok &= passed
            rows.append({
                "nonzero_terms": terms,
                "depth_shift_1": comparison.base_depth,
                "depth_shift_11_12": comparison.shifted_depth,
                "exponent_shift_1": comparison.base.exponent,
                "exponent_shift_11_12": comparison.shifted.exponent,
                "gap": gap,
            })
        expected = {"gap": 1, "exponent_tolerance": EXPONENT_TOLERANCE}

    else:
        rows, expected, ok = _fit_rows(args, ctx, sample_range)

    with ctx.workprec():
        return {
            "rows": [emit.row(r) for r in rows],
            "expected": expected,
            "status": "PASS" if ok else "FAIL",
        }


def _family_from_args(args):
    kind = FamilyKind(args.family)
    if kind in (FamilyKind.B_SERIES, FamilyKind.D_SERIES):
        return WeightFamily(kind, args.K)
    if kind is FamilyKind.YANG_PARAM:
        return WeightFamily(kind, parse_rational(args.c) if args.c else None)
    return WeightFamily(kind)


def cmd_carleman(args, ctx, emit):
    workers = args.workers

    if args.rank:
        families = [parse_family(item) for item in args.rank.split(",")]
        ranking = tightness_ranking(families, args.N, ctx, workers)
        rows = [
            emit.row({"rank": i + 1, "family": r.family.label, "total_slack": r.total_slack, "min_margin": r.min_margin})
            for i, r in enumerate(ranking)
        ]
        ok = all(r.min_margin > 0 for r in ranking)
        return {"rows": rows, "expected": {"min_margin_positive": True}, "status": "PASS" if ok else "FAIL"}

    family = _family_from_args(args)
    if args.seq:
        report = finite_carleman_report(parse_sequence(args.seq), family, args.N, ctx, workers)
        row = emit.row({
            "family": family.label,
            "sequence": report.sequence.label,
            "N": report.N,
            "lhs": report.lhs,
            "rhs": report.rhs,
            "min_margin": report.min_margin,
            "holds": report.holds,
        })
        return {"rows": [row], "expected": {"lhs_below_rhs": True}, "status": "PASS" if report.holds and report.min_margin > 0 else "FAIL"}

    profile = margin_profile(family, args.max, ctx, workers)
    row = emit.row({
        "family": family.label,
        "N": args.max,
        "min_margin": profile.minimum,
        "argmin": profile.argmin,
        "scan_bits": profile.bits,
    })
    return {"rows": [row], "expected": {"min_margin_positive": True}, "status": "PASS" if profile.minimum > 0 else "FAIL"}


COMMANDS = {
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "quad": cmd_quad,
    "order": cmd_order,
    "carleman": cmd_carleman,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--precision-bits', type=int, default=config.DEFAULT_PRECISION_BITS,
                        help=f'Mantissa bits (default: {config.DEFAULT_PRECISION_BITS})')
    common.add_argument('--format', choices=['json', 'csv'], default='json',
                        help='Output format (default: json)')
    common.add_argument('--tolerance', default=config.DEFAULT_TOLERANCE,
                        help=f'Comparison tolerance (default: {config.DEFAULT_TOLERANCE})')
    common.add_argument('--digits', type=int, default=config.DEFAULT_DIGITS,
                        help=f'Significant digits in printed values (default: {config.DEFAULT_DIGITS})')
    common.add_argument('--out', help='Write the document here instead of stdout')
    common.add_argument('--workers', type=int, default=None,
                        help='Processes for per-n grids (default: ESERIES_WORKERS or 1)')
    common.add_argument('--verbose', action='store_true', help='Debug logging')

    parser = argparse.ArgumentParser(prog='eseries', description='Series coefficients of (1+1/x)^x')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('coeffs', parents=[common], help='Exact coefficient tables')
    p.add_argument('--route', choices=[r.value for r in Route], default=Route.D_CONVERSION.value)
    p.add_argument('--max', type=int, default=10, help='Largest index (default: 10)')

    p = sub.add_parser('verify', parents=[common], help='Cross-route exact checks')
    p.add_argument('--max', type=int, default=200, help='Largest index (default: 200)')
    p.add_argument('--inject-fault', type=int, default=None, help=argparse.SUPPRESS)

    p = sub.add_parser('quad', parents=[common], help='Quadrature route')
    p.add_argument('--target', choices=['g-mass', 'g-moment', 'h', 'd'], default='g-mass')
    p.add_argument('--n', type=int, default=3, help='Coefficient index for --target d (default: 3)')
    p.add_argument('--x', default='1', help='Argument of h for --target h (default: 1)')
    p.add_argument('--j', type=int, default=1, help='Moment order for --target g-moment (default: 1)')
    p.add_argument('--rule', choices=[r.value for r in Rule], default=Rule.DOUBLE_EXPONENTIAL.value)
    p.add_argument('--quad-tolerance', default=config.DEFAULT_QUAD_TOLERANCE,
                   help=f'Absolute quadrature target (default: {config.DEFAULT_QUAD_TOLERANCE})')
    p.add_argument('--max-levels', type=int, default=config.DEFAULT_QUAD_LEVELS,
                   help=f'Refinement levels before giving up (default: {config.DEFAULT_QUAD_LEVELS})')

    start = config.DEFAULT_SAMPLE_START
    p = sub.add_parser('order', parents=[common], help='Convergence-order experiments')
    p.add_argument('--experiment', choices=['truncation', 'shift-compare', 'c-fit', 'd-fit'], default='truncation')
    p.add_argument('--shift', default='11/12', help='Shift for --experiment truncation (default: 11/12)')
    p.add_argument('--K', default='1,3,4', help='Truncation depths (default: 1,3,4)')
    p.add_argument('--terms', '--k', dest='terms', default='1,3,4', help='Nonzero-term counts for shift-compare (default: 1,3,4)')
    p.add_argument('--params', default=None, help='Comma-separated parameter values for the fits')
    p.add_argument('--n-min', type=int, default=start)
    p.add_argument('--n-max', type=int, default=start * 2 ** (config.DEFAULT_SAMPLE_LEVELS - 1))

    p = sub.add_parser('carleman', parents=[common], help='Carleman weight families')
    p.add_argument('--family', choices=[k.value for k in FamilyKind], default=FamilyKind.D_SERIES.value)
    p.add_argument('--K', type=int, default=3, help='Depth for series families (default: 3)')
    p.add_argument('--c', default=None, help=f'Yang parameter (default: {config.DEFAULT_YANG_C})')
    p.add_argument('--margin', action='store_true', help='Pointwise margin scan over 1..--max (the default mode)')
    p.add_argument('--max', type=int, default=config.DEFAULT_MARGIN_N,
                   help=f'Margin scan range (default: {config.DEFAULT_MARGIN_N})')
    p.add_argument('--seq', default=None, help="Sequence for a finite report, e.g. 'geometric:1/2'")
    p.add_argument('--N', type=int, default=config.DEFAULT_REPORT_N,
                   help=f'Terms in reports and rankings (default: {config.DEFAULT_REPORT_N})')
    p.add_argument('--rank', default=None, help="Comma-separated families to rank, e.g. 'd-series:3,bicheng-debnath'")
    return parser


def _render(document, fmt):
    if fmt == 'json':
        return json.dumps(document, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in document["config"].items():
        buf.write(f"# {key}={value}\n")
    buf.write(f"# status={document['status']}\n")
    rows = document.get("rows")
    if rows is None:
        result = document["result"]
        rows = result["failures"] if "failures" in result else [result]
    pd.DataFrame(rows).to_csv(buf, index=False)
    return buf.getvalue()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config.configure_logging(logging.DEBUG if args.verbose else logging.INFO)

    run_config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ('workers', 'out', 'verbose', 'command', 'format')
    }
    document = {"command": args.command, "config": run_config}
    try:
        ctx = _context(args)
        emit = Emitter(args.digits)
        document.update(COMMANDS[args.command](args, ctx, emit))
        code = 0 if document["status"] == "PASS" else 1
    except (ValueError, PrecisionError) as e:
        print(f"eseries {args.command}: {e}", file=sys.stderr)
        return 2
    except QuadratureError as e:
        logger.error(str(e))
        emit = Emitter(args.digits)
        partial = e.result
        document.update({
            "result": emit.row({
                "error": str(e),
                "value": partial.value,
                "error_estimate": partial.error_estimate,
                "nodes_used": partial.nodes_used,
                "levels": partial.levels,
            }),
            "status": "FAIL",
        })
        code = 1
    except ConvergenceError as e:
        logger.error(str(e))
        document.update({"result": {"error": str(e)}, "status": "FAIL"})
        code = 1

    text = _render(document, args.format)
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text)
        logger.info(f"Wrote {args.command} output to {args.out}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
