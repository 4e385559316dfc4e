"""
Extended-precision evaluation of (1+1/x)^x and its truncated expansions.

The relative error sequence of a truncated expansion is
    (1+1/n)^n = e (1 - sum_{k<=K} c_k/(n+eps)^k) exp(omega_n)
and its decay is measured empirically: if n^k (omega_n - omega_{n+1}) -> l
with k > 1, then n^(k-1) omega_n -> l/(k-1). Limits are taken by Richardson
extrapolation over n, 2n, 4n, ...
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache, partial

import mpmath
import numpy as np
from mpmath import libmp
from scipy.optimize import bisect

from eseries import config
from eseries.exact_coeffs import SHIFT, b_coeff, d_from_b, shifted_coeff

logger = logging.getLogger(__name__)


class PrecisionError(RuntimeError):
    """Mantissa budget too small for the requested sample range."""


class ConvergenceError(RuntimeError):
    """Extrapolated limits disagree, or no sign change brackets a root."""


@dataclass(frozen=True)
class PrecisionContext:
    mantissa_bits: int = config.DEFAULT_PRECISION_BITS
    tolerance: str = config.DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.mantissa_bits < config.MIN_PRECISION_BITS:
            raise ValueError(
                f"mantissa_bits must be >= {config.MIN_PRECISION_BITS}, got {self.mantissa_bits}"
            )
        if Fraction(self.tolerance) <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")

    def workprec(self, extra: int = 0):
        return mpmath.workprec(self.mantissa_bits + extra)

    @property
    def comparison_tolerance(self):
        with self.workprec():
            return to_mpf(Fraction(self.tolerance))

    def require_headroom(self, n_max: int):
        """Differences at n_max lose about 4 log2(n_max) bits."""
        needed = 128 + 4 * math.log2(max(n_max, 2))
        if self.mantissa_bits < needed:
            raise PrecisionError(
                f"{self.mantissa_bits} bits cannot resolve differences up to n={n_max}; "
                f"need at least {math.ceil(needed)}"
            )

    def doubled(self) -> PrecisionContext:
        return replace(self, mantissa_bits=2 * self.mantissa_bits)


DEFAULT_CONTEXT = PrecisionContext()


def to_mpf(value):
    """Round an exact value once to the working precision."""
    if isinstance(value, mpmath.mpf):
        return +value
    q = Fraction(value)
    return mpmath.mp.make_mpf(
        libmp.from_rational(q.numerator, q.denominator, mpmath.mp.prec, libmp.round_nearest)
    )


@lru_cache(maxsize=None)
def _euler_at(bits: int):
    with mpmath.workprec(bits):
        return mpmath.exp(1)


def euler(ctx: PrecisionContext = DEFAULT_CONTEXT):
    """e evaluated through the exponential function at context precision."""
    return _euler_at(ctx.mantissa_bits)


def _log_pow(q: Fraction):
    """q ln(1 + 1/q) for exact positive q, at the working precision."""
    return to_mpf(q) * mpmath.log(to_mpf((q + 1) / q))


def pow_expr(x, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """(1+1/x)^x = exp(x ln(1+1/x))."""
    with ctx.workprec():
        if isinstance(x, mpmath.mpf):
            if x <= 0:
                raise ValueError(f"x must be positive, got {x}")
            return mpmath.exp(x * mpmath.log1p(1 / x))
        q = Fraction(x)
        if q <= 0:
            raise ValueError(f"x must be positive, got {x}")
        return mpmath.exp(_log_pow(q))


@dataclass(frozen=True)
class ExpansionSpec:
    """e(1 - sum_{k=1}^{K} c_k/(x+shift)^k), truncated at depth K."""

    shift: Fraction
    coefficients: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "shift", Fraction(self.shift))
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))
        if not 0 < self.shift <= 1:
            raise ValueError(f"shift must lie in (0, 1], got {self.shift}")

    @property
    def depth(self) -> int:
        return len(self.coefficients)

    def inner(self, x: Fraction) -> Fraction:
        """Exact bracket 1 - sum c_k t^k, t = 1/(x+shift), by Horner."""
        t = 1 / (Fraction(x) + self.shift)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = c + t * acc
        return 1 - t * acc


def series_spec(shift, depth: int) -> ExpansionSpec:
    """Expansion carrying the exact series coefficients 1..depth at this shift."""
    shift = Fraction(shift)
    if shift == 1:
        coefficients = [b_coeff(k) for k in range(1, depth + 1)]
    elif shift == SHIFT:
        coefficients = [d_from_b(k) for k in range(1, depth + 1)]
    else:
        coefficients = [shifted_coeff(k, shift) for k in range(1, depth + 1)]
    return ExpansionSpec(shift=shift, coefficients=tuple(coefficients))


def reciprocal_form(a, b) -> ExpansionSpec:
    """e(1 - 1/(a n + b)) written as e(1 - (1/a)/(n + b/a))."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    return ExpansionSpec(shift=b / a, coefficients=(1 / a,))


def eval_truncated(x, spec: ExpansionSpec, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """
    Truncated expansion at x. Rational x gets an exact bracket and a single
    rounding; extended-precision x is evaluated by Horner in 1/(x+shift).
    """
    with ctx.workprec():
        e = euler(ctx)
        if isinstance(x, mpmath.mpf):
            if x <= 0:
                raise ValueError(f"x must be positive, got {x}")
            if spec.depth == 0:
                return +e
            t = 1 / (x + to_mpf(spec.shift))
            acc = mpmath.mpf(0)
            for c in reversed(spec.coefficients):
                acc = to_mpf(c) + t * acc
            return e * (1 - t * acc)
        q = Fraction(x)
        if q <= 0:
            raise ValueError(f"x must be positive, got {x}")
        return e * to_mpf(spec.inner(q))


def relative_error_seq(n: int, spec: ExpansionSpec, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """omega_n = ln (1+1/n)^n - ln eval_truncated(n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    inner = spec.inner(Fraction(n))
    if inner <= 0:
        raise ValueError(f"truncated approximant is not positive at n={n}")
    with ctx.workprec():
        return _log_pow(Fraction(n)) - 1 - mpmath.log(to_mpf(inner))


def omega_sequence(spec: ExpansionSpec, ctx: PrecisionContext = DEFAULT_CONTEXT):
    return partial(relative_error_seq, spec=spec, ctx=ctx)


@dataclass(frozen=True)
class OrderEstimate:
    exponent: object
    limit_constant: object
    sample_range: tuple
    tail_constant: object = None
    spread: object = None


def richardson_limit(values, step_ratio=2):
    """
    Most refined Richardson extrapolants for samples at n, r n, r^2 n, ...
    whose error expands in powers of 1/n. Entry m used the last m+1 samples.
    """
    level = list(values)
    best = [level[-1]]
    for m in range(1, len(values)):
        mult = mpmath.mpf(step_ratio) ** m
        level = [(mult * level[i + 1] - level[i]) / (mult - 1) for i in range(len(level) - 1)]
        best.append(level[-1])
    return best


def geometric_samples(n_min: int, n_max: int) -> list:
    """n_min, 2 n_min, 4 n_min, ... up to n_max."""
    if n_min < 1 or not n_min < n_max:
        raise ValueError(f"sample range must satisfy 1 <= n_min < n_max, got ({n_min}, {n_max})")
    levels = int(math.floor(math.log2(n_max / n_min))) + 1
    samples = [int(n) for n in n_min * 2 ** np.arange(levels, dtype=np.int64)]
    if len(samples) < 2:
        raise ValueError(f"sample range ({n_min}, {n_max}) holds fewer than two doublings")
    return samples


def default_sample_range() -> tuple:
    start = config.DEFAULT_SAMPLE_START
    return start, start * 2 ** (config.DEFAULT_SAMPLE_LEVELS - 1)


def _check_spread(estimates, rtol, what):
    spread = abs(estimates[-1] - estimates[-2])
    if spread > rtol * max(1, abs(estimates[-1])):
        raise ConvergenceError(
            f"{what}: successive extrapolants differ by {mpmath.nstr(spread, 5)}"
        )
    return spread


def order_probe(
    omega,
    k,
    sample_range=None,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    rtol: float = config.DEFAULT_PROBE_RTOL,
) -> OrderEstimate:
    """
    Estimate l = lim n^k (omega_n - omega_{n+1}) and the implied
    lim n^(k-1) omega_n = l/(k-1), the latter also measured directly.
    """
    n_min, n_max = sample_range or default_sample_range()
    samples = geometric_samples(n_min, n_max)
    ctx.require_headroom(samples[-1] + 1)
    with ctx.workprec():
        kk = to_mpf(k)
        if kk <= 1:
            raise ValueError(f"k must exceed 1, got {k}")
        diffs, tails = [], []
        for n in samples:
            w = omega(n)
            diffs.append(mpmath.mpf(n) ** kk * (w - omega(n + 1)))
            tails.append(mpmath.mpf(n) ** (kk - 1) * w)
        limits = richardson_limit(diffs)
        spread = _check_spread(limits, rtol, "order probe")
        tail = richardson_limit(tails)[-1]
        logger.debug(f"probe k={k}: l={mpmath.nstr(limits[-1], 12)} tail={mpmath.nstr(tail, 12)}")
        return OrderEstimate(
            exponent=kk - 1,
            limit_constant=limits[-1],
            sample_range=(samples[0], samples[-1]),
            tail_constant=tail,
            spread=spread,
        )


lemma1_order_probe = order_probe


@dataclass(frozen=True)
class FitFamily:
    """One-parameter approximation e(1 - (1/2)/(n+11/12) - p/(n+11/12)^slot)."""

    name: str
    slot: int
    order: int
    expected_root: Fraction
    leading: object
    subleading: object

    def spec(self, value) -> ExpansionSpec:
        coefficients = [Fraction(1, 2)] + [Fraction(0)] * (self.slot - 2) + [Fraction(value)]
        return ExpansionSpec(shift=SHIFT, coefficients=tuple(coefficients))


# printed expansions of omega_n - omega_{n+1}
FIT_FAMILIES = {
    "c": FitFamily(
        name="c",
        slot=2,
        order=3,
        expected_root=Fraction(0),
        leading=lambda c: 2 * c,
        subleading=lambda c: -(7 * c + Fraction(5, 96)),
    ),
    "d": FitFamily(
        name="d",
        slot=3,
        order=4,
        expected_root=Fraction(5, 288),
        leading=lambda d: 3 * d - Fraction(5, 96),
        subleading=lambda d: -15 * d + Fraction(493, 2160),
    ),
}


@dataclass(frozen=True)
class FitRow:
    param: Fraction
    leading: object
    subleading: object
    expected_leading: Fraction
    expected_subleading: Fraction


@dataclass(frozen=True)
class FitReport:
    family: str
    rows: list
    root: float
    expected_root: Fraction
    bracket: tuple = field(default=())


def difference_coefficients(omega, order: int, samples, ctx: PrecisionContext, rtol=config.DEFAULT_PROBE_RTOL):
    """Leading and sub-leading coefficients of omega_n - omega_{n+1} at n^-order, n^-(order+1)."""
    with ctx.workprec():
        scaled = [mpmath.mpf(n) ** order * (omega(n) - omega(n + 1)) for n in samples]
        leading = richardson_limit(scaled)
        _check_spread(leading, rtol, f"n^-{order} coefficient")
        lead = leading[-1]
        residual = [n * (s - lead) for n, s in zip(samples, scaled)]
        sub = richardson_limit(residual)[-1]
        return lead, sub


def fit_leading_coeffs(
    family,
    param_values,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    sample_range=None,
    xtol: float = 1e-12,
) -> FitReport:
    """
    Measure the dominant coefficient of omega_n - omega_{n+1} for each
    parameter value and bisect for the parameter that nullifies it.
    """
    if not isinstance(family, FitFamily):
        if family not in FIT_FAMILIES:
            raise ValueError(f"unknown fit family {family!r}; expected one of {sorted(FIT_FAMILIES)}")
        family = FIT_FAMILIES[family]
    params = sorted(Fraction(p) for p in param_values)
    if not params:
        raise ValueError("parameter list must not be empty")
    n_min, n_max = sample_range or default_sample_range()
    samples = geometric_samples(n_min, n_max)
    ctx.require_headroom(samples[-1] + 1)

    def measure(value):
        return difference_coefficients(omega_sequence(family.spec(value), ctx), family.order, samples, ctx)

    rows = []
    for p in params:
        lead, sub = measure(p)
        rows.append(FitRow(p, lead, sub, family.leading(p), family.subleading(p)))
        logger.info(f"{family.name}={p}: leading {mpmath.nstr(lead, 10)} (printed {float(family.leading(p)):.10g})")

    bracket = None
    for left, right in zip(rows, rows[1:]):
        if left.leading == 0:
            bracket = (left.param, left.param)
            break
        if left.leading * right.leading <= 0:
            bracket = (left.param, right.param)
            break
    if bracket is None:
        raise ConvergenceError(f"no sign change of the {family.name}-family coefficient over {params}")

    if bracket[0] == bracket[1]:
        root = float(bracket[0])
    else:
        root = bisect(
            lambda p: float(measure(Fraction(p))[0]),
            float(bracket[0]),
            float(bracket[1]),
            xtol=xtol,
        )
    logger.info(f"{family.name}-family root {root:.12g} (printed {family.expected_root})")
    return FitReport(
        family=family.name,
        rows=rows,
        root=root,
        expected_root=family.expected_root,
        bracket=bracket,
    )


def expected_truncation_exponent(shift, depth: int, search: int = 64) -> int:
    """Index of the first nonzero coefficient omitted by truncation at depth."""
    shift = Fraction(shift)
    for k in range(depth + 1, depth + search + 1):
        if shifted_coeff(k, shift) != 0:
            return k
    raise ValueError(f"no nonzero coefficient beyond depth {depth} within {search} terms")


def truncation_order_report(
    eps,
    K: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    sample_range=None,
    rtol: float = config.DEFAULT_PROBE_RTOL,
) -> OrderEstimate:
    """Empirical decay exponent p of |omega_n| ~ C n^-p for the series truncated at depth K."""
    if K < 1:
        raise ValueError(f"truncation depth must be >= 1, got {K}")
    spec = series_spec(eps, K)
    omega = omega_sequence(spec, ctx)
    n_min, n_max = sample_range or default_sample_range()
    samples = geometric_samples(n_min, n_max)
    ctx.require_headroom(2 * samples[-1])
    with ctx.workprec():
        values = {n: omega(n) for n in samples + [2 * samples[-1]]}
        ratios = [mpmath.log(abs(values[n]) / abs(values[2 * n]), 2) for n in samples]
        exponents = richardson_limit(ratios)
        spread = _check_spread(exponents, rtol, f"decay exponent (eps={eps}, K={K})")
        p = exponents[-1]
        power = int(mpmath.nint(p))
        constant = richardson_limit([mpmath.mpf(n) ** power * values[n] for n in samples])[-1]
    logger.info(f"eps={eps} K={K}: exponent {mpmath.nstr(p, 8)}")
    return OrderEstimate(
        exponent=p,
        limit_constant=constant,
        sample_range=(samples[0], 2 * samples[-1]),
        spread=spread,
    )


@dataclass(frozen=True)
class ShiftComparison:
    terms: int
    base_depth: int
    shifted_depth: int
    base: OrderEstimate
    shifted: OrderEstimate


def nonzero_depth(shift, terms: int) -> int:
    """Depth at which the series at this shift has retained `terms` nonzero coefficients."""
    if terms < 1:
        raise ValueError(f"terms must be >= 1, got {terms}")
    kept, k = 0, 0
    while kept < terms:
        k += 1
        if shifted_coeff(k, Fraction(shift)) != 0:
            kept += 1
    return k


def shift_comparison(terms: int, ctx: PrecisionContext = DEFAULT_CONTEXT, sample_range=None) -> ShiftComparison:
    """Decay exponents of the shift-1 and shift-11/12 series with equally many nonzero terms."""
    base_depth = nonzero_depth(1, terms)
    shifted_depth = nonzero_depth(SHIFT, terms)
    return ShiftComparison(
        terms=terms,
        base_depth=base_depth,
        shifted_depth=shifted_depth,
        base=truncation_order_report(1, base_depth, ctx, sample_range),
        shifted=truncation_order_report(SHIFT, shifted_depth, ctx, sample_range),
    )
