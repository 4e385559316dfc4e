"""
Carleman weight families and desk-scale checks of the weighted inequality

    sum (a_1 ... a_n)^(1/n) < e sum w_n a_n.

A family refines the classical inequality when e w_n >= (1+1/n)^n; that
pointwise margin is scanned over 1..N, and finite partial sums of both sides
are reported for concrete sequences.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache, partial

import mpmath

from eseries import config
from eseries.exact_coeffs import SHIFT, parse_rational
from eseries.grid import evaluate_grid, from_raw
from eseries.precision_eval import (
    DEFAULT_CONTEXT,
    PrecisionContext,
    euler,
    pow_expr,
    series_spec,
    to_mpf,
)

logger = logging.getLogger(__name__)

# 1 - 1/(2cn + 4c/3 + 1/2) stays positive for every n >= 1 only above this
YANG_MIN_PARAM = Fraction(3, 20)


class FamilyKind(str, Enum):
    CLASSICAL_E = "classical"
    BICHENG_DEBNATH = "bicheng-debnath"
    PING_GUOZHENG = "ping-guozheng"
    YANG_PARAM = "yang"
    B_SERIES = "b-series"
    D_SERIES = "d-series"


_SERIES_SHIFT = {FamilyKind.B_SERIES: Fraction(1), FamilyKind.D_SERIES: SHIFT}


@dataclass(frozen=True)
class WeightFamily:
    kind: FamilyKind
    param: object = None

    def __post_init__(self):
        kind = FamilyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is FamilyKind.YANG_PARAM:
            c = Fraction(config.DEFAULT_YANG_C if self.param is None else self.param)
            if c <= YANG_MIN_PARAM:
                raise ValueError(f"yang parameter must exceed {YANG_MIN_PARAM}, got {c}")
            object.__setattr__(self, "param", c)
        elif kind in _SERIES_SHIFT:
            if not isinstance(self.param, int) or self.param < 1:
                raise ValueError(f"{kind.value} needs an integer depth K >= 1, got {self.param!r}")
        elif self.param is not None:
            raise ValueError(f"{kind.value} takes no parameter, got {self.param!r}")

    @property
    def is_series(self) -> bool:
        return self.kind in _SERIES_SHIFT

    @property
    def label(self) -> str:
        if self.param is None:
            return self.kind.value
        return f"{self.kind.value}:{self.param}"


def parse_family(text: str) -> WeightFamily:
    """'classical', 'yang:1/2', 'd-series:3', ..."""
    name, _, raw = text.strip().partition(":")
    try:
        kind = FamilyKind(name)
    except ValueError:
        choices = ", ".join(k.value for k in FamilyKind)
        raise ValueError(f"unknown weight family {name!r}; expected one of {choices}") from None
    if not raw:
        return WeightFamily(kind)
    if kind in _SERIES_SHIFT:
        return WeightFamily(kind, int(raw))
    return WeightFamily(kind, parse_rational(raw))


def _require_index(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")


def series_weight(family: WeightFamily, n: int, ctx: PrecisionContext = DEFAULT_CONTEXT, exact: bool = True):
    """
    1 - sum_{k<=K} c_k/(n+shift)^k. The exact path rounds the rational inner
    sum once; otherwise Horner runs in extended precision with 16 guard bits.
    """
    if not family.is_series:
        raise ValueError(f"{family.label} is not a series family")
    _require_index(n)
    spec = series_spec(_SERIES_SHIFT[family.kind], family.param)
    if exact:
        with ctx.workprec():
            return to_mpf(spec.inner(Fraction(n)))
    with ctx.workprec(16):
        t = 1 / (n + to_mpf(spec.shift))
        acc = mpmath.mpf(0)
        for c in reversed(spec.coefficients):
            acc = to_mpf(c) + t * acc
        inner = 1 - t * acc
    with ctx.workprec():
        return +inner


def weight(family: WeightFamily, n: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    _require_index(n)
    kind = family.kind
    if family.is_series:
        return series_weight(family, n, ctx)
    with ctx.workprec():
        if kind is FamilyKind.CLASSICAL_E:
            return mpmath.mpf(1)
        if kind is FamilyKind.BICHENG_DEBNATH:
            return to_mpf(1 - Fraction(1, 2 * n + 2))
        if kind is FamilyKind.PING_GUOZHENG:
            # (1 + 1/(n + 1/5))^(-1/2)
            return mpmath.sqrt(to_mpf(Fraction(5 * n + 1, 5 * n + 6)))
        c = family.param
        base = 1 - 1 / (2 * c * n + Fraction(4, 3) * c + Fraction(1, 2))
        if base <= 0:
            raise ValueError(f"{family.label}: weight base is not positive at n={n}")
        return mpmath.power(to_mpf(base), to_mpf(c))


def scan_bits(family: WeightFamily, N: int, ctx: PrecisionContext) -> int:
    """Working precision for a margin scan up to N; series tails shrink like N^-(K+1)."""
    if not family.is_series:
        return ctx.mantissa_bits
    guard = (family.param + 1) * math.ceil(math.log2(N + 1)) + 32
    return ctx.mantissa_bits + guard


@lru_cache(maxsize=config.POW_CACHE_SIZE)
def _pow_at(n: int, bits: int):
    return pow_expr(n, PrecisionContext(mantissa_bits=bits))


def _margin_raw(family: WeightFamily, bits: int, n: int):
    scan = PrecisionContext(mantissa_bits=bits)
    w = weight(family, n, scan)
    with scan.workprec():
        return (euler(scan) * w - _pow_at(n, bits))._mpf_


def _weight_raw(family: WeightFamily, bits: int, n: int):
    return weight(family, n, PrecisionContext(mantissa_bits=bits))._mpf_


@dataclass(frozen=True)
class MarginProfile:
    family: WeightFamily
    N: int
    rows: list
    minimum: object
    argmin: int
    bits: int

    @property
    def total_slack(self):
        with mpmath.workprec(self.bits):
            return mpmath.fsum(m for _, m in self.rows)


def margin_profile(family: WeightFamily, N: int, ctx: PrecisionContext = DEFAULT_CONTEXT, workers=None) -> MarginProfile:
    """(n, e w_n - (1+1/n)^n) for 1 <= n <= N, with the minimum and where it occurs."""
    _require_index(N)
    bits = scan_bits(family, N, ctx)
    raw = evaluate_grid(partial(_margin_raw, family, bits), range(1, N + 1), workers)
    with mpmath.workprec(bits):
        rows = [(n, from_raw(r)) for n, r in zip(range(1, N + 1), raw)]
    argmin, minimum = min(rows, key=lambda row: row[1])
    logger.debug(f"{family.label}: minimum margin {mpmath.nstr(minimum, 6)} at n={argmin} ({bits} bits)")
    return MarginProfile(family=family, N=N, rows=rows, minimum=minimum, argmin=argmin, bits=bits)


def pointwise_margin(family: WeightFamily, N: int, ctx: PrecisionContext = DEFAULT_CONTEXT, workers=None):
    return margin_profile(family, N, ctx, workers).minimum


class SequenceKind(str, Enum):
    GEOMETRIC = "geometric"
    POWER_DECAY = "power"
    FINITE_SUPPORT = "finite"


_DEFAULT_SEQUENCE_PARAMS = {
    SequenceKind.GEOMETRIC: Fraction(1, 2),
    SequenceKind.POWER_DECAY: Fraction(2),
    SequenceKind.FINITE_SUPPORT: (Fraction(1), Fraction(1, 2), Fraction(1, 4)),
}


@dataclass(frozen=True)
class SequenceSpec:
    kind: SequenceKind
    param: object = None

    def __post_init__(self):
        kind = SequenceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        param = _DEFAULT_SEQUENCE_PARAMS[kind] if self.param is None else self.param
        if kind is SequenceKind.FINITE_SUPPORT:
            param = tuple(Fraction(v) for v in param)
            if any(v < 0 for v in param) or sum(param) <= 0:
                raise ValueError(f"finite sequence needs nonnegative values with positive sum, got {param}")
        else:
            param = Fraction(param)
            if kind is SequenceKind.GEOMETRIC and not 0 < param < 1:
                raise ValueError(f"geometric ratio must lie in (0, 1), got {param}")
            if kind is SequenceKind.POWER_DECAY and param <= 1:
                raise ValueError(f"power decay exponent must exceed 1, got {param}")
        object.__setattr__(self, "param", param)

    @property
    def label(self) -> str:
        if self.kind is SequenceKind.FINITE_SUPPORT:
            return f"finite:{','.join(str(v) for v in self.param)}"
        return f"{self.kind.value}:{self.param}"

    def log_term(self, n: int):
        """ln a_n at the working precision, or None when a_n = 0."""
        if self.kind is SequenceKind.GEOMETRIC:
            return n * mpmath.log(to_mpf(self.param))
        if self.kind is SequenceKind.POWER_DECAY:
            return -to_mpf(self.param) * mpmath.log(n)
        if n > len(self.param) or self.param[n - 1] == 0:
            return None
        return mpmath.log(to_mpf(self.param[n - 1]))

    def term(self, n: int):
        log_a = self.log_term(n)
        return mpmath.mpf(0) if log_a is None else mpmath.exp(log_a)


def parse_sequence(text: str) -> SequenceSpec:
    """'geometric:1/2', 'power:2', 'finite:1,0.5,0.25'."""
    name, _, raw = text.strip().partition(":")
    try:
        kind = SequenceKind(name)
    except ValueError:
        choices = ", ".join(k.value for k in SequenceKind)
        raise ValueError(f"unknown sequence {name!r}; expected one of {choices}") from None
    if not raw:
        return SequenceSpec(kind)
    if kind is SequenceKind.FINITE_SUPPORT:
        return SequenceSpec(kind, tuple(parse_rational(v) for v in raw.split(",")))
    return SequenceSpec(kind, parse_rational(raw))


@dataclass(frozen=True)
class InequalityReport:
    family: WeightFamily
    sequence: SequenceSpec
    N: int
    lhs: object
    rhs: object
    min_margin: object

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


def finite_carleman_report(
    seq: SequenceSpec,
    family: WeightFamily,
    N: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    workers=None,
) -> InequalityReport:
    """Both sides of the weighted inequality summed over 1..N, plus the pointwise margin."""
    _require_index(N)
    weights = evaluate_grid(partial(_weight_raw, family, ctx.mantissa_bits), range(1, N + 1), workers)
    profile = margin_profile(family, N, ctx, workers)
    with ctx.workprec():
        means, weighted = [], []
        log_prefix = mpmath.mpf(0)
        hit_zero = False
        for n, w_raw in zip(range(1, N + 1), weights):
            log_a = seq.log_term(n)
            if log_a is None:
                hit_zero = True
                weighted.append(mpmath.mpf(0))
            else:
                log_prefix += log_a
                weighted.append(from_raw(w_raw) * mpmath.exp(log_a))
            means.append(mpmath.mpf(0) if hit_zero else mpmath.exp(log_prefix / n))
        lhs = mpmath.fsum(means)
        rhs = euler(ctx) * mpmath.fsum(weighted)
    report = InequalityReport(
        family=family, sequence=seq, N=N, lhs=lhs, rhs=rhs, min_margin=profile.minimum
    )
    logger.info(
        f"{seq.label} / {family.label}, N={N}: lhs {mpmath.nstr(lhs, 10)} rhs {mpmath.nstr(rhs, 10)}"
    )
    return report


@dataclass(frozen=True)
class TightnessRow:
    family: WeightFamily
    total_slack: object
    min_margin: object


def tightness_ranking(families, N: int, ctx: PrecisionContext = DEFAULT_CONTEXT, workers=None) -> list:
    """Families ordered by total slack over 1..N, tightest first; ties keep input order."""
    families = list(families)
    if not families:
        raise ValueError("tightness ranking needs at least one family")
    rows = []
    for family in families:
        profile = margin_profile(family, N, ctx, workers)
        rows.append(TightnessRow(family, profile.total_slack, profile.minimum))
    return sorted(rows, key=lambda row: row.total_slack)
