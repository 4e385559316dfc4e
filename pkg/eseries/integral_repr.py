"""
Quadrature route to the coefficients.

With g(s) = (1/pi) s^s (1-s)^(1-s) sin(pi s) on [0, 1]:
    h(x) = (x+1)[e - (1+1/x)^x] = e/2 + int_0^1 g(s)/(x+s) ds
    d_n  = (-1)^n / 12^(n-1) * (-1/2 + (1/e) int_0^1 [(12s-11)^(n-1) - 1]/(s-1) g(s) ds),  n >= 2

The quadrature loop drives mpmath's tanh-sinh and Gauss-Legendre rules one
level at a time so that node counts and per-level error estimates are kept.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

import mpmath
from mpmath.calculus.quadrature import GaussLegendre, TanhSinh

from eseries import config
from eseries.precision_eval import DEFAULT_CONTEXT, PrecisionContext, euler, pow_expr, to_mpf

logger = logging.getLogger(__name__)


class Rule(str, Enum):
    DOUBLE_EXPONENTIAL = "tanh-sinh"
    COMPOSITE_GAUSS = "gauss-legendre"


class HRoute(str, Enum):
    DIRECT = "direct"
    INTEGRAL = "integral"


_RULES = {
    Rule.DOUBLE_EXPONENTIAL: (TanhSinh, 1),
    Rule.COMPOSITE_GAUSS: (GaussLegendre, config.GAUSS_PANELS),
}


@dataclass(frozen=True)
class QuadratureConfig:
    rule: Rule = Rule.DOUBLE_EXPONENTIAL
    target_abs_tolerance: Fraction = Fraction(config.DEFAULT_QUAD_TOLERANCE)
    max_levels: int = config.DEFAULT_QUAD_LEVELS

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        object.__setattr__(self, "target_abs_tolerance", Fraction(self.target_abs_tolerance))
        if self.target_abs_tolerance <= 0:
            raise ValueError(f"target_abs_tolerance must be positive, got {self.target_abs_tolerance}")
        if not isinstance(self.max_levels, int) or self.max_levels < 1:
            raise ValueError(f"max_levels must be an integer >= 1, got {self.max_levels!r}")

    def scaled(self, factor) -> QuadratureConfig:
        return QuadratureConfig(self.rule, self.target_abs_tolerance * Fraction(factor), self.max_levels)


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class QuadratureResult:
    value: object
    error_estimate: object
    nodes_used: int
    levels: int = 0
    level_errors: tuple = field(default=())


class QuadratureError(RuntimeError):
    def __init__(self, message, result: QuadratureResult):
        super().__init__(message)
        self.result = result


def integrate(f, cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """Integrate f over [0, 1], refining level by level until the summed panel error meets the target."""
    rule_cls, panel_count = _RULES[cfg.rule]
    with ctx.workprec():
        rule = rule_cls(mpmath.mp)
        prec = mpmath.mp.prec
        epsilon = mpmath.ldexp(1, -prec + 10)
        tolerance = to_mpf(cfg.target_abs_tolerance)
        panels = [
            (to_mpf(Fraction(i, panel_count)), to_mpf(Fraction(i + 1, panel_count)))
            for i in range(panel_count)
        ]
        history = [[] for _ in panels]
        nodes_used = 0
        level_errors = []
        value = error = None

        for level in range(1, cfg.max_levels + 1):
            for (a, b), results in zip(panels, history):
                nodes = rule.get_nodes(a, b, level, prec)
                nodes_used += len(nodes)
                results.append(rule.sum_next(f, nodes, level, prec, results))
            value = mpmath.fsum(results[-1] for results in history)
            if level == 1:
                continue
            error = mpmath.fsum(rule.estimate_error(results, prec, epsilon) for results in history)
            level_errors.append(error)
            logger.debug(f"{cfg.rule.value} level {level}: {nodes_used} nodes, error {mpmath.nstr(error, 3)}")
            if error <= tolerance:
                return QuadratureResult(value, error, nodes_used, level, tuple(level_errors))

        partial = QuadratureResult(
            value,
            error if error is not None else mpmath.inf,
            nodes_used,
            cfg.max_levels,
            tuple(level_errors),
        )
    raise QuadratureError(
        f"{cfg.rule.value}: tolerance {float(cfg.target_abs_tolerance):.3g} not reached "
        f"after {cfg.max_levels} levels",
        partial,
    )


def _g(s):
    # evaluated on the smaller of s, 1-s so that g(s) and g(1-s) round identically
    if isinstance(s, mpmath.mpf):
        if s <= 0 or s >= 1:
            return mpmath.mpf(0)
        lo, hi = sorted((s, 1 - s))
    else:
        q = Fraction(s)
        if q == 0 or q == 1:
            return mpmath.mpf(0)
        lo, hi = (to_mpf(v) for v in sorted((q, 1 - q)))
    entropy = lo * mpmath.log(lo) + hi * mpmath.log(hi)
    return mpmath.exp(entropy) * mpmath.sinpi(lo) / mpmath.pi


def g_density(s, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """(1/pi) s^s (1-s)^(1-s) sin(pi s); exactly 0 at both endpoints."""
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    with ctx.workprec():
        return _g(s)


def g_moment(j: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """int_0^1 s^j g(s) ds."""
    if not isinstance(j, int) or j < 0:
        raise ValueError(f"moment order must be an integer >= 0, got {j!r}")
    return integrate(lambda s: s**j * _g(s), cfg, ctx)


def g_mass(cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    return g_moment(0, cfg, ctx)


def _positive_argument(x):
    if not isinstance(x, mpmath.mpf):
        x = Fraction(x)
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    return x


def h_integral(x, cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """e/2 + int_0^1 g(s)/(x+s) ds, with the quadrature bookkeeping of the integral."""
    x = _positive_argument(x)
    with ctx.workprec():
        xx = to_mpf(x)
        half_e = euler(ctx) / 2
        try:
            integral = integrate(lambda s: _g(s) / (xx + s), cfg, ctx)
        except QuadratureError as err:
            raise QuadratureError(str(err), replace(err.result, value=half_e + err.result.value)) from err
        return replace(integral, value=half_e + integral.value)


def alzer_h(x, route=HRoute.DIRECT, cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT):
    route = HRoute(route)
    x = _positive_argument(x)
    if route is HRoute.INTEGRAL:
        return h_integral(x, cfg, ctx).value
    with ctx.workprec():
        return (to_mpf(x) + 1) * (euler(ctx) - pow_expr(x, ctx))


def d_from_integral(n: int, cfg: QuadratureConfig = DEFAULT_QUADRATURE, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """
    d_n from the g-integral. The target tolerance applies to d_n, so the
    integral runs against the tolerance scaled by 2 12^(n-1), which stays
    below e 12^(n-1).
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"the integral formula needs n >= 2, got {n!r}")
    with ctx.workprec():
        e = euler(ctx)
        scale = e * mpmath.mpf(12) ** (n - 1)

        def integrand(s):
            # [(12s-11)^(n-1) - 1]/(s-1) = 12 sum_{j<n-1} (12s-11)^j
            u = 12 * s - 11
            acc = mpmath.mpf(1)
            for _ in range(n - 2):
                acc = acc * u + 1
            return 12 * acc * _g(s)

        inner_cfg = cfg.scaled(Fraction(12) ** (n - 1) * 2)
        try:
            integral = integrate(integrand, inner_cfg, ctx)
        except QuadratureError as err:
            raise QuadratureError(str(err), _to_coefficient(err.result, n, e, scale)) from err
        return _to_coefficient(integral, n, e, scale)


def _to_coefficient(integral: QuadratureResult, n: int, e, scale) -> QuadratureResult:
    sign = -1 if n % 2 else 1
    value = sign * (integral.value / e - mpmath.mpf(1) / 2) / mpmath.mpf(12) ** (n - 1)
    return QuadratureResult(
        value=value,
        error_estimate=integral.error_estimate / scale,
        nodes_used=integral.nodes_used,
        levels=integral.levels,
        level_errors=tuple(err / scale for err in integral.level_errors),
    )
