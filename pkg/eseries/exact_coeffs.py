"""
Exact rational coefficients of the expansions of (1+1/x)^x.

Sequences computed here:
- b_n: (1+1/x)^x = e(1 - sum b_k/(x+1)^k)
- d_n: (1+1/x)^x = e(1 - sum d_k/(x+11/12)^k), by two independent routes
    * conversion from the b-series (binomial re-expansion, integer Gamma values)
    * recurrence c_n = (1/n) sum a_{n-k-1} c_k on the generating
      function g(t) = e(c_0 + c_1 t + ...), with d_n = -c_n
- a_n, L_n: coefficients of (ln g)' and ln g

Everything is a fractions.Fraction; nothing in this module rounds.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial

logger = logging.getLogger(__name__)

SHIFT = Fraction(11, 12)

# Reference values used as oracles by the CLI and the validation script.
# b_6 is the recurrence value; the published 1945/580608 is listed below.
PRINTED_B = {
    0: Fraction(1),
    1: Fraction(1, 2),
    2: Fraction(1, 24),
    3: Fraction(1, 48),
    4: Fraction(73, 5760),
    5: Fraction(11, 1280),
    6: Fraction(3625, 580608),
}
# Published values that disagree with every route; reported, never enforced
KNOWN_MISPRINTS = {
    ("b", 6): Fraction(1945, 580608),
}
PRINTED_D = {
    1: Fraction(1, 2),
    2: Fraction(0),
    3: Fraction(5, 288),
    4: Fraction(139, 17280),
    5: Fraction(119, 23040),
}


class Route(str, Enum):
    B_SERIES = "b"
    D_CONVERSION = "d-conversion"
    D_RECURRENCE = "d-recurrence"
    A_SEQUENCE = "a"
    C_SEQUENCE = "c"
    LOG_G = "log-g"


class _Recurrence:
    """Memoized sequence; asking for index n fills every lower index."""

    def __init__(self, seed, step):
        self._values = list(seed)
        self._step = step
        self._lock = threading.Lock()

    def __getitem__(self, n):
        if n < len(self._values):
            return self._values[n]
        with self._lock:
            while len(self._values) <= n:
                self._values.append(self._step(self._values))
        return self._values[n]


def _next_b(b):
    # generating function exp(-sum y^k / (k(k+1))) gives the k+2 denominator
    n = len(b)
    total = Fraction(1, n + 1)
    for k in range(n - 1):
        total -= b[n - 1 - k] / (k + 2)
    return total / n


def _next_c(c):
    n = len(c)
    total = Fraction(0)
    for k in range(n):
        total += a_coeff(n - k - 1) * c[k]
    return total / n


_B = _Recurrence([Fraction(1)], _next_b)
_C = _Recurrence([Fraction(1)], _next_c)


def _require_natural(n, lowest=0):
    if not isinstance(n, int) or n < lowest:
        raise ValueError(f"index must be an integer >= {lowest}, got {n!r}")


def b_coeff(n: int) -> Fraction:
    """Coefficient of (x+1)^-n in the bracket; b_0 = 1."""
    _require_natural(n)
    return _B[n]


def log_g_coeff(n: int) -> Fraction:
    """Maclaurin coefficient of t^n in ln g(t); L_0 = 1 encodes g(0) = e."""
    _require_natural(n)
    if n == 0:
        return Fraction(1)
    sign = (-1) ** n
    power = 11 ** (n + 1)
    bracket = Fraction(sign * 11 - power, n) - Fraction(-sign - power, n + 1)
    return bracket / 12 ** (n + 1)


@lru_cache(maxsize=None)
def a_coeff(n: int) -> Fraction:
    """Coefficient of t^n in phi = (ln g)'; equals (n+1) L_{n+1}."""
    _require_natural(n)
    sign = (-1) ** (n + 1)
    power = 11 ** (n + 2)
    bracket = Fraction(sign * 11 - power, n + 1) - Fraction(-sign - power, n + 2)
    return Fraction(n + 1, 12 ** (n + 2)) * bracket


def c_coeff(n: int) -> Fraction:
    """Coefficient of t^n in g(t)/e, c_0 = 1."""
    _require_natural(n)
    return _C[n]


@lru_cache(maxsize=None)
def shifted_coeff(s: int, shift=SHIFT) -> Fraction:
    """
    Coefficient of (x+shift)^-s obtained by re-expanding the b-series.

    With t = 1/(x+shift), (x+1)^-k = t^k (1 + (1-shift) t)^-k, so
        d_s = Gamma(s) sum_{k=1}^{s} (-1)^(s-k) (1-shift)^(s-k) b_k
                                    / (Gamma(s-k+1) Gamma(k))
    Gamma is only ever evaluated at positive integers, as exact factorials.
    """
    _require_natural(s, 1)
    shift = Fraction(shift)
    if not 0 < shift <= 1:
        raise ValueError(f"shift must lie in (0, 1], got {shift}")
    gap = 1 - shift
    total = Fraction(0)
    for k in range(1, s + 1):
        gamma_ratio = factorial(s - 1) // (factorial(s - k) * factorial(k - 1))
        total += (-1) ** (s - k) * gamma_ratio * gap ** (s - k) * b_coeff(k)
    return total


def d_from_b(s: int) -> Fraction:
    """d_s through the b-series conversion (s >= 1)."""
    return shifted_coeff(s, SHIFT)


def d_from_recurrence(n: int) -> Fraction:
    """d_n = -c_n through the generating-function recurrence (n >= 1)."""
    _require_natural(n, 1)
    return -c_coeff(n)


def optimal_shift() -> Fraction:
    """Shift that annihilates the second coefficient: b_2 - (1-shift) b_1 = 0."""
    return 1 - b_coeff(2) / b_coeff(1)


def format_rational(q: Fraction) -> str:
    """Canonical 'p/q' text; integers render without a denominator."""
    return str(Fraction(q))


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


@dataclass(frozen=True)
class CoefficientTable:
    route: Route
    entries: tuple
    # the leading '1' of the bracket for the d routes; d_0 itself is not tabulated
    constant_term: Fraction | None = None

    @property
    def indices(self):
        return [n for n, _ in self.entries]

    @property
    def values(self):
        return [v for _, v in self.entries]


_ROUTES = {
    Route.B_SERIES: (0, b_coeff),
    Route.D_CONVERSION: (1, d_from_b),
    Route.D_RECURRENCE: (1, d_from_recurrence),
    Route.A_SEQUENCE: (0, a_coeff),
    Route.C_SEQUENCE: (0, c_coeff),
    Route.LOG_G: (0, log_g_coeff),
}


def coefficient_table(route, n_max: int) -> CoefficientTable:
    """Contiguous table of one route's coefficients up to n_max."""
    route = Route(route)
    _require_natural(n_max)
    start, producer = _ROUTES[route]
    entries = tuple((n, producer(n)) for n in range(start, n_max + 1))
    constant = Fraction(1) if route in (Route.D_CONVERSION, Route.D_RECURRENCE) else None
    logger.debug(f"{route.value}: {len(entries)} entries up to index {n_max}")
    return CoefficientTable(route=route, entries=entries, constant_term=constant)


def check_route_agreement(n_max: int, recurrence=d_from_recurrence) -> list:
    """Failure records where the conversion and recurrence routes disagree."""
    failures = []
    for n in range(1, n_max + 1):
        converted, recurred = d_from_b(n), recurrence(n)
        if converted != recurred:
            failures.append({
                "check": "route-agreement",
                "index": n,
                "conversion": format_rational(converted),
                "recurrence": format_rational(recurred),
            })
    return failures


def check_consistency(n_max: int) -> list:
    """a_n = (n+1) L_{n+1} for 0 <= n <= n_max."""
    failures = []
    for n in range(n_max + 1):
        lhs, rhs = a_coeff(n), (n + 1) * log_g_coeff(n + 1)
        if lhs != rhs:
            failures.append({
                "check": "a-log-consistency",
                "index": n,
                "a": format_rational(lhs),
                "scaled_log": format_rational(rhs),
            })
    return failures


def check_positivity(n_max: int) -> list:
    """b_n > 0 on 1..n_max; d_n > 0 on {1} and 3..n_max; d_2 = 0."""
    failures = []
    for n in range(1, n_max + 1):
        if b_coeff(n) <= 0:
            failures.append({"check": "b-positive", "index": n, "value": format_rational(b_coeff(n))})
    for n in range(1, n_max + 1):
        value = d_from_b(n)
        ok = value == 0 if n == 2 else value > 0
        if not ok:
            failures.append({"check": "d-sign", "index": n, "value": format_rational(value)})
    return failures
