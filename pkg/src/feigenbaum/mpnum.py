"""Arbitrary-precision arithmetic substrate.

Every quantity in the package is a :class:`gmpy2.mpfr` (aliased as
``BigReal``): a correctly rounded MPFR binary float that carries its own
precision.  Precision is chosen per pipeline stage through a
:class:`PrecisionContext`; inside ``with ctx.active():`` the ordinary Python
operators round to ``ctx.work_bits`` with round-to-nearest.

Division by zero, overflow, underflow and NaN production are trapped, so no
non-finite value escapes an operation silently.
"""

from __future__ import annotations

import math
import re
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator

import gmpy2
from gmpy2 import mpfr

BigReal = mpfr
_MPFR = type(mpfr(0))

LOG2_10 = math.log2(10)
MIN_BITS = 8

_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")


def big(x) -> mpfr:
    """Coerce to mpfr without touching the precision of an existing mpfr.

    Plain ``mpfr(x)`` would re-round ``x`` to the thread's current precision.
    """
    if isinstance(x, _MPFR):
        return x
    if isinstance(x, int):
        return mpfr(x, max(MIN_BITS, x.bit_length()))
    return mpfr(x)


def guard_bits_for(n: int = 1) -> int:
    """Default guard: 64 bits plus ceil(log2 n) for O(n) summations."""
    return 64 + max(0, math.ceil(math.log2(max(n, 1))))


def digits_to_bits(digits: float) -> int:
    return max(MIN_BITS, math.ceil(digits * LOG2_10))


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision of one pipeline stage.

    ``work_bits`` is the significand size of every rounded result;
    ``guard_bits`` records how much of it sits above the requested digits.
    """

    work_bits: int
    guard_bits: int = 0

    def __post_init__(self) -> None:
        if self.work_bits < MIN_BITS:
            raise ValueError(f"work_bits must be >= {MIN_BITS}, got {self.work_bits}")
        if self.guard_bits < 0:
            raise ValueError("guard_bits must be non-negative")

    @classmethod
    def for_digits(cls, digits: float, n: int = 1, guard_bits: int | None = None) -> PrecisionContext:
        guard = guard_bits_for(n) if guard_bits is None else guard_bits
        return cls(digits_to_bits(digits) + guard, guard)

    @classmethod
    def from_bits(cls, bits: int) -> PrecisionContext:
        return cls(max(bits, MIN_BITS), 0)

    @property
    def digits(self) -> float:
        """Decimal digits carried above the guard."""
        return (self.work_bits - self.guard_bits) / LOG2_10

    @property
    def eps(self) -> mpfr:
        """Unit roundoff 2**(1 - work_bits), exact."""
        return gmpy2.mul_2exp(mpfr(1, MIN_BITS), 1 - self.work_bits)

    def gmp(self) -> gmpy2.context:
        return gmpy2.context(
            precision=self.work_bits,
            round=gmpy2.RoundToNearest,
            trap_divzero=True,
            trap_invalid=True,
            trap_overflow=True,
            trap_underflow=True,
        )

    @contextmanager
    def active(self) -> Iterator[gmpy2.context]:
        """Make this precision current for the calling thread."""
        with self.gmp() as c:
            yield c


# -- field operations ------------------------------------------------------
# Thin, explicit-context forms of the operators.  Hot loops elsewhere use the
# plain operators under ``ctx.active()`` instead.

def add(a, b, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().add(big(a), big(b))


def sub(a, b, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().sub(big(a), big(b))


def mul(a, b, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().mul(big(a), big(b))


def div(a, b, ctx: PrecisionContext) -> mpfr:
    if b == 0:
        raise ZeroDivisionError("division by zero")
    return ctx.gmp().div(big(a), big(b))


def neg(a, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().minus(big(a))


def absolute(a, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().abs(big(a))


def compare(a, b) -> int:
    """-1, 0 or 1 like the classic ``cmp``."""
    return (a > b) - (a < b)


def sqrt(a, ctx: PrecisionContext) -> mpfr:
    if a < 0:
        raise ValueError("sqrt of negative number")
    return ctx.gmp().sqrt(big(a))


def pi(ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        return gmpy2.const_pi()


def cos(x, ctx: PrecisionContext) -> mpfr:
    return ctx.gmp().cos(big(x))


def from_int(k: int, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        return mpfr(k)


def round_to(x, bits: int) -> mpfr:
    """Nearest value representable with ``bits`` significand bits."""
    if bits < MIN_BITS:
        raise ValueError(f"bits must be >= {MIN_BITS}")
    return mpfr(x, bits)


def to_decimal(x, digits: int) -> str:
    """Positional decimal string with ``digits`` significant digits.

    Correctly rounded (MPFR's own binary->decimal conversion).  Very large or
    very small magnitudes switch to ``d.ddde±k`` form.
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    x = big(x)
    if not gmpy2.is_finite(x):
        raise ValueError(f"cannot format non-finite value {x}")
    if x == 0:
        return "0." + "0" * (digits - 1) if digits > 1 else "0"
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    # value = 0.mant * 10**exp
    if -30 < exp <= max(digits, 30):
        if exp <= 0:
            body = "0." + "0" * (-exp) + mant
        elif exp >= len(mant):
            body = mant + "0" * (exp - len(mant))
        else:
            body = mant[:exp] + "." + mant[exp:]
    else:
        body = mant[0] + ("." + mant[1:] if len(mant) > 1 else "") + f"e{exp - 1:+d}"
    return sign + body


def from_decimal(s: str, ctx: PrecisionContext) -> mpfr:
    if not isinstance(s, str) or not _DECIMAL_RE.match(s):
        raise ValueError(f"malformed decimal string: {s!r}")
    with ctx.active():
        return mpfr(s.strip())


def correct_digits(approx, reference) -> float:
    """log10(|ref| / |approx - ref|), the count of correct decimal digits.

    Evaluated at the larger of the two operand precisions; identical values
    give ``inf``.
    """
    a, r = big(approx), big(reference)
    bits = max(a.precision, r.precision)
    with gmpy2.context(precision=bits):
        diff = abs(a - r)
        if diff == 0:
            return math.inf
        return float(gmpy2.log10(abs(r)) - gmpy2.log10(diff))
