"""Brute-force reference values from the logistic map.

Slow on purpose: the constants are read off the period-doubling cascade of
x -> mu x (1 - x).  mu_k is the parameter at which the critical point 1/2
lies on a superstable cycle of period 2^(k-1); delta is the limit of
(mu_{k-1} - mu_{k-2}) / (mu_k - mu_{k-1}) and alpha the limit of d_k / d_{k+1},
where d_k is the signed distance from 1/2 to the cycle point half a period
away.  Each level costs twice the previous one, so only a handful of digits
are practical.  Used to anchor the spectral pipeline, never by it.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .errors import NumericalError
from .mpnum import PrecisionContext

# accumulation point of the cascade, truncated (slightly low)
MU_INFINITY = "3.56994567187094490184200515138"
MIN_DEPTH = 5


@dataclass(frozen=True)
class SuperstableSequence:
    mu: tuple
    d: tuple
    ctx: PrecisionContext


@dataclass(frozen=True)
class OracleEstimate:
    value: mpfr
    error: mpfr
    raw: tuple


def _iterate_half(mu, count: int) -> mpfr:
    x = mpfr(1) / 2
    for _ in range(count):
        x = mu * x * (1 - x)
    return x


def _superstable_residual(mu, k: int) -> mpfr:
    return _iterate_half(mu, 1 << (k - 1)) - mpfr(1) / 2


def _bisect(k: int, lo, hi, ctx: PrecisionContext) -> mpfr:
    flo = _superstable_residual(lo, k)
    fhi = _superstable_residual(hi, k)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericalError(f"no sign change bracketing mu_{k} in [{float(lo)}, {float(hi)}]")
    tol = gmpy2.mul_2exp(hi, 4 - ctx.work_bits)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = _superstable_residual(mid, k)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def superstable_params(depth: int, ctx: PrecisionContext | None = None) -> SuperstableSequence:
    """mu_1..mu_depth by bisection, plus the cycle distances d_2..d_depth."""
    if not 1 <= depth <= 40:
        raise ValueError(f"depth must be in [1, 40], got {depth}")
    ctx = ctx or PrecisionContext.from_bits(160)
    with ctx.active():
        mu_inf = mpfr(MU_INFINITY)
        mu = [mpfr(2)]
        for k in range(2, depth + 1):
            if k == 2:
                lo, hi = mpfr("2.5"), mpfr("3.4")
            else:
                gap = mu[-1] - mu[-2]
                lo = mu[-1] + gap / 10
                hi = min(mu[-1] + gap / 2, mu_inf)
            mu.append(_bisect(k, lo, hi, ctx))
        d = tuple(_iterate_half(m, 1 << (k - 2)) - mpfr(1) / 2 for k, m in enumerate(mu[1:], start=2))
    return SuperstableSequence(tuple(mu), d, ctx)


def _aitken(a, b, c):
    den = c - 2 * b + a
    if den == 0:
        return c
    return c - (c - b) ** 2 / den


def _extrapolate(raw: list, ctx: PrecisionContext) -> OracleEstimate:
    with ctx.active():
        best = _aitken(*raw[-3:])
        prev = _aitken(*raw[-4:-1]) if len(raw) >= 4 else raw[-1]
        return OracleEstimate(best, abs(best - prev), tuple(raw))


def delta_oracle(seq: SuperstableSequence) -> OracleEstimate:
    if len(seq.mu) < MIN_DEPTH:
        raise ValueError(f"need depth >= {MIN_DEPTH}, have {len(seq.mu)}")
    mu = seq.mu
    with seq.ctx.active():
        raw = [(mu[k - 1] - mu[k - 2]) / (mu[k] - mu[k - 1]) for k in range(2, len(mu))]
    return _extrapolate(raw, seq.ctx)


def alpha_oracle(seq: SuperstableSequence) -> OracleEstimate:
    """Signed alpha (about -2.5029) from successive cycle distances."""
    if len(seq.mu) < MIN_DEPTH:
        raise ValueError(f"need depth >= {MIN_DEPTH}, have {len(seq.mu)}")
    d = seq.d
    with seq.ctx.active():
        raw = [d[i] / d[i + 1] for i in range(len(d) - 1)]
    return _extrapolate(raw, seq.ctx)
