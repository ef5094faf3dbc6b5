"""Even Chebyshev series on [-1, 1].

An even series of length n is

    g(x) = c_0/2 + sum_{j=1}^{n-1} c_j T_{2j}(x),

always with the halved first term.  Since ``T_{2j}(x) = T_j(2x^2 - 1)`` every
evaluation is carried out as an ordinary Chebyshev series in ``u = 2x^2 - 1``,
which halves the recurrence length.

Odd series (derivatives of even ones) are ``sum_j d_j T_{2j+1}(x)``; with
``T_{2j+1}(x) = x V_j(u)`` (Chebyshev polynomials of the third kind) they get
the same treatment.

Collocation nodes are the positive half of the 2n-point Chebyshev grid,
``t_i = cos((2i-1) pi / (4n))``, whose images ``u_i = cos((2i-1) pi / (2n))``
are the roots of ``T_n``.  That makes the node values and the coefficients
a discrete cosine transform pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import fms, mpfr

from . import _parallel
from .mpnum import PrecisionContext, big


@dataclass(frozen=True)
class ChebEvenSeries:
    coeffs: tuple

    def __post_init__(self) -> None:
        if len(self.coeffs) < 1:
            raise ValueError("an even series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(big(c) for c in self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @classmethod
    def unit(cls, j: int, n: int) -> ChebEvenSeries:
        return cls(tuple(mpfr(1 if k == j else 0) for k in range(n)))

    def padded(self, n: int) -> ChebEvenSeries:
        """Zero-extend (or truncate) to length ``n``."""
        c = self.coeffs[:n] + (mpfr(0),) * max(0, n - self.n)
        return ChebEvenSeries(c)

    def __call__(self, x, ctx: PrecisionContext) -> mpfr:
        return clenshaw_eval(self, x, ctx)


@dataclass(frozen=True)
class ChebOddSeries:
    coeffs: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(big(c) for c in self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def __call__(self, x, ctx: PrecisionContext) -> mpfr:
        return eval_odd(self, x, ctx)


@dataclass(frozen=True)
class NodeSet:
    """Collocation nodes and the cosine table shared by both transforms.

    ``cosine_table[k] = cos(k pi / (2n))`` for ``0 <= k < 4n``; the transform
    kernel ``cos(j (2i-1) pi / (2n))`` is entry ``j (2i-1) mod 4n``.
    """

    n: int
    nodes: tuple
    cosine_table: tuple
    bits: int

    def kernel(self, j: int, i: int) -> mpfr:
        """cos(j (2i-1) pi / (2n)) for 0-based coefficient j and 1-based node i."""
        return self.cosine_table[(j * (2 * i - 1)) % (4 * self.n)]

    @property
    def u(self) -> tuple:
        """Node images u_i = 2 t_i^2 - 1, read off the table."""
        return tuple(self.cosine_table[2 * i - 1] for i in range(1, self.n + 1))


def angle_cos(k: int, m: int, ctx: PrecisionContext) -> mpfr:
    """cos(k pi / m) at ``ctx`` precision."""
    with ctx.active():
        return gmpy2.cos(gmpy2.const_pi() * k / m)


def make_nodes(n: int, ctx: PrecisionContext) -> NodeSet:
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    nodes = tuple(angle_cos(2 * i - 1, 4 * n, ctx) for i in range(1, n + 1))
    table = tuple(angle_cos(k, 2 * n, ctx) for k in range(4 * n))
    return NodeSet(n, nodes, table, ctx.work_bits)


# -- evaluation kernels (caller has the precision context active) ----------

_ZERO = mpfr(0)


def _clenshaw_u(c: Sequence, u) -> mpfr:
    """sum' c_j T_j(u) by Clenshaw's backward recurrence."""
    u2 = u + u
    b1 = b2 = _ZERO
    for k in range(len(c) - 1, 0, -1):
        b1, b2 = fms(u2, b1, b2) + c[k], b1
    return fms(u, b1, b2) + c[0] / 2


def _clenshaw_v(d: Sequence, u) -> mpfr:
    """sum d_j V_j(u), V_0 = 1, V_1 = 2u - 1."""
    u2 = u + u
    b1 = b2 = _ZERO
    for k in range(len(d) - 1, -1, -1):
        b1, b2 = fms(u2, b1, b2) + d[k], b1
    return b1 - b2


def _t_pair(k: int, u) -> tuple:
    """(T_k(u), T_{k-1}(u)) for k >= 1 using O(log k) products."""
    if k == 1:
        return u, mpfr(1)
    m, odd = divmod(k, 2)
    if odd:
        tp, tm = _t_pair(m + 1, u)
        return 2 * tp * tm - u, 2 * tm * tm - 1
    tm, tm1 = _t_pair(m, u)
    return 2 * tm * tm - 1, 2 * tm * tm1 - u


def _t(k: int, u) -> mpfr:
    if k == 0:
        return mpfr(1)
    return _t_pair(k, u)[0]


# -- public operations -----------------------------------------------------

def clenshaw_eval(s: ChebEvenSeries, x, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        u = 2 * x * x - 1
        return _clenshaw_u(s.coeffs, u)


def isolated_term_eval(j: int, x, ctx: PrecisionContext) -> mpfr:
    """T_{2j}(x), computed as T_j(2x^2 - 1) by index halving."""
    if j < 0:
        raise ValueError("term index must be non-negative")
    with ctx.active():
        return _t(j, 2 * x * x - 1)


class EvenEvaluator:
    """Repeated evaluation of one even series with a sparse trailing part.

    The first ``dense_prefix`` coefficients go through Clenshaw; each nonzero
    coefficient past that point is added as an isolated term.  Intended for
    use with a precision context already active.
    """

    __slots__ = ("head", "tail")

    def __init__(self, coeffs: Sequence, dense_prefix: int | None = None) -> None:
        n = len(coeffs)
        p = n if dense_prefix is None else dense_prefix
        if not 0 <= p <= n:
            raise ValueError(f"dense_prefix {p} outside [0, {n}]")
        self.head = tuple(coeffs[:p])
        self.tail = tuple(
            (j, coeffs[j] / 2 if j == 0 else coeffs[j]) for j in range(p, n) if coeffs[j] != 0
        )

    def at_u(self, u) -> mpfr:
        acc = _clenshaw_u(self.head, u) if self.head else mpfr(0)
        for j, c in self.tail:
            acc = acc + c * _t(j, u)
        return acc

    def __call__(self, x) -> mpfr:
        return self.at_u(2 * x * x - 1)


def leading_support(coeffs: Sequence) -> int:
    """Index one past the last nonzero coefficient."""
    for j in range(len(coeffs) - 1, -1, -1):
        if coeffs[j] != 0:
            return j + 1
    return 0


def tail_split_eval(s: ChebEvenSeries, x, dense_prefix: int, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        return EvenEvaluator(s.coeffs, dense_prefix)(x)


def differentiate(s: ChebEvenSeries, ctx: PrecisionContext | None = None) -> ChebOddSeries:
    """Coefficients of g' in the odd basis T_1, T_3, ..., T_{2n-3}.

    From the standard recurrence b_{k-1} = b_{k+1} + 2k a_k with a_{2j} = c_j:
    d_j = d_{j+1} + 4(j+1) c_{j+1}.
    """
    n = s.n
    if ctx is None:
        ctx = PrecisionContext.from_bits(max(c.precision for c in s.coeffs))
    d = [mpfr(0)] * max(n - 1, 0)
    with ctx.active():
        acc = mpfr(0)
        for j in range(n - 2, -1, -1):
            acc = acc + 4 * (j + 1) * s.coeffs[j + 1]
            d[j] = acc
    return ChebOddSeries(tuple(d))


def eval_odd(s: ChebOddSeries, x, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        if s.n == 0:
            return mpfr(0)
        return x * _clenshaw_v(s.coeffs, 2 * x * x - 1)


def coeffs_to_values(s: ChebEvenSeries, nodes: NodeSet, ctx: PrecisionContext) -> list:
    """Node values f(t_i) = sum' c_j cos(j (2i-1) pi / (2n))."""
    n = nodes.n
    if s.n != n:
        raise ValueError(f"series length {s.n} does not match {n} nodes")
    c = s.coeffs

    def one(i: int) -> mpfr:
        acc = c[0] / 2
        for j in range(1, n):
            acc = acc + c[j] * nodes.kernel(j, i)
        return acc

    return _parallel.pmap(one, range(1, n + 1), ctx)


def values_to_coeffs(vals: Sequence, nodes: NodeSet, ctx: PrecisionContext) -> ChebEvenSeries:
    """Inverse transform c_j = (2/n) sum_i f(t_i) cos(j (2i-1) pi / (2n))."""
    n = nodes.n
    if len(vals) != n:
        raise ValueError(f"{len(vals)} values for {n} nodes")

    def one(j: int) -> mpfr:
        acc = mpfr(0)
        for i in range(1, n + 1):
            acc = acc + vals[i - 1] * nodes.kernel(j, i)
        return 2 * acc / n

    return ChebEvenSeries(tuple(_parallel.pmap(one, range(n), ctx)))
