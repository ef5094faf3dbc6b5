"""Largest eigenvalue of the linearised doubling operator.

Around the fixed point g (with alpha = 1/g(1), signed) the operator acts on
even functions as

    (L f)(x) = alpha g'(g(x/alpha)) f(x/alpha) + alpha f(g(x/alpha)).

Its dominant eigenvalue is delta.  ``L`` is never formed: a vector is read as
the Chebyshev coefficients of f, ``L f`` is sampled at the collocation nodes
and transformed back to coefficients.  Arnoldi (classical Gram-Schmidt,
started from e_1) builds the Hessenberg matrix H_k one column at a time, and
after every column the secant method finds the root of det(tI - H_k) near
the previous estimate.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
from gmpy2 import fma, mpfr

from . import _parallel
from . import linalg as la
from .chebyshev import (ChebEvenSeries, ChebOddSeries, EvenEvaluator, NodeSet, _clenshaw_u,
                        _clenshaw_v, differentiate, make_nodes, values_to_coeffs)
from .errors import ConvergenceError
from .gsolver import alpha_from
from .mpnum import PrecisionContext

log = logging.getLogger(__name__)

FIRST_SEEDS = ("4.6", "4.7")
REORTH_TRIGGER = 0.1


def default_max_arnoldi(n: int) -> int:
    return math.ceil(3 * math.sqrt(n)) + 10


class LinearizedOperator:
    """Matrix-free action of the linearised operator on even coefficient vectors.

    Everything that does not depend on the input vector (the points
    x_i/alpha, g there, g' at g(x_i/alpha)) is tabulated once.
    """

    def __init__(self, g: ChebEvenSeries, ctx: PrecisionContext, nodes: NodeSet | None = None,
                 alpha=None) -> None:
        self.g = g
        self.ctx = ctx
        self.nodes = nodes or make_nodes(g.n, ctx)
        if self.nodes.n != g.n:
            raise ValueError("node count must match the series length")
        self.gprime: ChebOddSeries = differentiate(g, ctx)
        self.alpha = alpha_from(g, ctx) if alpha is None else alpha
        with ctx.active():
            a = self.alpha
            ev = EvenEvaluator(g.coeffs)
            y = [t / a for t in self.nodes.nodes]
            gy = [ev(v) for v in y]
            self._u_y = [2 * v * v - 1 for v in y]
            self._u_gy = [2 * v * v - 1 for v in gy]
            # alpha g'(g(y)) folded into one weight per node
            self._w = [a * v * _clenshaw_v(self.gprime.coeffs, uv) if self.gprime.n else mpfr(0)
                       for v, uv in zip(gy, self._u_gy)]

    @property
    def n(self) -> int:
        return self.nodes.n

    def node_values(self, v: Sequence) -> list:
        """(L f)(t_i) for f with coefficients ``v``."""
        if len(v) != self.n:
            raise ValueError(f"vector has {len(v)} entries, operator is {self.n}-dimensional")
        a = self.alpha

        def one(i: int) -> mpfr:
            return fma(self._w[i], _clenshaw_u(v, self._u_y[i]), a * _clenshaw_u(v, self._u_gy[i]))

        return _parallel.pmap(one, range(self.n), self.ctx)

    def __call__(self, v: Sequence) -> list:
        return list(values_to_coeffs(self.node_values(v), self.nodes, self.ctx).coeffs)


def apply_DT(op: LinearizedOperator, v: Sequence) -> list:
    return op(v)


@dataclass
class ArnoldiState:
    Q: list
    H: list  # H[j] is column j: entries h_{0..j+1, j}
    ctx: PrecisionContext
    delta_estimates: list = field(default_factory=list)
    complete: bool = False
    reorthogonalizations: int = 0

    @property
    def k(self) -> int:
        return len(self.H)

    @classmethod
    def start(cls, n: int, ctx: PrecisionContext) -> ArnoldiState:
        e1 = [mpfr(1)] + [mpfr(0)] * (n - 1)
        return cls([e1], [], ctx)

    def h(self, i: int, j: int):
        """Entry (i, j) of the extended Hessenberg matrix (0-based)."""
        col = self.H[j]
        return col[i] if i < len(col) else mpfr(0)

    def square(self, k: int | None = None) -> list:
        """Leading k x k block as a list of rows."""
        k = self.k if k is None else k
        return [[self.h(i, j) for j in range(k)] for i in range(k)]


def arnoldi_step(state: ArnoldiState, op: Callable[[Sequence], list],
                 breakdown_tol=None) -> ArnoldiState:
    """Extend the Krylov basis by one vector (classical Gram-Schmidt).

    A second projection pass runs when the orthogonalised vector keeps less
    than a tenth of its norm.
    """
    if state.complete:
        return state
    ctx = state.ctx
    w = op(state.Q[-1])
    with ctx.active():
        wnorm = gmpy2.sqrt(la._dot(w, w))
        # all projections against the same w, then one subtraction sweep
        h = [la._dot(q, w) for q in state.Q]
        for hi, q in zip(h, state.Q):
            w = [fma(-hi, qi, wi) for qi, wi in zip(q, w)]
        rnorm = gmpy2.sqrt(la._dot(w, w))
        if wnorm > 0 and rnorm < REORTH_TRIGGER * wnorm:
            state.reorthogonalizations += 1
            h2 = [la._dot(q, w) for q in state.Q]
            for hi, q in zip(h2, state.Q):
                w = [fma(-hi, qi, wi) for qi, wi in zip(q, w)]
            h = [a + b for a, b in zip(h, h2)]
            rnorm = gmpy2.sqrt(la._dot(w, w))
        if breakdown_tol is None:
            breakdown_tol = gmpy2.mul_2exp(max(wnorm, mpfr(1)), 16 - ctx.work_bits)
        state.H.append(h + [rnorm])
        if rnorm <= breakdown_tol:
            state.complete = True
            return state
        inv = 1 / rnorm
        state.Q.append([inv * x for x in w])
    return state


def hessenberg_charpoly_eval(H, k: int, t, ctx: PrecisionContext) -> mpfr:
    """det(t I - H_k) through the leading-minor recurrence, O(k^2).

    p_i = (t - h_ii) p_{i-1} - sum_{j<i} h_ji (prod_{l=j}^{i-1} h_{l+1,l}) p_{j-1}
    ``H`` is anything indexable as ``H[i][j]`` (0-based) or an ArnoldiState.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    h = H.h if isinstance(H, ArnoldiState) else (lambda i, j: H[i][j])
    with ctx.active():
        p = [mpfr(1)]
        for i in range(k):
            acc = (t - h(i, i)) * p[i]
            prod = mpfr(1)
            for j in range(i - 1, -1, -1):
                prod = prod * h(j + 1, j)
                acc = acc - h(j, i) * prod * p[j]
            p.append(acc)
        return p[k]


def secant_root(f: Callable, t0, t1, tol, max_iters: int = 200,
                ctx: PrecisionContext | None = None) -> mpfr:
    """Classical secant iteration until |t_{i+1} - t_i| < tol |t_i|."""
    if t0 == t1:
        raise ValueError("secant needs two distinct starting points")
    ctx = ctx or PrecisionContext.from_bits(max(mpfr(t0).precision, mpfr(t1).precision))
    with ctx.active():
        f0, f1 = f(t0), f(t1)
        for _ in range(max_iters):
            if f1 == 0:
                return t1
            if f1 == f0:
                raise ConvergenceError("flat secant: f(t_i) = f(t_{i-1})", best=t1)
            t2 = t1 - f1 * (t1 - t0) / (f1 - f0)
            if abs(t2 - t1) < tol * abs(t1):
                return t2
            t0, f0 = t1, f1
            t1, f1 = t2, f(t2)
    raise ConvergenceError(f"secant did not converge in {max_iters} iterations", best=t1)


def ritz_estimate(state: ArnoldiState, seed, ctx: PrecisionContext) -> mpfr:
    k = state.k
    with ctx.active():
        t0 = mpfr(seed)
        t1 = t0 * (1 + mpfr(10) ** -3)
        tol = gmpy2.mul_2exp(mpfr(1), 24 - ctx.work_bits)
    return secant_root(lambda t: hessenberg_charpoly_eval(state, k, t, ctx), t0, t1, tol, ctx=ctx)


def ritz_vector(state: ArnoldiState, theta, k: int | None = None) -> list:
    """Unit Ritz vector Q_k y for the Ritz value ``theta`` of H_k.

    y solves (H_k - theta I) y = 0 from the last row upwards, starting from
    y_{k-1} = 1; fine as long as no subdiagonal entry vanishes.
    """
    k = state.k if k is None else k
    ctx = state.ctx
    with ctx.active():
        y = [mpfr(0)] * k
        y[k - 1] = mpfr(1)
        for i in range(k - 1, 0, -1):
            acc = -theta * y[i]
            for j in range(i, k):
                acc = acc + state.h(i, j) * y[j]
            y[i - 1] = -acc / state.h(i, i - 1)
        n = len(state.Q[0])
        x = [mpfr(0)] * n
        for yj, q in zip(y, state.Q):
            x = [fma(yj, qi, xi) for qi, xi in zip(q, x)]
        scale = 1 / gmpy2.sqrt(la._dot(x, x))
        return [scale * xi for xi in x]


@dataclass
class DeltaResult:
    delta: mpfr
    iterations: int
    agreement_digits: float
    estimates: list
    seconds_arnoldi: float
    seconds_ritz: float
    state: ArnoldiState


def _agreement(a, b) -> float:
    with gmpy2.context(precision=max(a.precision, b.precision)):
        d = abs(a - b)
        return math.inf if d == 0 else float(gmpy2.log10(abs(a)) - gmpy2.log10(d))


def solve_delta(g: ChebEvenSeries, n: int | None = None, target_digits: int | None = None,
                ctx: PrecisionContext | None = None, max_iters: int | None = None,
                nodes: NodeSet | None = None) -> DeltaResult:
    """Arnoldi from e_1 until two successive Ritz estimates agree to ``target_digits``."""
    from .gsolver import default_target_digits

    n = g.n if n is None else n
    if n != g.n:
        raise ValueError("g must be the solution at the same n")
    target_digits = default_target_digits(n) if target_digits is None else target_digits
    ctx = ctx or PrecisionContext.for_digits(target_digits, n)
    cap = default_max_arnoldi(n) if max_iters is None else max_iters
    op = LinearizedOperator(g, ctx, nodes)
    state = ArnoldiState.start(n, ctx)
    t_arn = t_ritz = 0.0
    prev = None
    agree = 0.0
    while state.k < cap:
        t0 = time.perf_counter()
        arnoldi_step(state, op)
        t1 = time.perf_counter()
        try:
            est = ritz_estimate(state, prev if prev is not None else FIRST_SEEDS[0], ctx)
        except ConvergenceError:
            est = ritz_estimate(state, FIRST_SEEDS[0], ctx)
        t_ritz += time.perf_counter() - t1
        t_arn += t1 - t0
        state.delta_estimates.append(est)
        if prev is not None:
            agree = _agreement(est, prev)
            log.debug("n=%d arnoldi k=%d delta~%s agreement=%.1f digits", n, state.k,
                      est.__format__(".15f"), agree)
            if agree >= target_digits:
                return DeltaResult(est, state.k, agree, state.delta_estimates, t_arn, t_ritz, state)
        if state.complete:
            # invariant subspace: the Ritz values of H_k are exact eigenvalues
            log.debug("n=%d: Krylov space invariant at k=%d, accepting estimate", n, state.k)
            return DeltaResult(est, state.k, agree, state.delta_estimates, t_arn, t_ritz, state)
        prev = est
    raise ConvergenceError(
        f"delta not stabilised after {cap} Arnoldi steps ({agree:.1f} digits agreement)",
        best=prev, iterations=state.k, agreement_digits=agree,
    )
