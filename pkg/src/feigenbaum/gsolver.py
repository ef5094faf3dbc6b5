"""Fixed point of the period-doubling operator by Chebyshev collocation.

The universal function is modelled as an even Chebyshev series
``g(x) = sum' c_j T_{2j}(x)`` and its coefficients are the root of

    F_i(c) = g(1) g(t_i) - g(g(g(1) t_i)),    i = 1..n,

at the collocation nodes t_i.  Roots are found with the inverse column
updating method (ICUM): a quasi-Newton iteration on an explicit approximate
inverse Jacobian that changes one column per step.  The inverse Jacobian is
built once per rung, by central differences, at a much lower precision than
the coefficients.

Starting values come from a ladder of smaller problems: size n is seeded by
the zero-padded solution at size round(1.5 sqrt(n)), recursively, down to
the two-term guess (0.6, -0.7), i.e. g(x) = 1 - 1.4 x^2.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import gmpy2
from gmpy2 import mpfr

from . import _parallel
from . import linalg as la
from .chebyshev import ChebEvenSeries, EvenEvaluator, NodeSet, leading_support, make_nodes
from .errors import ConvergenceError, NumericalError
from .mpnum import PrecisionContext, big, guard_bits_for

log = logging.getLogger(__name__)

BASE_GUESS = ("0.6", "-0.7")
LADDER_FLOOR = 6
DIGITS_PER_NODE = 1.75


def default_target_digits(n: int) -> int:
    """Digits worth carrying for an n-node model.

    Slightly above the observed accuracy growth (about 1.63 digits per node)
    so that arithmetic never limits a result.
    """
    return math.ceil(DIGITS_PER_NODE * n) + 10


def default_jacobian_digits(n: int) -> int:
    return max(12, math.ceil(4 * math.sqrt(n)))


def default_max_icum_iters(n: int) -> int:
    return 8 * math.ceil(math.sqrt(n)) + 40


@dataclass
class GSolveConfig:
    n: int
    target_digits: int | None = None
    jacobian_digits: int | None = None
    fd_step_exponent: int | None = None
    max_icum_iters: int | None = None
    residual_tol: mpfr | None = None
    guard_bits: int | None = None
    refresh_window: int = 10

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"collocation size must be >= 2, got {self.n}")
        if self.target_digits is None:
            self.target_digits = default_target_digits(self.n)
        if self.jacobian_digits is None:
            self.jacobian_digits = min(default_jacobian_digits(self.n), self.target_digits)
        if self.jacobian_digits > self.target_digits:
            raise ValueError("jacobian_digits cannot exceed target_digits")
        if self.jacobian_digits < 2:
            raise ValueError("jacobian_digits must be >= 2")
        if self.fd_step_exponent is None:
            self.fd_step_exponent = math.ceil(self.jacobian_digits / 2)
        if self.max_icum_iters is None:
            self.max_icum_iters = default_max_icum_iters(self.n)
        if self.guard_bits is None:
            self.guard_bits = guard_bits_for(self.n)
        if self.residual_tol is None:
            with self.ctx.active():
                self.residual_tol = mpfr(10) ** -(self.target_digits + 3)
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext.for_digits(self.target_digits, guard_bits=self.guard_bits)

    @property
    def jac_ctx(self) -> PrecisionContext:
        return PrecisionContext.for_digits(self.jacobian_digits, guard_bits=0)

    @classmethod
    def for_rung(cls, m: int, cap_digits: int) -> GSolveConfig:
        return cls(m, target_digits=min(cap_digits, default_target_digits(m)))


@dataclass
class SolverState:
    x: list
    Binv: la.DenseMatrix
    Fx: list
    k: int = 0
    history: list = field(default_factory=list)
    refreshes: int = 0


@dataclass
class RungReport:
    n: int
    digits: int
    work_bits: int
    jacobian_bits: int
    iterations: int
    refreshes: int
    residual: float
    seconds: float
    reused: bool = False


@dataclass
class GSolution:
    series: ChebEvenSeries
    alpha: mpfr
    ctx: PrecisionContext
    rungs: list


class CheckpointStore(Protocol):
    def load(self, n: int, min_bits: int) -> ChebEvenSeries | None: ...

    def save(self, series: ChebEvenSeries, bits: int) -> None: ...


# -- residual and Jacobian -------------------------------------------------

def residual_F(c: Sequence, nodes: NodeSet, ctx: PrecisionContext,
               dense_prefix: int | None = None) -> list:
    """Collocation residual g(1) g(t_i) - g(g(g(1) t_i)) at every node."""
    coeffs = c.coeffs if isinstance(c, ChebEvenSeries) else c
    if len(coeffs) != nodes.n:
        raise ValueError(f"{len(coeffs)} coefficients for {nodes.n} nodes")
    with ctx.active():
        ev = EvenEvaluator(coeffs, dense_prefix)
        g1 = ev.at_u(mpfr(1))
        ts, us = nodes.nodes, nodes.u

    def component(i: int) -> mpfr:
        return g1 * ev.at_u(us[i]) - ev(ev(g1 * ts[i]))

    return _parallel.pmap(component, range(nodes.n), ctx)


def fd_jacobian(c: Sequence, nodes: NodeSet, jac_ctx: PrecisionContext,
                fd_step_exponent: int) -> la.DenseMatrix:
    """Central-difference Jacobian of the residual, entirely at ``jac_ctx``.

    Columns are independent.  Coefficients past the last nonzero one of
    ``c`` are handled as isolated terms, so a zero-padded seed costs
    O(m) per evaluation rather than O(n).
    """
    n = nodes.n
    with jac_ctx.active():
        cr = [mpfr(x) for x in c]
        h = mpfr(10) ** -fd_step_exponent
        two_h = 2 * h
    support = leading_support(cr)

    def column(j: int) -> list:
        cp, cm = list(cr), list(cr)
        cp[j] = cr[j] + h
        cm[j] = cr[j] - h
        prefix = max(support, 0)
        Fp = residual_F(cp, nodes, jac_ctx, prefix)
        Fm = residual_F(cm, nodes, jac_ctx, prefix)
        return [(a - b) / two_h for a, b in zip(Fp, Fm)]

    cols = _parallel.pmap(column, range(n), jac_ctx)
    return la.DenseMatrix.from_columns(cols, jac_ctx.work_bits)


def initial_inverse(c: Sequence, nodes: NodeSet, cfg: GSolveConfig) -> la.DenseMatrix:
    J = fd_jacobian(c, nodes, cfg.jac_ctx, cfg.fd_step_exponent)
    return la.invert_gauss(J, cfg.jac_ctx, overwrite=True)


# -- ICUM ------------------------------------------------------------------

def icum_update(Binv: la.DenseMatrix, s: list, y: list, jac_ctx: PrecisionContext) -> int:
    """B' <- B' + (s - B'y) / y_j e_j^T with j = argmax |y_j|; returns j.

    After the update B' y = s up to rounding at the matrix precision.
    """
    j = la.argmax_abs(y)
    yj = y[j]
    if yj == 0:
        raise NumericalError("ICUM breakdown: residual difference vanished; refresh the Jacobian")
    By = la.mat_vec(Binv, y, jac_ctx)
    with jac_ctx.active():
        u = [(si - bi) / yj for si, bi in zip(s, By)]
    la.rank_one_update(Binv, u, j, jac_ctx, inplace=True)
    return j


def icum_solve(state: SolverState, cfg: GSolveConfig, nodes: NodeSet,
               on_step=None) -> list:
    """Iterate x <- x - B' F(x) with column updates until ||F||_inf <= tol.

    ``state`` is advanced in place.  ``on_step(k, s, y, Binv)`` is called
    after every update (tests use it to check the secant condition).
    """
    ctx, jac_ctx = cfg.ctx, cfg.jac_ctx
    tol = cfg.residual_tol
    best_norm, best_x = None, state.x
    mark_norm, mark_k = None, state.k
    while True:
        r = la.norm_inf(state.Fx)
        state.history.append(r)
        if best_norm is None or r < best_norm:
            best_norm, best_x = r, state.x
        if mark_norm is None or r <= mark_norm / 2:
            mark_norm, mark_k = r, state.k
        log.debug("n=%d icum k=%d |F|=%.3e", nodes.n, state.k, float(r))
        if r <= tol:
            return state.x
        if state.k >= cfg.max_icum_iters:
            raise ConvergenceError(
                f"ICUM did not converge in {cfg.max_icum_iters} iterations at n={nodes.n} "
                f"(best |F|={float(best_norm):.3e})",
                best=best_x, iterations=state.k, residual=best_norm,
            )
        if state.k - mark_k >= cfg.refresh_window:
            log.info("n=%d: residual stagnated at k=%d, refreshing Jacobian", nodes.n, state.k)
            state.Binv = None  # release the stale inverse before building the new one
            state.Binv = initial_inverse(state.x, nodes, cfg)
            state.refreshes += 1
            mark_norm, mark_k = r, state.k

        step = la.mat_vec(state.Binv, state.Fx, jac_ctx)
        with ctx.active():
            x_new = [a - b for a, b in zip(state.x, step)]
        F_new = residual_F(x_new, nodes, ctx)
        with ctx.active():
            s = [a - b for a, b in zip(x_new, state.x)]
            y = [a - b for a, b in zip(F_new, state.Fx)]
        if any(v != 0 for v in s):
            icum_update(state.Binv, s, y, jac_ctx)
        if on_step is not None:
            on_step(state.k, s, y, state.Binv)
        state.x, state.Fx = x_new, F_new
        state.k += 1


def solve_rung(seed: Sequence, cfg: GSolveConfig, nodes: NodeSet | None = None,
               on_step=None) -> tuple[ChebEvenSeries, SolverState]:
    ctx = cfg.ctx
    nodes = nodes or make_nodes(cfg.n, ctx)
    with ctx.active():
        x0 = [mpfr(v) for v in seed]
    Binv = initial_inverse(x0, nodes, cfg)
    state = SolverState(x0, Binv, residual_F(x0, nodes, ctx))
    x = icum_solve(state, cfg, nodes, on_step)
    return ChebEvenSeries(tuple(x)), state


# -- ladder ----------------------------------------------------------------

def bootstrap_ladder(n: int) -> list[int]:
    """Rung sizes n = n_0 > n_1 > ... ; the last rung starts from the base guess."""
    if n < 2:
        raise ValueError(f"collocation size must be >= 2, got {n}")
    rungs = [n]
    while True:
        m = max(2, math.floor(1.5 * math.sqrt(rungs[-1]) + 0.5))
        if m <= LADDER_FLOOR or m >= rungs[-1]:
            return rungs
        rungs.append(m)


def base_guess(n: int, ctx: PrecisionContext) -> list:
    with ctx.active():
        c = [mpfr(v) for v in BASE_GUESS]
    return (c + [mpfr(0)] * n)[:n]


def alpha_from(g: ChebEvenSeries, ctx: PrecisionContext) -> mpfr:
    """Signed alpha = 1 / g(1); negative for the true fixed point."""
    with ctx.active():
        g1 = g.coeffs[0] / 2 + sum(g.coeffs[1:], mpfr(0))
        if g1 == 0:
            raise ZeroDivisionError("g(1) = 0, alpha undefined")
        return 1 / g1


def _check_physical(g: ChebEvenSeries, ctx: PrecisionContext) -> None:
    with ctx.active():
        g0 = EvenEvaluator(g.coeffs).at_u(mpfr(-1))
        g1 = EvenEvaluator(g.coeffs).at_u(mpfr(1))
    if not (g1 < 0 and abs(g0 - 1) < mpfr("0.05")):
        raise NumericalError(
            f"solver converged to a non-physical fixed point (g(0)={float(g0):.4f}, g(1)={float(g1):.4f})"
        )


def solve_g(n: int, target_digits: int | None = None, cfg: GSolveConfig | None = None,
            checkpoints: CheckpointStore | None = None) -> GSolution:
    """Run the whole ladder bottom-up and return g at size ``n``."""
    cfg = cfg or GSolveConfig(n, target_digits)
    if cfg.n != n:
        raise ValueError("config size does not match n")
    rungs = bootstrap_ladder(n)
    reports = []
    prev: ChebEvenSeries | None = None
    for m in reversed(rungs):
        rcfg = cfg if m == n else GSolveConfig.for_rung(m, cfg.target_digits)
        ctx = rcfg.ctx
        t0 = time.perf_counter()
        cached = checkpoints.load(m, ctx.work_bits) if checkpoints is not None else None
        if cached is not None:
            log.info("rung n=%d: reusing checkpoint (%d bits), skipping solve", m, ctx.work_bits)
            prev = cached
            reports.append(RungReport(m, rcfg.target_digits, ctx.work_bits, rcfg.jac_ctx.work_bits,
                                      0, 0, 0.0, time.perf_counter() - t0, reused=True))
            continue
        seed = base_guess(m, ctx) if prev is None else list(prev.padded(m).coeffs)
        g, state = solve_rung(seed, rcfg)
        _check_physical(g, ctx)
        dt = time.perf_counter() - t0
        log.info("rung n=%d: %d ICUM iterations, %d refreshes, |F|=%.3e, %.2fs",
                 m, state.k, state.refreshes, float(state.history[-1]), dt)
        reports.append(RungReport(m, rcfg.target_digits, ctx.work_bits, rcfg.jac_ctx.work_bits,
                                  state.k, state.refreshes, float(state.history[-1]), dt))
        if checkpoints is not None:
            checkpoints.save(g, ctx.work_bits)
        prev = g
    ctx = cfg.ctx
    return GSolution(prev, alpha_from(prev, ctx), ctx, reports)


def functional_residual(g: ChebEvenSeries, xs: Sequence, ctx: PrecisionContext) -> mpfr:
    """max |g(1) g(x) - g(g(g(1) x))| over arbitrary sample points."""
    with ctx.active():
        ev = EvenEvaluator(g.coeffs)
        g1 = ev.at_u(mpfr(1))
        return max(abs(g1 * ev(x) - ev(ev(g1 * x))) for x in xs)
