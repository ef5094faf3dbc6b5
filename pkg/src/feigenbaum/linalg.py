"""Dense multiprecision vectors and matrices.

Vectors are plain lists of mpfr.  A :class:`DenseMatrix` is a list of rows
plus the precision its entries are stored at; the approximate inverse
Jacobian lives at a reduced precision, so products against it first round
the incoming vector to that precision.

Every reduction runs left to right in a fixed order, which keeps results
bit-identical however the rows are scheduled.  Indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import fma, mpfr

from . import _parallel
from .errors import SingularMatrixError
from .mpnum import PrecisionContext

Vector = list


@dataclass
class DenseMatrix:
    rows: list
    bits: int

    def __post_init__(self) -> None:
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> Vector:
        return [r[j] for r in self.rows]

    def copy(self) -> DenseMatrix:
        return DenseMatrix([list(r) for r in self.rows], self.bits)

    @classmethod
    def identity(cls, n: int, bits: int) -> DenseMatrix:
        return cls([[mpfr(int(i == j)) for j in range(n)] for i in range(n)], bits)

    @classmethod
    def zeros(cls, n: int, bits: int) -> DenseMatrix:
        return cls([[mpfr(0)] * n for _ in range(n)], bits)

    @classmethod
    def from_columns(cls, cols: Sequence[Vector], bits: int) -> DenseMatrix:
        n = len(cols)
        return cls([[cols[j][i] for j in range(n)] for i in range(n)], bits)


def _dot(a: Sequence, b: Sequence) -> mpfr:
    acc = mpfr(0)
    for x, y in zip(a, b):
        acc = fma(x, y, acc)
    return acc


def inner_product(u: Vector, v: Vector, ctx: PrecisionContext) -> mpfr:
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    with ctx.active():
        return _dot(u, v)


def norm2(v: Vector, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        return gmpy2.sqrt(_dot(v, v))


def mat_vec(M: DenseMatrix, v: Vector, ctx: PrecisionContext | None = None) -> Vector:
    """M v at the matrix precision (or ``ctx`` if given).

    ``v`` is rounded to that precision before the products.
    """
    if len(v) != M.n:
        raise ValueError(f"matrix is {M.n}x{M.n}, vector has {len(v)} entries")
    ctx = ctx or PrecisionContext.from_bits(M.bits)
    with ctx.active():
        vr = [mpfr(x) for x in v]
    return _parallel.pmap(lambda row: _dot(row, vr), M.rows, ctx)


def norm_inf(v: Vector) -> mpfr:
    return abs(v[argmax_abs(v)])


def argmax_abs(v: Vector) -> int:
    """Index of the largest |v_i|; the smallest such index on ties."""
    if len(v) == 0:
        raise ValueError("empty vector")
    best, k = abs(v[0]), 0
    for i in range(1, len(v)):
        a = abs(v[i])
        if a > best:
            best, k = a, i
    return k


def matrix_norm_inf(M: DenseMatrix, ctx: PrecisionContext) -> mpfr:
    with ctx.active():
        return max(sum((abs(x) for x in r), mpfr(0)) for r in M.rows)


def invert_gauss(M: DenseMatrix, ctx: PrecisionContext | None = None,
                 overwrite: bool = False) -> DenseMatrix:
    """Explicit inverse by in-place Gauss-Jordan elimination.

    Partial pivoting on the largest |entry| in the pivot column.  A pivot
    below ``2**(8 - work_bits) * ||M||_inf`` is treated as singular.
    With ``overwrite`` the rows of ``M`` are reused as workspace, so only
    one n x n matrix is alive at a time; ``M`` is garbage afterwards.
    """
    ctx = ctx or PrecisionContext.from_bits(M.bits)
    n = M.n
    with ctx.active():
        threshold = gmpy2.mul_2exp(matrix_norm_inf(M, ctx), 8 - ctx.work_bits)
        if overwrite:
            A = M.rows
            if M.bits != ctx.work_bits:
                for i, r in enumerate(A):
                    A[i] = [mpfr(x) for x in r]
        else:
            A = [[mpfr(x) for x in r] for r in M.rows]
        swaps = []
        for k in range(n):
            p = k + argmax_abs([A[i][k] for i in range(k, n)])
            piv = A[p][k]
            if abs(piv) <= threshold:
                raise SingularMatrixError(f"negligible pivot {float(piv):.3e} at column {k}")
            if p != k:
                A[k], A[p] = A[p], A[k]
                swaps.append((k, p))
            Ak = A[k]
            Ak[k] = mpfr(1)
            inv = 1 / piv
            Ak = [x * inv for x in Ak]
            A[k] = Ak
            for i in range(n):
                if i == k:
                    continue
                Ai = A[i]
                nf = -Ai[k]
                if nf == 0:
                    continue
                Ai[k] = mpfr(0)
                A[i] = [fma(nf, a, b) for a, b in zip(Ak, Ai)]
        # row swaps of M become column swaps of the inverse, undone in reverse
        for k, p in reversed(swaps):
            for r in A:
                r[k], r[p] = r[p], r[k]
    return DenseMatrix(A, ctx.work_bits)


def rank_one_update(M: DenseMatrix, u: Vector, j: int, ctx: PrecisionContext | None = None,
                    inplace: bool = False) -> DenseMatrix:
    """M + u e_j^T: add ``u`` to column ``j``, nothing else changes."""
    n = M.n
    if len(u) != n:
        raise ValueError(f"update vector has {len(u)} entries, matrix is {n}x{n}")
    if not 0 <= j < n:
        raise IndexError(f"column {j} out of range for {n}x{n} matrix")
    ctx = ctx or PrecisionContext.from_bits(M.bits)
    out = M if inplace else M.copy()
    with ctx.active():
        for i in range(n):
            out.rows[i][j] = out.rows[i][j] + u[i]
    return out


def axpy(a, x: Vector, y: Vector, ctx: PrecisionContext) -> Vector:
    """a x + y."""
    with ctx.active():
        return [fma(a, xi, yi) for xi, yi in zip(x, y)]


def sub(x: Vector, y: Vector, ctx: PrecisionContext) -> Vector:
    with ctx.active():
        return [a - b for a, b in zip(x, y)]


def scale(a, x: Vector, ctx: PrecisionContext) -> Vector:
    with ctx.active():
        return [a * xi for xi in x]
