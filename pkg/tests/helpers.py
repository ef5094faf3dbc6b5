"""Independent brute-force oracles shared by the tests.

Everything here works in exact rationals (gmpy2.mpq) or through closed
forms, never through the package's own evaluation paths.
"""

from __future__ import annotations

import functools

from gmpy2 import mpq


@functools.lru_cache(maxsize=None)
def cheb_T_int(k: int) -> tuple:
    """Integer monomial coefficients of T_k (index = power)."""
    if k == 0:
        return (1,)
    if k == 1:
        return (0, 1)
    a, b = cheb_T_int(k - 1), cheb_T_int(k - 2)
    out = [0] * (k + 1)
    for p, c in enumerate(a):
        out[p + 1] += 2 * c
    for p, c in enumerate(b):
        out[p] -= c
    return tuple(out)


def even_to_monomial(coeffs) -> list:
    """Exact monomial coefficients of sum' c_j T_{2j}(x)."""
    n = len(coeffs)
    out = [mpq(0)] * (2 * n - 1)
    for j, c in enumerate(coeffs):
        w = mpq(c) / 2 if j == 0 else mpq(c)
        for p, t in enumerate(cheb_T_int(2 * j)):
            out[p] += w * t
    return out


def odd_to_monomial(coeffs) -> list:
    n = len(coeffs)
    out = [mpq(0)] * (2 * n)
    for j, d in enumerate(coeffs):
        for p, t in enumerate(cheb_T_int(2 * j + 1)):
            out[p] += mpq(d) * t
    return out


def horner(coeffs, x):
    acc = mpq(0)
    xq = mpq(x)
    for c in reversed(coeffs):
        acc = acc * xq + c
    return acc


def poly_derivative(coeffs) -> list:
    return [p * c for p, c in enumerate(coeffs)][1:]


def det_cofactor(M) -> mpq:
    """Laplace expansion along the first row, exact."""
    k = len(M)
    if k == 1:
        return mpq(M[0][0])
    total = mpq(0)
    for j in range(k):
        if M[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        total += (-1) ** j * mpq(M[0][j]) * det_cofactor(minor)
    return total
