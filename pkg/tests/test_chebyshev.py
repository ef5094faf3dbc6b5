import random

import gmpy2
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from feigenbaum import chebyshev as ch
from feigenbaum.chebyshev import ChebEvenSeries, ChebOddSeries
from feigenbaum.mpnum import PrecisionContext

from helpers import even_to_monomial, horner, odd_to_monomial, poly_derivative

P256 = PrecisionContext.from_bits(256)


def rand_series(n, rng, ctx=P256):
    with ctx.active():
        return ChebEvenSeries(tuple(mpfr(rng.uniform(-1, 1)) for _ in range(n)))


def rel_err(a, b):
    """|a - b| in exact arithmetic (values here are O(1), so absolute = relative)."""
    return abs(mpq(a) - mpq(b))


# -- nodes -----------------------------------------------------------------

def test_single_node():
    ns = ch.make_nodes(1, P256)
    with P256.active():
        assert abs(ns.nodes[0] - gmpy2.sqrt(mpfr(2)) / 2) < mpfr(2) ** -250


def test_two_nodes_ordered():
    ns = ch.make_nodes(2, P256)
    with P256.active():
        pi = gmpy2.const_pi()
        assert ns.nodes[0] == gmpy2.cos(pi / 8)
        assert abs(ns.nodes[1] - gmpy2.cos(3 * pi / 8)) < mpfr(2) ** -250
    assert ns.nodes[0] > ns.nodes[1]


def test_nodes_range_and_monotone():
    ns = ch.make_nodes(64, P256)
    assert all(0 < t < 1 for t in ns.nodes)
    assert all(a > b for a, b in zip(ns.nodes, ns.nodes[1:]))


def test_make_nodes_rejects_zero():
    with pytest.raises(ValueError):
        ch.make_nodes(0, P256)


def test_cosine_table_matches_direct_cos():
    n = 12
    ns = ch.make_nodes(n, P256)
    for i in range(1, n + 1):
        for j in range(n):
            k = (j * (2 * i - 1)) % (4 * n)
            assert ns.kernel(j, i) == ch.angle_cos(k, 2 * n, P256)


def test_node_images_are_T2():
    ns = ch.make_nodes(10, P256)
    with P256.active():
        for t, u in zip(ns.nodes, ns.u):
            assert abs((2 * t * t - 1) - u) < mpfr(2) ** -250


# -- Clenshaw ----------------------------------------------------------------

def test_clenshaw_base_guess():
    s = ChebEvenSeries((mpfr("0.6"), mpfr("-0.7")))
    with P256.active():
        assert abs(ch.clenshaw_eval(s, mpfr(0), P256) - 1) < mpfr(2) ** -50
        assert abs(ch.clenshaw_eval(s, mpfr(1), P256) + mpfr("0.4")) < mpfr(2) ** -50


def test_clenshaw_six_terms_at_037():
    rng = random.Random(6)
    s = rand_series(6, rng)
    x = mpfr("0.37", 256)
    exact = horner(even_to_monomial(s.coeffs), x)
    assert rel_err(ch.clenshaw_eval(s, x, P256), exact) < mpq(1, 2 ** 244)


@pytest.mark.parametrize("n", [1, 2, 5, 11, 17, 24])
def test_clenshaw_vs_horner_oracle(n):
    rng = random.Random(100 + n)
    bound = mpq(1, 2 ** (256 - 12))
    for _ in range(5):
        s = rand_series(n, rng)
        x = mpfr(rng.uniform(-1, 1), 256)
        exact = horner(even_to_monomial(s.coeffs), x)
        assert rel_err(ch.clenshaw_eval(s, x, P256), exact) < bound


# -- isolated terms ----------------------------------------------------------

def test_isolated_term_small_cases():
    assert ch.isolated_term_eval(0, mpfr("0.3"), P256) == 1
    assert ch.isolated_term_eval(1, mpfr("0.5"), P256) == mpfr("-0.5")


def test_isolated_term_13_matches_clenshaw():
    x = mpfr("0.3", 256)
    e13 = ChebEvenSeries.unit(13, 14)
    assert rel_err(ch.isolated_term_eval(13, x, P256), ch.clenshaw_eval(e13, x, P256)) < mpq(1, 2 ** 240)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=64), st.floats(min_value=-1, max_value=1))
def test_isolated_term_consistency(j, xf):
    x = mpfr(xf, 256)
    ej = ChebEvenSeries.unit(j, j + 1)
    scale = 2 if j == 0 else 1  # the unit series e_0 is T_0 / 2 under the halving convention
    got = ch.isolated_term_eval(j, x, P256)
    assert abs(mpq(got) - scale * mpq(ch.clenshaw_eval(ej, x, P256))) < mpq(1, 2 ** 236)


# -- tail split --------------------------------------------------------------

def test_tail_split_with_zero_tail():
    rng = random.Random(3)
    head = rand_series(5, rng)
    s = head.padded(16)
    x = mpfr("0.61", 256)
    assert ch.tail_split_eval(s, x, 5, P256) == ch.clenshaw_eval(head, x, P256)


def test_tail_split_full_prefix_is_clenshaw():
    rng = random.Random(4)
    s = rand_series(9, rng)
    x = mpfr("-0.2", 256)
    assert ch.tail_split_eval(s, x, 9, P256) == ch.clenshaw_eval(s, x, P256)


def test_tail_split_one_trailing_term():
    rng = random.Random(5)
    c = list(rand_series(4, rng).padded(16).coeffs)
    c[11] = mpfr("0.3125")
    s = ChebEvenSeries(tuple(c))
    x = mpfr("0.77", 256)
    assert rel_err(ch.tail_split_eval(s, x, 4, P256), ch.clenshaw_eval(s, x, P256)) < mpq(1, 2 ** 244)


def test_tail_split_prefix_zero_halves_c0():
    s = ChebEvenSeries((mpfr(2), mpfr(0), mpfr(1)))
    x = mpfr("0.4", 256)
    assert rel_err(ch.tail_split_eval(s, x, 0, P256), ch.clenshaw_eval(s, x, P256)) < mpq(1, 2 ** 248)


# -- derivative --------------------------------------------------------------

def test_derivative_of_constant_is_zero():
    d = ch.differentiate(ChebEvenSeries((mpfr(3),)))
    assert d.n == 0
    assert ch.eval_odd(d, mpfr("0.3"), P256) == 0


def test_derivative_of_T2():
    d = ch.differentiate(ChebEvenSeries((mpfr(0), mpfr(1))))
    assert d.coeffs == (mpfr(4),)


@pytest.mark.parametrize("n", range(1, 9))
def test_derivative_exact_symbolic(n):
    rng = random.Random(n)
    s = ChebEvenSeries(tuple(mpfr(rng.randint(-50, 50)) for _ in range(n)))
    d = ch.differentiate(s, P256)
    expect = poly_derivative(even_to_monomial(s.coeffs))
    got = odd_to_monomial(d.coeffs)
    m = max(len(expect), len(got))
    expect += [0] * (m - len(expect))
    got += [0] * (m - len(got))
    assert expect == got


def test_derivative_matches_finite_difference():
    rng = random.Random(8)
    s = rand_series(8, rng)
    d = ch.differentiate(s, P256)
    x = mpfr("0.41", 256)
    with P256.active():
        h = mpfr(10) ** -38  # 10^(-p/2) at p ~ 77 decimal digits
        fd = (ch.clenshaw_eval(s, x + h, P256) - ch.clenshaw_eval(s, x - h, P256)) / (2 * h)
        assert abs(ch.eval_odd(d, x, P256) - fd) < mpfr(10) ** -30


# -- odd series --------------------------------------------------------------

def test_eval_odd_closed_forms():
    x = mpfr("0.3", 256)
    assert ch.eval_odd(ChebOddSeries((mpfr(1),)), x, P256) == x
    assert ch.eval_odd(ChebOddSeries((mpfr(0), mpfr(1))), mpfr("0.5"), P256) == -1


@pytest.mark.parametrize("n", [1, 3, 10, 20])
def test_eval_odd_vs_horner(n):
    rng = random.Random(50 + n)
    with P256.active():
        d = ChebOddSeries(tuple(mpfr(rng.uniform(-1, 1)) for _ in range(n)))
    x = mpfr(rng.uniform(-1, 1), 256)
    exact = horner(odd_to_monomial(d.coeffs), x)
    assert rel_err(ch.eval_odd(d, x, P256), exact) < mpq(1, 2 ** 244)


# -- transforms --------------------------------------------------------------

def test_constant_series_roundtrip():
    ns = ch.make_nodes(8, P256)
    s = ChebEvenSeries.unit(0, 8)
    s = ChebEvenSeries((mpfr(2),) + s.coeffs[1:])
    vals = ch.coeffs_to_values(s, ns, P256)
    assert all(v == 1 for v in vals)
    back = ch.values_to_coeffs(vals, ns, P256)
    with P256.active():
        assert abs(back.coeffs[0] - 2) < mpfr(2) ** -250
        assert all(abs(c) < mpfr(2) ** -250 for c in back.coeffs[1:])


@pytest.mark.parametrize("n", [4, 16, 23])
def test_dct_roundtrip(n):
    rng = random.Random(n)
    s = rand_series(n, rng)
    ns = ch.make_nodes(n, P256)
    back = ch.values_to_coeffs(ch.coeffs_to_values(s, ns, P256), ns, P256)
    tol = mpfr(2) ** (-256 + 12)
    with P256.active():
        assert max(abs(a - b) for a, b in zip(s.coeffs, back.coeffs)) < tol


def test_coeffs_to_values_matches_clenshaw():
    rng = random.Random(99)
    s = rand_series(16, rng)
    ns = ch.make_nodes(16, P256)
    vals = ch.coeffs_to_values(s, ns, P256)
    with P256.active():
        for t, v in zip(ns.nodes, vals):
            assert abs(v - ch.clenshaw_eval(s, t, P256)) < mpfr(2) ** -240


def test_transform_length_mismatch():
    ns = ch.make_nodes(4, P256)
    with pytest.raises(ValueError):
        ch.values_to_coeffs([mpfr(1)] * 3, ns, P256)
    with pytest.raises(ValueError):
        ch.coeffs_to_values(ChebEvenSeries((mpfr(1),) * 5), ns, P256)
