import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import assume, given
from hypothesis import strategies as st

from muntz_galerkin.fracops import (
    FracCoeffs,
    InadmissibleExponentError,
    RationalOrder,
    caputo_derivative_series,
    frac_integral_monomial,
    frac_integral_series,
    q_matrix,
    vartheta_table,
)
from muntz_galerkin.muntz import GridMismatchError, MuntzGrid, MuntzSeries
from muntz_galerkin.numeric import gamma, working

BITS = 256
Q2 = MuntzGrid(2)


def rel_ok(a, b, p=16):
    with working(BITS):
        return abs(mpc(a) - mpc(b)) <= mpfr(2) ** (p - BITS) * max(abs(mpc(b)), mpfr(2) ** -BITS)


def consts():
    with working(BITS):
        sp = gmpy2.sqrt(gmpy2.const_pi())
        return sp, 2 / sp, sp / 2, 4 / (3 * sp), 1 / gamma(Fraction(5, 2), BITS), 5 / gamma(Fraction(7, 2), BITS)


def rand_series(rng, grid, order, density=0.7):
    cs = [mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) if rng.random() < density else 0 for _ in range(order + 1)]
    return MuntzSeries.from_coeffs(grid, cs, BITS)


def test_rational_order():
    o = RationalOrder.of("3/2")
    assert (o.gamma_num, o.q_denom, o.ceil) == (3, 2, 2)
    assert o.shift(MuntzGrid(6)) == 9
    assert str(o) == "3/2"
    with pytest.raises(ValueError):
        RationalOrder.of(1)
    with pytest.raises(ValueError):
        RationalOrder(2, 4)
    with pytest.raises(GridMismatchError):
        RationalOrder.of("1/3").shift(Q2)


def test_monomial_examples():
    sp, two_over, half_sp, *_ = consts()
    c, e = frac_integral_monomial("1/2", 0, BITS)
    assert e == Fraction(1, 2) and rel_ok(c, two_over)
    c, e = frac_integral_monomial(1, 1, BITS)
    assert e == 2 and c == mpfr("0.5")
    c, e = frac_integral_monomial("1/2", "1/2", BITS)
    assert e == 1 and rel_ok(c, half_sp)
    with pytest.raises(ValueError):
        frac_integral_monomial("1/2", -1, BITS)


def test_series_examples():
    _, two_over, _, _, g52, g72 = consts()
    s = frac_integral_series("1/2", MuntzSeries.constant(Q2, 1, 0, BITS))
    assert s.coeffs[0] == 0 and rel_ok(s.coeffs[1], two_over)
    assert frac_integral_series("1/2", MuntzSeries.zero(Q2, 3, BITS)).is_zero()
    s = frac_integral_series("3/2", MuntzSeries.from_coeffs(Q2, [1, 0, 5], BITS))
    assert s.truncation_order == 5
    assert [c == 0 for c in s.coeffs] == [True, True, True, False, True, False]
    assert rel_ok(s.coeffs[3], g52) and rel_ok(s.coeffs[5], g72)
    with pytest.raises(GridMismatchError):
        frac_integral_series("1/3", MuntzSeries.constant(Q2, 1, 0, BITS))
    assert frac_integral_series("1/2", MuntzSeries.constant(Q2, 1, 3, BITS), cap=2).truncation_order == 2


def test_caputo_examples():
    _, _, half_sp, *_ = consts()
    assert caputo_derivative_series("1/2", MuntzSeries.constant(Q2, 7, 4, BITS)).is_zero()
    d = caputo_derivative_series("1/2", MuntzSeries.from_coeffs(Q2, [0, 1, 0], BITS))
    assert rel_ok(d.coeffs[0], half_sp) and d.coeffs[1] == 0
    assert caputo_derivative_series("3/2", MuntzSeries.from_coeffs(Q2, [0, 0, 1, 0], BITS)).is_zero()
    with pytest.raises(InadmissibleExponentError):
        caputo_derivative_series("3/2", MuntzSeries.from_coeffs(Q2, [0, 1, 0, 0], BITS))
    with pytest.raises(ValueError):
        caputo_derivative_series("3/2", MuntzSeries.from_coeffs(Q2, [1, 0], BITS))


def test_q_matrix_examples():
    _, two_over, half_sp, four_third, *_ = consts()
    Q = q_matrix("1/2", Q2, 2, BITS)
    dense = Q.to_dense()
    nz = {(i, j) for i in range(3) for j in range(3) if dense[i][j] != 0}
    assert nz == {(0, 1), (1, 2)}
    assert rel_ok(dense[0][1], two_over) and rel_ok(dense[1][2], half_sp)
    assert all(v == 0 for row in q_matrix("5/2", Q2, 3, BITS).to_dense() for v in row)
    dense = q_matrix("3/2", Q2, 3, BITS).to_dense()
    nz = {(i, j) for i in range(4) for j in range(4) if dense[i][j] != 0}
    assert nz == {(0, 3)} and rel_ok(dense[0][3], four_third)


def test_frac_coeffs_families():
    fc = FracCoeffs(("1/2", "2/3"), MuntzGrid(6), BITS)
    assert fc.xi(0, 3, 4) == fc.vartheta(0, 7)
    vals = [fc.vartheta(1, m) for m in range(100)]
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # xi_bar(mu) = Γ(mu/q - θ + 1)/Γ(mu/q + 1)
    with working(BITS):
        ref = gamma(Fraction(10, 6) - Fraction(1, 2) + 1, BITS) / gamma(Fraction(10, 6) + 1, BITS)
    assert rel_ok(fc.xi_bar_1(0, 10), ref) and fc.xi_bar_2(0, 10) == fc.xi_bar_1(0, 10)
    with pytest.raises(ValueError):
        fc.xi_bar(0, 2)


orders = st.integers(1, 36).map(lambda k: Fraction(k, 12)).filter(lambda f: f.denominator > 1)


@given(orders, orders, st.integers(0, 2 ** 32))
def test_semigroup(a, b, seed):
    rng = random.Random(seed)
    grid = MuntzGrid(12)
    s = rand_series(rng, grid, 20)
    lhs = frac_integral_series(a, frac_integral_series(b, s))
    rhs = frac_integral_series(a + b, s)
    assert lhs.truncation_order == rhs.truncation_order
    for x, y in zip(lhs.coeffs, rhs.coeffs):
        assert rel_ok(x, y)


@given(orders, st.integers(0, 2 ** 32))
def test_caputo_left_inverse(a, seed):
    rng = random.Random(seed)
    grid = MuntzGrid(12)
    s = rand_series(rng, grid, 24)
    back = caputo_derivative_series(a, frac_integral_series(a, s))
    assert back.truncation_order == s.truncation_order
    for x, y in zip(back.coeffs, s.coeffs):
        assert rel_ok(x, y)


@given(orders, st.integers(0, 2 ** 32))
def test_integral_of_derivative_removes_taylor_part(a, seed):
    rng = random.Random(seed)
    q = 12
    grid = MuntzGrid(q)
    k = int(a * q)
    ceil = -(-a.numerator // a.denominator)
    # admissible: integer powers below ceil(a), anything from a*q upward
    cs = [0] * 40
    for m in range(ceil):
        cs[m * q] = rng.uniform(-1, 1)
    for mu in range(k, 40):
        if rng.random() < 0.6:
            cs[mu] = rng.uniform(-1, 1)
    s = MuntzSeries.from_coeffs(grid, cs, BITS)
    d = caputo_derivative_series(a, s)
    back = frac_integral_series(a, d)
    psi = {m * q for m in range(ceil)}
    assert back.truncation_order == s.truncation_order
    for mu, (x, y) in enumerate(zip(back.coeffs, s.coeffs)):
        assert rel_ok(x, 0 if mu in psi else y)


@given(st.sampled_from(["1/2", "1/3", "5/6", "3/2", "7/3"]), st.integers(0, 30), st.integers(0, 2 ** 32))
def test_q_matrix_matches_series(theta, N, seed):
    rng = random.Random(seed)
    grid = MuntzGrid(6)
    assume(Fraction(theta) * 6 <= N)
    s = rand_series(rng, grid, N)
    Q = q_matrix(theta, grid, N, BITS)
    row = Q.apply_row(s.coeffs, BITS)
    ser = frac_integral_series(theta, s, cap=N)
    assert tuple(row) == ser.coeffs


def test_vartheta_table_values():
    tab = vartheta_table("1/3", MuntzGrid(3), 5, BITS)
    for m in range(6):
        with working(BITS):
            ref = gamma(Fraction(m, 3) + 1, BITS) / gamma(Fraction(m, 3) + Fraction(4, 3), BITS)
        assert rel_ok(tab[m], ref)
