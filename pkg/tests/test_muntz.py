import random

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from muntz_galerkin.muntz import (
    BasisVector,
    GridMismatchError,
    MuntzGrid,
    MuntzSeries,
    basis_eval,
    conversion_table,
    from_monomial,
    muntz_jacobi_eval,
    project,
    to_monomial,
)
from muntz_galerkin.numeric import working
from muntz_galerkin.orthopoly import gauss_rule, jacobi_eval_all, jacobi_norm_sq

BITS = 256
Q2 = MuntzGrid(2)


def close(a, b, tol_pow=16, bits=BITS):
    with working(bits):
        return abs(mpc(a) - mpc(b)) <= mpfr(2) ** (tol_pow - bits) * max(1, abs(mpc(b)))


def test_grid_basics():
    g = MuntzGrid(6)
    assert g.eta == gmpy2.mpq(1, 6)
    assert g.index_of("1/3") == 2
    with pytest.raises(GridMismatchError):
        g.index_of("1/4")
    assert g.join(MuntzGrid(4)).q == 12
    with pytest.raises(ValueError):
        MuntzGrid(0)


def test_muntz_jacobi_examples():
    assert muntz_jacobi_eval(Q2, 0, "0.3", BITS) == 1
    with working(BITS):
        assert muntz_jacobi_eval(Q2, 1, mpfr(1) / 4, BITS) == mpfr(-1) / 2
    assert muntz_jacobi_eval(Q2, 1, 1, BITS) == 1
    with pytest.raises(ValueError):
        muntz_jacobi_eval(Q2, 1, 2, BITS)


def test_conversion_table_examples():
    assert conversion_table(Q2, 1, BITS).entries == ((1,), (-2, 3))
    assert conversion_table(MuntzGrid(3), 1, BITS).entries == ((1,), (-3, 4))
    assert conversion_table(MuntzGrid(5), 0, BITS).entries == ((1,),)


def test_to_from_monomial_examples():
    with working(BITS):
        rp = 1 / gmpy2.sqrt(gmpy2.const_pi())
        two_rp = 2 * rp
        c = BasisVector.from_coeffs(Q2, [4 * rp / 3, 2 * rp / 3], BITS)
    s = to_monomial(c)
    assert s.truncation_order == 1
    assert abs(s.coeffs[0]) < mpfr(2) ** (8 - BITS)
    assert close(s.coeffs[1], two_rp)
    back = from_monomial(s)
    assert all(close(a, b) for a, b in zip(back.jacobi_coeffs, c.jacobi_coeffs))

    assert to_monomial(BasisVector.from_coeffs(Q2, [0, 1], BITS)).coeffs == (-2, 3)
    assert from_monomial(MuntzSeries.from_coeffs(Q2, [-2, 3], BITS)).jacobi_coeffs == (0, 1)
    one = from_monomial(MuntzSeries.constant(Q2, 1, 0, BITS), 1)
    assert one.jacobi_coeffs == (1, 0)
    assert to_monomial(BasisVector.from_coeffs(Q2, [1, 0, 0], BITS)).coeffs == (1, 0, 0)
    with pytest.raises(ValueError):
        from_monomial(MuntzSeries.from_coeffs(Q2, [1, 2, 3], BITS), 1)


@given(st.sampled_from([2, 3, 5]), st.integers(0, 24), st.integers(0, 2 ** 32))
def test_round_trip(q, N, seed):
    rng = random.Random(seed)
    grid = MuntzGrid(q)
    with working(BITS):
        c = BasisVector.from_coeffs(grid, [mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(N + 1)], BITS)
    back = from_monomial(to_monomial(c))
    assert back.N == N
    scale = max(abs(x) for x in c.jacobi_coeffs)
    with working(BITS):
        for a, b in zip(back.jacobi_coeffs, c.jacobi_coeffs):
            assert abs(a - b) <= mpfr(2) ** (16 + 2 * N - BITS) * scale


def test_basis_eval_matches_monomial_form():
    rng = random.Random(3)
    grid = MuntzGrid(3)
    c = BasisVector.from_coeffs(grid, [rng.uniform(-1, 1) for _ in range(12)], BITS)
    s = to_monomial(c)
    for u in ("0", "0.01", "0.5", "1"):
        assert close(basis_eval(c, u, BITS), s.evaluate(u), 40)


# series arithmetic

def test_series_eval_at_zero_and_ops():
    a = MuntzSeries.from_coeffs(Q2, [3, 1, 2], BITS)
    b = MuntzSeries.from_coeffs(Q2, [1, -1], BITS)
    assert a.evaluate(0) == 3
    p = a * b
    assert p.truncation_order == 1
    assert p.coeffs == (3, -2)
    assert (a - a).is_zero()
    assert a.shift(2).coeffs == (0, 0, 3, 1, 2)
    assert a.regrid(MuntzGrid(4)).coeffs == (3, 0, 1, 0, 2)
    with pytest.raises(GridMismatchError):
        a + MuntzSeries.from_coeffs(MuntzGrid(3), [1], BITS)
    with pytest.raises(ValueError):
        a.truncate(5)
    with working(BITS):
        assert close(a.evaluate("0.25"), 3 + mpfr("0.5") + 2 * mpfr("0.25"))
        r = a.rescale(4)
        assert close(r.evaluate("0.25"), a.evaluate(1))


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=8),
       st.lists(st.integers(-5, 5), min_size=1, max_size=8),
       st.fractions(0, 1, max_denominator=100))
def test_product_evaluates_as_product(xs, ys, t):
    a = MuntzSeries.from_coeffs(MuntzGrid(3), xs, BITS)
    b = MuntzSeries.from_coeffs(MuntzGrid(3), ys, BITS)
    k = min(len(xs), len(ys)) - 1
    full_a = MuntzSeries.from_coeffs(MuntzGrid(3), xs + [0] * len(ys), BITS)
    full_b = MuntzSeries.from_coeffs(MuntzGrid(3), ys + [0] * len(xs), BITS)
    prod = (full_a * full_b)
    assert (a * b).coeffs == prod.coeffs[: k + 1]
    with working(BITS):
        tv = mpfr(gmpy2.mpq(t.numerator, t.denominator))
        assert close(prod.evaluate(tv), a.evaluate(tv) * b.evaluate(tv), 24)


# orthogonality and projection

@pytest.mark.parametrize("q", [2, 3, 4, 6])
def test_muntz_orthogonality(q):
    grid = MuntzGrid(q)
    N = 30
    # u = s^q: du = q s^(q-1) ds, so the (0, q-1) Gauss rule integrates in u
    rule = gauss_rule(grid.params, N + 1, BITS)
    vals = [jacobi_eval_all(grid.params, N, s, BITS) for s in rule.nodes]
    with working(BITS):
        zhat = [jacobi_norm_sq(grid.params, i, BITS) * q for i in range(N + 1)]
        zmax = max(zhat)
        tol = mpfr(2) ** (16 - BITS) * zmax
        for i in range(N + 1):
            for j in range(i, N + 1):
                g = q * sum(w * v[i] * v[j] for w, v in zip(rule.weights, vals))
                assert abs(g - (zhat[i] if i == j else 0)) <= tol, (i, j)


def test_projection_examples():
    c = project(Q2, 6, lambda u: mpc(1), BITS)
    assert close(c.jacobi_coeffs[0], 1)
    assert all(abs(x) < mpfr(2) ** (16 - BITS) for x in c.jacobi_coeffs[1:])
    c = project(Q2, 4, lambda u: mpc(gmpy2.sqrt(u)), BITS)
    with working(BITS):
        assert close(c.jacobi_coeffs[0], mpfr(2) / 3)
        assert close(c.jacobi_coeffs[1], mpfr(1) / 3)
    assert all(abs(x) < mpfr(2) ** (16 - BITS) for x in c.jacobi_coeffs[2:])
    c = project(Q2, 8, lambda u: mpc(muntz_jacobi_eval(Q2, 5, u, BITS)), BITS)
    for i, x in enumerate(c.jacobi_coeffs):
        assert close(x, 1 if i == 5 else 0)


@pytest.mark.parametrize("q", [2, 3])
def test_projection_idempotent(q):
    grid = MuntzGrid(q)
    rng = random.Random(q)
    N = 12
    c = BasisVector.from_coeffs(grid, [mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(N + 1)], BITS)
    d = project(grid, N, lambda u: basis_eval(c, u, BITS), BITS)
    for a, b in zip(c.jacobi_coeffs, d.jacobi_coeffs):
        assert close(a, b)
    # a wider projection of a span element only adds zeros
    e = project(grid, N + 5, lambda u: basis_eval(c, u, BITS), BITS)
    assert all(abs(x) < mpfr(2) ** (16 - BITS) for x in e.jacobi_coeffs[N + 1:])


def _proj_error(q, N):
    grid = MuntzGrid(q)

    def f(u):
        s = gmpy2.root(u, q)
        return mpc(s * gmpy2.exp(s))

    c = project(grid, N, f, BITS)
    rule = gauss_rule(grid.params, 3 * N + 20, BITS)
    with working(BITS):
        acc = mpfr(0)
        for s, w in zip(rule.nodes, rule.weights):
            u = s ** q
            acc += q * w * gmpy2.norm(f(u) - basis_eval(c, u, BITS))
        return gmpy2.sqrt(acc)


@pytest.mark.parametrize("q", [2, 3])
def test_best_approximation_decay(q):
    errs = [_proj_error(q, N) for N in (4, 8, 16, 32)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    assert all(e > 0 for e in errs)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert errs[-1] < mpfr(10) ** -30
