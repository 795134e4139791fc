import os

import gmpy2
import mpmath
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def to_mp(x):
    """gmpy2 value -> mpmath value without passing through a double."""
    if isinstance(x, gmpy2.mpc(0).__class__):
        return mpmath.mpc(to_mp(x.real), to_mp(x.imag))
    if isinstance(x, gmpy2.mpfr(0).__class__):
        if x == 0:
            return mpmath.mpf(0)
        man, exp = x.as_integer_ratio()
        return mpmath.mpf(man) / mpmath.mpf(exp)
    return mpmath.mpmathify(x)


def rel_err(a, b):
    a, b = to_mp(a), to_mp(b)
    scale = max(abs(b), mpmath.mpf(10) ** (-mpmath.mp.dps))
    return abs(a - b) / scale


@pytest.fixture
def mp300():
    with mpmath.workprec(300):
        yield


def random_small_problem(rng):
    """Random system with n <= 3, N <= 8, orders on a grid q <= 6 and
    degree-<=2 Muntz-polynomial couplings. Returns ``(spec, N)``."""
    from fractions import Fraction

    from muntz_galerkin.problem import ProblemSpec

    q = rng.choice([2, 3, 4, 5, 6])
    divisors = [d for d in range(2, q + 1) if q % d == 0]
    n = rng.randint(1, 3)
    orders = []
    while len(orders) < n:
        d = rng.choice(divisors)
        o = Fraction(rng.randint(1, 8 * d // q), d)
        if o.denominator > 1 and o * q <= 8:
            orders.append(o)
    N = rng.randint(max(int(o * q) for o in orders), 8)

    def coef():
        return f"({rng.uniform(-1, 1):.6f})"

    def poly():
        return " + ".join(f"{coef()}*t^({k}/{q})" for k in range(3))

    couplings = tuple(tuple(poly() for _ in range(n)) for _ in range(n))
    forcings = tuple(poly() for _ in range(n))
    init = tuple(tuple(f"{rng.uniform(-2, 2):.5f}" for _ in range(-(-o.numerator // o.denominator)))
                 for o in orders)
    T = rng.choice(["1", "1/2", "2", "3/2"])
    spec = ProblemSpec(tuple(str(o) for o in orders), couplings, init, T, forcings=forcings, q_override=q)
    return spec, N


def assert_rows_match(rec, dense, bits, p=24):
    """Entry-wise relative agreement ``2^(p - bits)``.

    Entries the recurrence produces as exact zeros are compared against the
    row's largest entry instead, since elimination leaves rounding noise there.
    """
    import gmpy2

    tol = gmpy2.mpfr(2) ** (p - bits)
    for a, b in zip(rec, dense):
        big = max(max(abs(x) for x in a), max(abs(y) for y in b))
        for x, y in zip(a, b):
            scale = max(abs(x), abs(y)) if x != 0 else big
            assert abs(x - y) <= tol * scale, (x, y)
