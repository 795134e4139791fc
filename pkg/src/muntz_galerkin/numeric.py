"""Configurable-precision arithmetic and special functions.

Real and complex scalars are MPFR/MPC values from :mod:`gmpy2`. Every
public function takes the working precision explicitly (a :class:`Precision`
or a plain bit count) and evaluates inside a local gmpy2 context, so no
ambient precision leaks between callers.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr, mpq

__all__ = [
    "ConvergenceError",
    "DomainError",
    "NumericError",
    "NumericOverflow",
    "Precision",
    "PrecisionError",
    "bessel_j",
    "bits_of",
    "gamma",
    "gamma_ratio",
    "loggamma",
    "matrix_mittag_leffler",
    "mittag_leffler",
    "to_complex",
    "to_real",
    "working",
]


class NumericError(ArithmeticError):
    """Base class for numeric-kernel failures."""


class DomainError(NumericError, ValueError):
    pass


class NumericOverflow(NumericError):
    pass


class PrecisionError(NumericError):
    """Raised when a computation detects it has lost all significant bits."""


class ConvergenceError(NumericError):
    pass


@dataclass(frozen=True)
class Precision:
    """Binary precision (significand bits) of a computation."""

    bits: int

    def __post_init__(self) -> None:
        if int(self.bits) != self.bits or self.bits < 64:
            raise ValueError(f"precision must be an integer >= 64 bits, got {self.bits}")

    @classmethod
    def for_degree(cls, N: int) -> Precision:
        # Conversion-table entries grow like 4**N; keep ~2N bits of headroom.
        return cls(max(128, -(-22 * N // 10) + 64))

    def __int__(self) -> int:
        return self.bits


PrecisionLike = Union[Precision, int]
RealLike = Union[int, float, str, Fraction, "mpfr", "mpq"]


def bits_of(prec: PrecisionLike) -> int:
    bits = prec.bits if isinstance(prec, Precision) else int(prec)
    if bits < 64:
        raise ValueError(f"precision must be >= 64 bits, got {bits}")
    return bits


def working(prec: PrecisionLike, extra: int = 0):
    """Local gmpy2 context at ``prec`` (+ ``extra`` guard bits).

    Overflow and NaN production are trapped so that failures surface as
    exceptions instead of infinities.
    """
    return gmpy2.context(
        precision=bits_of(prec) + extra,
        trap_overflow=True,
        trap_invalid=True,
        trap_divzero=True,
    )


def _check(x):
    if isinstance(x, mpc):
        ok = gmpy2.is_finite(x.real) and gmpy2.is_finite(x.imag)
    else:
        ok = gmpy2.is_finite(x)
    if not ok:
        raise NumericOverflow(f"non-finite result {x}")
    return x


def to_real(x: RealLike) -> mpfr:
    """Convert ``x`` to an mpfr at the *current* context precision.

    Decimal strings and fractions are rounded once, directly to the target
    precision.
    """
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator))
    if isinstance(x, mpc):
        if x.imag != 0:
            raise DomainError(f"expected a real value, got {x}")
        return mpfr(x.real)
    return mpfr(x)


def to_complex(x) -> mpc:
    """Convert ``x`` to an mpc at the current context precision."""
    if isinstance(x, mpc):
        return mpc(x)
    if isinstance(x, complex):
        return mpc(x)
    if isinstance(x, tuple):
        return mpc(to_real(x[0]), to_real(x[1]))
    return mpc(to_real(x), 0)


# {{{ gamma


def _spouge_a(bits: int) -> int:
    return math.ceil(0.38 * bits) + 2


@lru_cache(maxsize=32)
def _spouge_coeffs(bits: int) -> tuple[int, int, tuple]:
    """Spouge coefficients ``c_0..c_{a-1}`` computed with enough guard bits.

    The coefficients alternate in sign and are much larger than Γ itself
    near small arguments; the guard covers their magnitude.
    """
    a = _spouge_a(bits)
    logmax = max(
        (k - 0.5) * math.log(a - k) + (a - k) - math.lgamma(k) for k in range(1, a)
    )
    guard = max(0, math.ceil(logmax / math.log(2))) + 24
    with gmpy2.context(precision=bits + guard):
        cs = [gmpy2.sqrt(2 * gmpy2.const_pi())]
        fact = mpfr(1)
        for k in range(1, a):
            if k > 1:
                fact *= k - 1
            ck = (mpfr(a - k) ** (mpfr(k) - mpfr(0.5))) * gmpy2.exp(mpfr(a - k)) / fact
            cs.append(ck if k % 2 == 1 else -ck)
    return a, guard, tuple(cs)


def _spouge_parts(x, bits: int):
    """Return ``(log_prefactor, series)`` with Γ(x) = exp(log_prefactor) * series."""
    a, guard, cs = _spouge_coeffs(bits)
    z = x - 1
    s = cs[0]
    for k in range(1, a):
        s += cs[k] / (z + k)
    logpre = (z + mpfr(0.5)) * gmpy2.log(z + a) - (z + a)
    return logpre, s


def _as_positive_real(x, name: str = "x"):
    v = to_real(x)
    if not v > 0:
        raise DomainError(f"{name} must be > 0, got {v}")
    return v


def gamma(x: RealLike, prec: PrecisionLike) -> mpfr:
    """Γ(x) for real ``x > 0``.

    Spouge's approximation with ``a = ceil(0.38*bits) + 2`` terms; positive
    integers are returned exactly (up to the final rounding).
    """
    bits = bits_of(prec)
    if isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1 and int(x) >= 1:
        with working(bits):
            return _check(mpfr(gmpy2.fac(int(x) - 1)))
    a, guard, _ = _spouge_coeffs(bits)
    with working(bits, guard + 16):
        v = _as_positive_real(x)
        shift = mpfr(1)
        while v < 1:
            shift *= v
            v += 1
        logpre, s = _spouge_parts(v, bits)
        r = gmpy2.exp(logpre) * s / shift
        _check(r)
    with working(bits):
        return _check(+r)


def loggamma(x: RealLike, prec: PrecisionLike) -> mpfr:
    """log Γ(x) for real ``x > 0``."""
    bits = bits_of(prec)
    a, guard, _ = _spouge_coeffs(bits)
    with working(bits, guard + 16):
        v = _as_positive_real(x)
        shift = mpfr(1)
        while v < 1:
            shift *= v
            v += 1
        logpre, s = _spouge_parts(v, bits)
        r = logpre + gmpy2.log(s) - gmpy2.log(shift)
    with working(bits):
        return _check(+r)


_RATIO_DIRECT_MAX = 60


def gamma_ratio(a: RealLike, b: RealLike, prec: PrecisionLike) -> mpfr:
    """Γ(a)/Γ(b) for ``a, b > 0`` without intermediate overflow.

    Large arguments go through a log-Gamma difference evaluated with extra
    bits to absorb the loss from exponentiating a large logarithm.
    """
    bits = bits_of(prec)
    with working(bits, 8):
        av, bv = _as_positive_real(a, "a"), _as_positive_real(b, "b")
        if av == bv:
            return mpfr(1)
    if av <= _RATIO_DIRECT_MAX and bv <= _RATIO_DIRECT_MAX:
        ga = gamma(a, bits + 16)
        gb = gamma(b, bits + 16)
        with working(bits):
            return _check(ga / gb)
    mag = max(float(av), float(bv))
    extra = math.ceil(math.log2(mag * max(1.0, math.log(mag)) + 2)) + 16
    la = loggamma(a, bits + extra)
    lb = loggamma(b, bits + extra)
    with working(bits, extra):
        r = gmpy2.exp(la - lb)
        _check(r)
    with working(bits):
        return +r


# }}}


# {{{ bessel


def bessel_j(c: int, z, prec: PrecisionLike) -> mpc:
    """Bessel function of the first kind J_c(z) for integer ``c >= 0``.

    Power series summed at ``bits + 32`` guard bits plus the bits lost to
    cancellation between terms of size up to ``e^|z|``.
    """
    if int(c) != c or c < 0:
        raise DomainError(f"order must be a non-negative integer, got {c}")
    c = int(c)
    bits = bits_of(prec)
    with working(bits):
        zz = to_complex(z)
        az = float(abs(zz))
    if az > 1e3:
        raise DomainError(f"|z| must be <= 1e3, got {az}")
    guard = 32 + math.ceil(az * math.log2(math.e))
    with working(bits, guard):
        zz = to_complex(z)
        half = zz / 2
        w = -(half * half)
        term = half**c / gmpy2.fac(c) if c else mpc(1)
        total = term
        m = 0
        tol = mpfr(2) ** (-(bits + 16))
        while True:
            m += 1
            term = term * w / (m * (m + c))
            total += term
            if m > az / 2 and abs(term) <= tol * abs(total):
                break
            if term == 0:
                break
    with working(bits):
        return _check(+total)


# }}}


# {{{ mittag-leffler


def _ml_peak_log2(alpha: float, r: float) -> tuple[float, int]:
    """log2 of the largest series term |z|^k/Γ(αk+1) and the index of the peak."""
    if r == 0:
        return 0.0, 0
    lr = math.log(r)
    best, kbest = 0.0, 0
    k = 0
    while True:
        v = k * lr - math.lgamma(alpha * k + 1)
        if v > best:
            best, kbest = v, k
        if k > kbest + 10 and v < best - 50:
            break
        k += 1
    return best / math.log(2), kbest


def _ml_guard(alpha: float, r: float) -> tuple[int, int]:
    peak, kpeak = _ml_peak_log2(alpha, r)
    return math.ceil(3.5 * r) + max(0, math.ceil(peak)) + 16, kpeak


def _ml_gammas(alpha: Fraction, count: int):
    """Γ(αk+1), k = 0..count-1, at the current context precision."""
    p, m = alpha.numerator, alpha.denominator
    bits = gmpy2.get_context().precision
    out = []
    for k in range(count):
        if k < m:
            out.append(gamma(alpha * k + 1, bits))
        else:
            base = alpha * (k - m)
            g = out[k - m]
            for i in range(1, p + 1):
                g = g * to_real(base + i)
            out.append(g)
    return out


def _check_alpha(alpha) -> Fraction:
    a = Fraction(alpha)
    if a <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if a.denominator > 12:
        raise DomainError(f"alpha denominator must be <= 12, got {alpha}")
    return a


def mittag_leffler(alpha, z, prec: PrecisionLike, max_terms: int = 200_000) -> mpc:
    """One-parameter Mittag-Leffler function E_α(z) by its global series.

    The sum runs at ``bits + ceil(3.5|z|)`` plus the bits needed to cover
    the largest term, so cancellation for negative or oscillatory arguments
    does not eat the result.
    """
    a = _check_alpha(alpha)
    bits = bits_of(prec)
    with working(bits):
        zz = to_complex(z)
        r = float(abs(zz))
    if r > 1e3:
        raise DomainError(f"|z| must be <= 1e3, got {r}")
    guard, kpeak = _ml_guard(float(a), r)
    wp = bits + guard
    with working(wp):
        zz = to_complex(z)
        tol = mpfr(2) ** (-wp)
        p, m = a.numerator, a.denominator
        g = _ml_gammas(a, m)
        total = mpc(0)
        zk = mpc(1)
        k = 0
        biggest = mpfr(0)
        while True:
            if k >= max_terms:
                raise ConvergenceError(f"series did not converge within {max_terms} terms")
            if k >= len(g):
                base = a * (k - m)
                nxt = g[k - m]
                for i in range(1, p + 1):
                    nxt = nxt * to_real(base + i)
                g.append(nxt)
            term = zk / g[k]
            total += term
            at = abs(term)
            if at > biggest:
                biggest = at
            if k > kpeak and at <= tol * abs(total):
                break
            if zk == 0:
                break
            zk *= zz
            k += 1
        _check(total)
        if total == 0 or (biggest > 0 and gmpy2.log2(biggest / abs(total)) > guard + bits - 8):
            raise PrecisionError("Mittag-Leffler series lost all significant digits")
    with working(bits):
        return +total


def _mat_mul(A, B):
    inner = len(B)
    out = []
    for row in A:
        new = []
        for j in range(len(B[0])):
            acc = row[0] * B[0][j]
            for k in range(1, inner):
                acc += row[k] * B[k][j]
            new.append(acc)
        out.append(tuple(new))
    return tuple(out)


def _max_norm(A):
    return max(sum((abs(x) for x in row), mpfr(0)) for row in A)


def matrix_mittag_leffler(alpha, M: Sequence[Sequence], prec: PrecisionLike,
                          max_terms: int = 200_000):
    """Matrix Mittag-Leffler function Σ_k M^k / Γ(αk+1) for ``dim <= 8``.

    Returns a tuple of row tuples. The guard-precision policy of
    :func:`mittag_leffler` is applied with |z| replaced by the max-row-sum
    norm of ``M``.
    """
    a = _check_alpha(alpha)
    bits = bits_of(prec)
    n = len(M)
    if n == 0 or n > 8 or any(len(row) != n for row in M):
        raise DomainError("matrix must be square with dimension <= 8")
    with working(bits):
        Mr = tuple(tuple(to_real(x) if not isinstance(x, (mpc, complex)) else to_complex(x) for x in row) for row in M)
        r = float(_max_norm(Mr))
    if r > 1e3:
        raise DomainError(f"matrix norm must be <= 1e3, got {r}")
    guard, kpeak = _ml_guard(float(a), r)
    wp = bits + guard
    with working(wp):
        Mw = tuple(tuple(+x for x in row) for row in Mr)
        tol = mpfr(2) ** (-wp)
        p, m = a.numerator, a.denominator
        g = _ml_gammas(a, m)
        power = tuple(tuple(mpfr(1) if i == j else mpfr(0) for j in range(n)) for i in range(n))
        total = [[mpfr(0)] * n for _ in range(n)]
        k = 0
        while True:
            if k >= max_terms:
                raise ConvergenceError(f"series did not converge within {max_terms} terms")
            if k >= len(g):
                base = a * (k - m)
                nxt = g[k - m]
                for i in range(1, p + 1):
                    nxt = nxt * to_real(base + i)
                g.append(nxt)
            for i in range(n):
                for j in range(n):
                    total[i][j] = total[i][j] + power[i][j] / g[k]
            tn = _max_norm(power) / g[k]
            if k > kpeak and tn <= tol * _max_norm(total):
                break
            if tn == 0 and k > 0:
                break
            power = _mat_mul(power, Mw)
            k += 1
    with working(bits):
        return tuple(tuple(_check(+x) for x in row) for row in total)


# }}}
