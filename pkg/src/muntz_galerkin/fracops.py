"""Riemann-Liouville integrals and Caputo derivatives of Müntz monomials.

``I^a t^b = Γ(b+1)/Γ(a+b+1) t^(a+b)`` and, for admissible ``b``,
``D^a t^b = Γ(b+1)/Γ(b-a+1) t^(b-a)``. Exponents are carried as exact
grid indices so that the shift ``theta*q`` and the Caputo annihilation test
stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpc, mpfr

from .muntz import GridMismatchError, MuntzGrid, MuntzSeries
from .numeric import PrecisionLike, bits_of, gamma_ratio, to_real, working

__all__ = [
    "BandedMatrix",
    "FracCoeffs",
    "InadmissibleExponentError",
    "RationalOrder",
    "caputo_derivative_series",
    "frac_integral_monomial",
    "frac_integral_series",
    "q_matrix",
    "vartheta_table",
]


class InadmissibleExponentError(ValueError):
    """A Caputo derivative was requested of a term it cannot act on."""


@dataclass(frozen=True)
class RationalOrder:
    """Caputo order ``gamma_num / q_denom`` in lowest terms, not an integer."""

    gamma_num: int
    q_denom: int

    def __post_init__(self) -> None:
        if self.gamma_num < 1 or self.q_denom < 2:
            raise ValueError(
                f"order {self.gamma_num}/{self.q_denom} must be a positive non-integer rational"
            )
        if math.gcd(self.gamma_num, self.q_denom) != 1:
            raise ValueError(f"order {self.gamma_num}/{self.q_denom} is not in lowest terms")

    @classmethod
    def of(cls, value) -> RationalOrder:
        if isinstance(value, RationalOrder):
            return value
        f = Fraction(value)
        if f.denominator == 1:
            raise ValueError(f"integer order {f} is not supported")
        return cls(f.numerator, f.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.gamma_num, self.q_denom)

    @property
    def ceil(self) -> int:
        return -(-self.gamma_num // self.q_denom)

    def shift(self, grid: MuntzGrid) -> int:
        """``theta * q`` for the grid; the grid must resolve this order."""
        if grid.q % self.q_denom:
            raise GridMismatchError(f"order {self.value} is off the 1/{grid.q} grid")
        return self.gamma_num * (grid.q // self.q_denom)

    def __str__(self) -> str:
        return f"{self.gamma_num}/{self.q_denom}"


def _order_value(theta) -> Fraction:
    if isinstance(theta, RationalOrder):
        return theta.value
    f = Fraction(theta)
    if f <= 0:
        raise ValueError("fractional order must be positive")
    return f


# {{{ Gamma-ratio tables


@lru_cache(maxsize=512)
def _vartheta(theta: Fraction, q: int, M: int, bits: int) -> tuple:
    # r(m) = Γ(m/q + 1)/Γ(m/q + θ + 1); r(m + q) = r(m) (m/q + 1)/(m/q + θ + 1)
    guard = 16 + max(0, (M // q).bit_length())
    out = [None] * (M + 1)
    for m in range(min(q, M + 1)):
        out[m] = gamma_ratio(Fraction(m, q) + 1, Fraction(m, q) + theta + 1, bits + guard)
    with working(bits, guard):
        for m in range(q, M + 1):
            x = Fraction(m - q, q)
            out[m] = out[m - q] * to_real(Fraction(x + 1) / (x + theta + 1))
    with working(bits):
        return tuple(+r for r in out)


def vartheta_table(theta, grid: MuntzGrid, M: int, prec: PrecisionLike) -> tuple:
    """``[Γ(mη+1)/Γ(mη+θ+1) for m in 0..M]`` with ``η = 1/q``."""
    if M < 0:
        return ()
    return _vartheta(_order_value(theta), grid.q, M, bits_of(prec))


@dataclass(frozen=True)
class FracCoeffs:
    """Gamma-ratio families for a set of orders on a common grid.

    ``xi(j, i, m)`` and ``vartheta(j, m)`` are ``Γ(kη+1)/Γ(kη+θ_j+1)`` with
    ``k = i + m`` and ``k = m``; ``xi_bar(j, mu)`` is
    ``Γ(mu/q - θ_j + 1)/Γ(mu/q + 1)``, the same ratio at ``k = mu - θ_j q``.
    """

    orders: tuple
    grid: MuntzGrid
    bits: int

    def _table(self, j: int, k: int) -> tuple:
        return vartheta_table(self.orders[j], self.grid, max(k, 63) | 63, self.bits)

    def vartheta(self, j: int, m: int) -> mpfr:
        return self._table(j, m)[m]

    def xi(self, j: int, i: int, m: int) -> mpfr:
        return self.vartheta(j, i + m)

    def xi_bar(self, j: int, mu: int) -> mpfr:
        k = mu - RationalOrder.of(self.orders[j]).shift(self.grid)
        if k < 0:
            raise ValueError(f"xi_bar needs mu >= theta*q, got mu={mu}")
        return self.vartheta(j, k)

    xi_bar_1 = xi_bar
    xi_bar_2 = xi_bar


# }}}


def frac_integral_monomial(theta, beta, prec: PrecisionLike) -> tuple[mpfr, Fraction]:
    """``I^theta t^beta = coeff * t^new_exponent``."""
    a = _order_value(theta)
    b = Fraction(beta)
    if b < 0:
        raise ValueError("exponent must be >= 0")
    return gamma_ratio(b + 1, a + b + 1, prec), a + b


def frac_integral_series(theta, s: MuntzSeries, cap: int | None = None) -> MuntzSeries:
    """Termwise ``I^theta``; the known order grows by ``theta*q`` (then capped)."""
    a = _order_value(theta)
    k = a * s.grid.q
    if k.denominator != 1:
        raise GridMismatchError(f"order {a} is off the 1/{s.grid.q} grid")
    k = int(k)
    order = s.truncation_order + k
    if cap is not None:
        order = min(order, cap)
    ratios = vartheta_table(a, s.grid, max(order - k, -1), s.bits)
    out = [mpc(0)] * (order + 1)
    with working(s.bits):
        for mu in range(max(order - k + 1, 0)):
            c = s.coeffs[mu]
            if c != 0:
                out[mu + k] = c * ratios[mu]
    return MuntzSeries(s.grid, tuple(out), s.bits)


def caputo_derivative_series(theta, s: MuntzSeries) -> MuntzSeries:
    """Termwise Caputo derivative of order ``theta``.

    Integer powers below ``ceil(theta)`` are annihilated. Any other term
    must have exponent ``mu/q >= theta``; anything in between raises.
    """
    a = _order_value(theta)
    q = s.grid.q
    k = a * q
    if k.denominator != 1:
        raise GridMismatchError(f"order {a} is off the 1/{q} grid")
    k = int(k)
    ceil = math.ceil(a)
    order = s.truncation_order - k
    if order < 0:
        raise ValueError(f"series of order {s.truncation_order} is too short for D^{a}")
    out = [mpc(0)] * (order + 1)
    ratios = vartheta_table(a, s.grid, order, s.bits)
    with working(s.bits):
        for mu, c in enumerate(s.coeffs):
            if c == 0:
                continue
            if mu % q == 0 and mu // q < ceil:
                continue
            if mu < k:
                raise InadmissibleExponentError(
                    f"D^{a} of t^{Fraction(mu, q)} leaves the Müntz space"
                )
            # Γ(ν+1)/Γ(ν-θ+1) = 1/r(mu - k)
            out[mu - k] = c / ratios[mu - k]
    return MuntzSeries(s.grid, tuple(out), s.bits)


# {{{ Q matrix


@dataclass(frozen=True)
class BandedMatrix:
    """Square matrix with a single nonzero diagonal ``(m, m + offset)``."""

    size: int
    offset: int
    values: tuple

    def to_dense(self) -> list:
        rows = [[mpfr(0)] * self.size for _ in range(self.size)]
        for m, v in enumerate(self.values):
            rows[m][m + self.offset] = v
        return rows

    def apply_row(self, c, prec: PrecisionLike) -> list:
        """Row-vector product ``c @ Q``."""
        out = [mpc(0)] * self.size
        with working(prec):
            for m, v in enumerate(self.values):
                if c[m] != 0:
                    out[m + self.offset] = c[m] * v
        return out


def q_matrix(theta, grid: MuntzGrid, N: int, prec: PrecisionLike) -> BandedMatrix:
    """``(Q)_{m, m+theta*q} = Γ(mη+1)/Γ(mη+θ+1)`` truncated to ``(N+1) x (N+1)``."""
    k = _order_value(theta) * grid.q
    if k.denominator != 1:
        raise GridMismatchError(f"order {theta} is off the 1/{grid.q} grid")
    k = int(k)
    count = max(N + 1 - k, 0)
    vals = vartheta_table(theta, grid, count - 1, prec)
    return BandedMatrix(N + 1, k, tuple(vals[:count]))


# }}}
