"""Müntz grids, truncated Müntz series and the Müntz-Jacobi basis.

A grid with denominator ``q`` carries the exponents ``mu/q``. The basis
functions are ``Jm_i(u) = J_i^{(0, q-1)}(u**(1/q))`` and are orthogonal on
[0, 1] with ``||Jm_i||^2 = q * zeta_i``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .numeric import PrecisionLike, bits_of, to_complex, to_real, working
from .orthopoly import (
    JacobiParams,
    MonomialCoeffTable,
    gauss_rule,
    jacobi_eval,
    jacobi_eval_all,
    jacobi_norm_sq,
    jacobi_series_eval,
    monomial_coeffs,
)

__all__ = [
    "BasisVector",
    "GridMismatchError",
    "MuntzGrid",
    "MuntzSeries",
    "basis_eval",
    "conversion_table",
    "from_monomial",
    "muntz_jacobi_eval",
    "project",
    "project_samples",
    "projection_nodes",
    "to_monomial",
]


class GridMismatchError(ValueError):
    """Two series on different grids were combined without regridding."""


@dataclass(frozen=True)
class MuntzGrid:
    q: int

    def __post_init__(self) -> None:
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"grid denominator must be a positive integer, got {self.q}")

    @property
    def eta(self) -> Fraction:
        return Fraction(1, self.q)

    @property
    def params(self) -> JacobiParams:
        return JacobiParams(0, self.q - 1)

    def exponent(self, mu: int) -> Fraction:
        return Fraction(mu, self.q)

    def index_of(self, exponent) -> int:
        """Grid index of a rational exponent; raises if it is off-grid."""
        e = Fraction(exponent) * self.q
        if e.denominator != 1:
            raise GridMismatchError(f"exponent {exponent} is not on the 1/{self.q} grid")
        return int(e)

    def join(self, other: MuntzGrid) -> MuntzGrid:
        return MuntzGrid(math.lcm(self.q, other.q))


# {{{ series


@dataclass(frozen=True)
class MuntzSeries:
    """``sum_{mu <= order} coeffs[mu] * t**(mu/q)``; terms above ``order`` are unknown."""

    grid: MuntzGrid
    coeffs: tuple
    bits: int

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("a series needs at least the constant coefficient")

    # construction

    @classmethod
    def from_coeffs(cls, grid: MuntzGrid, coeffs: Iterable, prec: PrecisionLike,
                    order: int | None = None) -> MuntzSeries:
        bits = bits_of(prec)
        with working(bits):
            cs = [to_complex(c) for c in coeffs]
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            cs = cs[: order + 1] + [mpc(0)] * (order + 1 - len(cs))
        return cls(grid, tuple(cs), bits)

    @classmethod
    def from_terms(cls, grid: MuntzGrid, terms: Mapping[int, object], order: int,
                   prec: PrecisionLike) -> MuntzSeries:
        cs = [0] * (order + 1)
        for mu, c in terms.items():
            if mu < 0:
                raise ValueError("negative exponent index")
            if mu <= order:
                cs[mu] = c
        return cls.from_coeffs(grid, cs, prec)

    @classmethod
    def constant(cls, grid: MuntzGrid, value, order: int, prec: PrecisionLike) -> MuntzSeries:
        return cls.from_terms(grid, {0: value}, order, prec)

    @classmethod
    def zero(cls, grid: MuntzGrid, order: int, prec: PrecisionLike) -> MuntzSeries:
        return cls.from_terms(grid, {}, order, prec)

    # accessors

    @property
    def truncation_order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, mu: int):
        return self.coeffs[mu]

    def nonzero(self) -> list[int]:
        return [mu for mu, c in enumerate(self.coeffs) if c != 0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def max_abs(self) -> mpfr:
        with working(self.bits):
            return max((abs(c) for c in self.coeffs), default=mpfr(0))

    # arithmetic

    def _same_grid(self, other: MuntzSeries) -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"series on grids 1/{self.grid.q} and 1/{other.grid.q}; regrid explicitly"
            )

    def __add__(self, other: MuntzSeries) -> MuntzSeries:
        self._same_grid(other)
        bits = max(self.bits, other.bits)
        n = min(len(self), len(other))
        with working(bits):
            cs = tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))
        return MuntzSeries(self.grid, cs, bits)

    def __neg__(self) -> MuntzSeries:
        with working(self.bits):
            return MuntzSeries(self.grid, tuple(-c for c in self.coeffs), self.bits)

    def __sub__(self, other: MuntzSeries) -> MuntzSeries:
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MuntzSeries):
            return self.scale(other)
        self._same_grid(other)
        bits = max(self.bits, other.bits)
        n = min(len(self), len(other))
        a_nz = [(i, c) for i, c in enumerate(self.coeffs[:n]) if c != 0]
        b_nz = [(i, c) for i, c in enumerate(other.coeffs[:n]) if c != 0]
        with working(bits):
            out = [mpc(0)] * n
            for i, a in a_nz:
                for k, b in b_nz:
                    if i + k >= n:
                        break
                    out[i + k] += a * b
        return MuntzSeries(self.grid, tuple(out), bits)

    __rmul__ = __mul__

    def scale(self, c) -> MuntzSeries:
        with working(self.bits):
            c = to_complex(c)
            return MuntzSeries(self.grid, tuple(c * x for x in self.coeffs), self.bits)

    def shift(self, k: int) -> MuntzSeries:
        """Multiply by ``t**(k/q)``; the known order grows by ``k``."""
        if k < 0:
            raise ValueError("shift must be >= 0")
        return MuntzSeries(self.grid, (mpc(0),) * k + self.coeffs, self.bits)

    def truncate(self, order: int) -> MuntzSeries:
        if order > self.truncation_order:
            raise ValueError(
                f"cannot extend a series known to order {self.truncation_order} to {order}"
            )
        return MuntzSeries(self.grid, self.coeffs[: order + 1], self.bits)

    def regrid(self, grid: MuntzGrid) -> MuntzSeries:
        """Re-express on a finer grid whose denominator is a multiple of ours."""
        if grid.q % self.grid.q:
            raise GridMismatchError(f"1/{grid.q} does not refine 1/{self.grid.q}")
        f = grid.q // self.grid.q
        n = self.truncation_order * f + 1
        cs = [mpc(0)] * n
        for mu, c in enumerate(self.coeffs):
            cs[mu * f] = c
        return MuntzSeries(grid, tuple(cs), self.bits)

    def rescale(self, T) -> MuntzSeries:
        """Substitute ``t = T u``: coefficient ``mu`` picks up ``T**(mu/q)``."""
        with working(self.bits, 16):
            step = to_real(T) ** to_real(self.grid.eta)
            cs, p = [], mpfr(1)
            for c in self.coeffs:
                cs.append(c * p)
                p *= step
        with working(self.bits):
            return MuntzSeries(self.grid, tuple(+c for c in cs), self.bits)

    def with_precision(self, prec: PrecisionLike) -> MuntzSeries:
        bits = bits_of(prec)
        with working(bits):
            return MuntzSeries(self.grid, tuple(+c for c in self.coeffs), bits)

    def evaluate(self, t, prec: PrecisionLike | None = None) -> mpc:
        """Horner evaluation in ``t**(1/q)``; ``t >= 0``."""
        bits = self.bits if prec is None else bits_of(prec)
        with working(bits, 8):
            t = to_real(t)
            if t < 0:
                raise ValueError("series are evaluated for t >= 0 only")
            x = t if self.grid.q == 1 else gmpy2.root(t, self.grid.q)
            acc = mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
        with working(bits):
            return +acc


# }}}


# {{{ Müntz-Jacobi basis


@dataclass(frozen=True)
class BasisVector:
    """Coefficients of ``sum_i c_i Jm_i`` on a Müntz grid."""

    grid: MuntzGrid
    jacobi_coeffs: tuple
    bits: int

    @property
    def N(self) -> int:
        return len(self.jacobi_coeffs) - 1

    @classmethod
    def from_coeffs(cls, grid: MuntzGrid, coeffs: Iterable, prec: PrecisionLike) -> BasisVector:
        bits = bits_of(prec)
        with working(bits):
            return cls(grid, tuple(to_complex(c) for c in coeffs), bits)

    def evaluate(self, u, prec: PrecisionLike | None = None) -> mpc:
        return basis_eval(self, u, self.bits if prec is None else prec)


def muntz_jacobi_eval(grid: MuntzGrid, i: int, u, prec: PrecisionLike) -> mpfr:
    """``J_i^{(0, q-1)}(u**(1/q))`` via the recurrence."""
    bits = bits_of(prec)
    with working(bits, 8):
        u = to_real(u)
        if u < 0 or u > 1:
            raise ValueError(f"u must lie in [0, 1], got {u}")
        s = u if grid.q == 1 else gmpy2.root(u, grid.q)
    return jacobi_eval(grid.params, i, s, bits)


def basis_eval(v: BasisVector, u, prec: PrecisionLike) -> mpc:
    bits = bits_of(prec)
    with working(bits, 8):
        u = to_real(u)
        if u < 0 or u > 1:
            raise ValueError(f"u must lie in [0, 1], got {u}")
        s = u if v.grid.q == 1 else gmpy2.root(u, v.grid.q)
    val = jacobi_series_eval(v.grid.params, v.jacobi_coeffs, s, bits)
    with working(bits):
        return +val


def conversion_table(grid: MuntzGrid, N: int, prec: PrecisionLike) -> MonomialCoeffTable:
    """Lower-triangular matrix whose row ``i`` gives ``Jm_i`` in powers of ``u**(1/q)``."""
    return monomial_coeffs(grid.params, N, bits_of(prec))


def to_monomial(v: BasisVector) -> MuntzSeries:
    """Row-vector product ``c @ table``."""
    N, bits = v.N, v.bits
    tab = conversion_table(v.grid, N, bits).entries
    c = v.jacobi_coeffs
    with working(bits, 16):
        out = [mpc(0)] * (N + 1)
        for i in range(N + 1):
            ci = c[i]
            if ci == 0:
                continue
            row = tab[i]
            for j in range(i + 1):
                out[j] += ci * row[j]
    with working(bits):
        return MuntzSeries(v.grid, tuple(+x for x in out), bits)


def from_monomial(s: MuntzSeries, N: int | None = None) -> BasisVector:
    """Solve ``c @ table = s`` for ``c``, working down from the top degree.

    A series known to a lower order than ``N`` is treated as a polynomial.
    """
    if N is None:
        N = s.truncation_order
    if s.truncation_order > N:
        raise ValueError(f"series of order {s.truncation_order} does not fit degree {N}; truncate first")
    bits = s.bits
    tab = conversion_table(s.grid, N, bits).entries
    rhs = list(s.coeffs) + [mpc(0)] * (N - s.truncation_order)
    c = [mpc(0)] * (N + 1)
    with working(bits, 16):
        for j in range(N, -1, -1):
            acc = mpc(rhs[j])
            for i in range(j + 1, N + 1):
                if c[i] != 0:
                    acc -= c[i] * tab[i][j]
            d = tab[j][j]
            if d == 0:
                raise ZeroDivisionError(f"singular diagonal in conversion table at {j}")
            c[j] = acc / d
    with working(bits):
        return BasisVector(s.grid, tuple(+x for x in c), bits)


# }}}


# {{{ projection


@lru_cache(maxsize=64)
def _projection_data(grid: MuntzGrid, N: int, bits: int, n_quad: int):
    rule = gauss_rule(grid.params, n_quad, bits)
    with working(bits, 8):
        u_nodes = tuple(s ** grid.q for s in rule.nodes)
    inv_norms = []
    for i in range(N + 1):
        z = jacobi_norm_sq(grid.params, i, bits + 8)
        with working(bits, 8):
            inv_norms.append(1 / z)
    return rule, u_nodes, tuple(inv_norms)


def projection_nodes(grid: MuntzGrid, N: int, prec: PrecisionLike, n_quad: int | None = None) -> tuple:
    """The ``u`` points at which :func:`project` samples its argument."""
    n_quad = 2 * (N + 1) if n_quad is None else n_quad
    return _projection_data(grid, N, bits_of(prec), n_quad)[1]


def project_samples(grid: MuntzGrid, N: int, samples: Sequence, prec: PrecisionLike,
                    n_quad: int | None = None) -> BasisVector:
    """Projection from values of ``f`` at :func:`projection_nodes`.

    ``c_i = (1/zeta_i) sum_k w_k f(s_k**q) J_i(s_k)`` using the Gauss-Jacobi
    rule for the weight ``s**(q-1)``.
    """
    bits = bits_of(prec)
    n_quad = 2 * (N + 1) if n_quad is None else n_quad
    rule, _, inv_norms = _projection_data(grid, N, bits, n_quad)
    if len(samples) != len(rule):
        raise ValueError(f"expected {len(rule)} samples, got {len(samples)}")
    acc = [mpc(0)] * (N + 1)
    for s, w, fv in zip(rule.nodes, rule.weights, samples):
        if fv == 0:
            continue
        Js = jacobi_eval_all(grid.params, N, s, bits + 8)
        with working(bits, 8):
            wf = w * to_complex(fv)
            for i in range(N + 1):
                acc[i] += wf * Js[i]
    with working(bits):
        return BasisVector(grid, tuple(+(a * z) for a, z in zip(acc, inv_norms)), bits)


def project(grid: MuntzGrid, N: int, f: Callable, prec: PrecisionLike,
            n_quad: int | None = None) -> BasisVector:
    """L2(0, 1) projection of ``f`` onto ``span{Jm_0, ..., Jm_N}``."""
    nodes = projection_nodes(grid, N, prec, n_quad)
    bits = bits_of(prec)
    with working(bits, 8):
        samples = [f(u) for u in nodes]
    return project_samples(grid, N, samples, prec, n_quad)


# }}}
