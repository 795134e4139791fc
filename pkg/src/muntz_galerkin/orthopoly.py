"""Shifted Jacobi polynomials on [0, 1] and Gauss-Jacobi quadrature.

The shifted polynomial of degree ``i`` is ``J_i(s) = P_i^{(alpha, beta)}(2s - 1)``,
orthogonal on [0, 1] against ``w(s) = s**beta * (1 - s)**alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy.special import roots_jacobi

from .numeric import ConvergenceError, PrecisionLike, bits_of, gamma_ratio, to_real, working

__all__ = [
    "JacobiParams",
    "MonomialCoeffTable",
    "QuadratureRule",
    "gauss_rule",
    "jacobi_eval",
    "jacobi_eval_all",
    "jacobi_norm_sq",
    "jacobi_series_eval",
    "monomial_coeffs",
]


@dataclass(frozen=True)
class JacobiParams:
    alpha: Fraction
    beta: Fraction

    def __init__(self, alpha=0, beta=0) -> None:
        a, b = Fraction(alpha), Fraction(beta)
        if a <= -1 or b <= -1:
            raise ValueError(f"Jacobi parameters must be > -1, got ({a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def is_integer(self) -> bool:
        return self.alpha.denominator == 1 and self.beta.denominator == 1

    def weight(self, s, prec: PrecisionLike) -> mpfr:
        """``s**beta * (1 - s)**alpha`` on [0, 1]."""
        with working(prec):
            s = to_real(s)
            return s ** to_real(self.beta) * (1 - s) ** to_real(self.alpha)


# {{{ recurrence


@lru_cache(maxsize=256)
def _recurrence(params: JacobiParams, n: int, bits: int):
    """Coefficients of ``J_k = (A_k s + B_k) J_{k-1} - C_k J_{k-2}`` for k = 2..n.

    Written directly in the shifted variable so that nodes near s = 0 do not
    lose relative accuracy through ``1 + x``.
    """
    a, b = params.alpha, params.beta
    out = []
    with working(bits, 16):
        for k in range(2, n + 1):
            c = 2 * k + a + b
            den = 2 * k * (k + a + b) * (c - 2)
            ax = (c - 1) * c * (c - 2)
            bx = (c - 1) * (a * a - b * b)
            cc = 2 * (k + a - 1) * (k + b - 1) * c
            # x = 2s - 1
            A = Fraction(2 * ax) / den
            B = Fraction(bx - ax) / den
            C = Fraction(cc) / den
            out.append((to_real(A), to_real(B), to_real(C)))
    return tuple(out)


def _first(params: JacobiParams):
    # J_1(s) = (alpha + 1) + (alpha + beta + 2)(s - 1)
    a, b = params.alpha, params.beta
    return to_real(a + b + 2), to_real(a + 1 - (a + b + 2))


def jacobi_eval_all(params: JacobiParams, N: int, s, prec: PrecisionLike) -> list:
    """Values ``[J_0(s), ..., J_N(s)]`` by the three-term recurrence."""
    bits = bits_of(prec)
    rec = _recurrence(params, N, bits) if N >= 2 else ()
    with working(bits):
        s = to_real(s)
        out = [mpfr(1)]
        if N >= 1:
            c1, c0 = _first(params)
            out.append(c1 * s + c0)
        for k in range(2, N + 1):
            A, B, C = rec[k - 2]
            out.append((A * s + B) * out[-1] - C * out[-2])
        return out


def jacobi_eval(params: JacobiParams, i: int, s, prec: PrecisionLike) -> mpfr:
    """Shifted Jacobi polynomial of degree ``i`` at ``s`` in [0, 1]."""
    if i < 0:
        raise ValueError("degree must be >= 0")
    with working(prec):
        sv = to_real(s)
        if sv < 0 or sv > 1:
            raise ValueError(f"s must lie in [0, 1], got {sv}")
    return jacobi_eval_all(params, i, s, prec)[i]


def jacobi_series_eval(params: JacobiParams, coeffs, s, prec: PrecisionLike):
    """``sum_i coeffs[i] * J_i(s)`` with the polynomials generated on the fly."""
    bits = bits_of(prec)
    N = len(coeffs) - 1
    if N < 0:
        return gmpy2.mpc(0)
    rec = _recurrence(params, N, bits) if N >= 2 else ()
    with working(bits):
        s = to_real(s)
        p0 = mpfr(1)
        acc = coeffs[0] * p0
        if N >= 1:
            c1, c0 = _first(params)
            p1 = c1 * s + c0
            acc += coeffs[1] * p1
            for k in range(2, N + 1):
                A, B, C = rec[k - 2]
                p0, p1 = p1, (A * s + B) * p1 - C * p0
                acc += coeffs[k] * p1
        return acc


# }}}


def jacobi_norm_sq(params: JacobiParams, i: int, prec: PrecisionLike) -> mpfr:
    """Squared weighted norm of ``J_i`` on [0, 1].

    ``Γ(i+α+1)Γ(i+β+1) / ((2i+α+β+1) i! Γ(i+α+β+1))``.
    """
    a, b = params.alpha, params.beta
    bits = bits_of(prec)
    if params.is_integer:
        num = math.factorial(int(i + a)) * math.factorial(int(i + b))
        if i == 0:
            val = Fraction(num, math.factorial(int(a + b + 1)))
        else:
            val = Fraction(num, int(2 * i + a + b + 1) * math.factorial(i) * math.factorial(int(i + a + b)))
        with working(bits):
            return to_real(val)
    if i == 0:
        # (α+β+1)Γ(α+β+1) = Γ(α+β+2) keeps the α+β = -1 edge finite
        r1 = gamma_ratio(a + 1, a + b + 2, bits + 8)
        r2 = gamma_ratio(b + 1, 1, bits + 8)
        with working(bits):
            return r1 * r2
    r1 = gamma_ratio(i + a + 1, i + a + b + 1, bits + 8)
    r2 = gamma_ratio(i + b + 1, i + 1, bits + 8)
    with working(bits):
        return r1 * r2 / to_real(2 * i + a + b + 1)


# {{{ monomial coefficients


@dataclass(frozen=True)
class MonomialCoeffTable:
    """Row ``i`` holds the coefficients of ``J_i(s) = sum_j entries[i][j] s**j``."""

    params: JacobiParams
    order: int
    entries: tuple

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def eval_row(self, i: int, s, prec: PrecisionLike):
        with working(prec):
            s = to_real(s)
            acc = mpfr(0)
            for c in reversed(self.entries[i]):
                acc = acc * s + c
            return acc


@lru_cache(maxsize=64)
def _exact_rows(params: JacobiParams, N: int) -> tuple:
    """Exact rational coefficients for integer parameters.

    Uses the ratio ``Υ_{j+1}/Υ_j = -(i-j)(i+α+β+j+1)/((β+j+1)(j+1))``, which
    keeps every entry an exact integer when α = 0.
    """
    a, b = int(params.alpha), int(params.beta)
    rows = []
    for i in range(N + 1):
        first = Fraction((-1) ** i * math.comb(i + b, i))
        row = [first]
        for j in range(i):
            row.append(row[-1] * Fraction(-(i - j) * (i + a + b + j + 1), (b + j + 1) * (j + 1)))
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=64)
def monomial_coeffs(params: JacobiParams, N: int, prec: PrecisionLike) -> MonomialCoeffTable:
    """Monomial coefficients Υ_j^{(α,β,i)} of the shifted Jacobi polynomials.

    ``Υ_j = (-1)^{i-j} Γ(i+β+1) Γ(i+α+β+j+1) / (Γ(β+j+1) j! Γ(i+α+β+1) (i-j)!)``
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    bits = bits_of(prec)
    a, b = params.alpha, params.beta
    if params.is_integer:
        exact = _exact_rows(params, N)
        with working(bits):
            entries = tuple(tuple(to_real(x) for x in row) for row in exact)
        return MonomialCoeffTable(params, N, entries)
    rows = []
    for i in range(N + 1):
        # Υ_0 = (-1)^i Γ(i+β+1) / (Γ(β+1) i!)
        first = gamma_ratio(i + b + 1, b + 1, bits + 16)
        with working(bits, 16):
            first = first / gmpy2.fac(i)
            if i % 2:
                first = -first
            row = [first]
            for j in range(i):
                ratio = to_real(Fraction(-(i - j)) * (i + a + b + j + 1) / ((b + j + 1) * (j + 1)))
                row.append(row[-1] * ratio)
        with working(bits):
            rows.append(tuple(+x for x in row))
    return MonomialCoeffTable(params, N, tuple(rows))


# }}}


# {{{ quadrature


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: tuple
    domain: str
    weight_params: JacobiParams

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f, prec: PrecisionLike):
        """``sum_k w_k f(x_k)``; ``f`` receives the node as an mpfr."""
        with working(prec):
            acc = 0
            for x, w in zip(self.nodes, self.weights):
                acc += w * f(x)
            return acc


def _pn_and_prev(params: JacobiParams, n: int, s, rec):
    c1, c0 = _first(params)
    p0, p1 = mpfr(1), c1 * s + c0
    for k in range(2, n + 1):
        A, B, C = rec[k - 2]
        p0, p1 = p1, (A * s + B) * p1 - C * p0
    return p1, p0


def _dpn_ds(params: JacobiParams, n: int, s, pn, pnm1):
    # (2n+α+β)(1-x^2) P_n' = n[(α-β) - (2n+α+β)x] P_n + 2(n+α)(n+β) P_{n-1}
    # with x = 2s - 1, 1 - x^2 = 4s(1-s), and d/ds = 2 d/dx
    a, b = params.alpha, params.beta
    c = to_real(2 * n + a + b)
    x = 2 * s - 1
    num = n * (to_real(a - b) - c * x) * pn + 2 * to_real((n + a) * (n + b)) * pnm1
    return 2 * num / (c * 4 * s * (1 - s))


def _seed_nodes(params: JacobiParams, n: int) -> np.ndarray:
    x, _ = roots_jacobi(n, float(params.alpha), float(params.beta))
    return np.sort(x)


def _newton_nodes(params: JacobiParams, n: int, bits: int, seeds) -> list:
    target = bits + 32
    # quadratic convergence: a step of relative size 2^-(target/2 + 8) leaves
    # an error far below the target
    tol_exp = -(target // 2 + 8)
    nodes = []
    for x0 in seeds:
        s_val = mpfr((1.0 + float(x0)) / 2.0, 64)
        prec_k = 64
        steps = 0
        while True:
            prec_k = min(2 * prec_k, target)
            rec = _recurrence(params, n, prec_k)
            with gmpy2.context(precision=prec_k):
                s = +s_val
                pn, pnm1 = _pn_and_prev(params, n, s, rec)
                ds = pn / _dpn_ds(params, n, s, pn, pnm1)
                s_val = s - ds
            steps += 1
            if steps > 200:
                raise ConvergenceError(f"Newton iteration for Jacobi node did not converge (n={n})")
            if prec_k == target:
                if ds == 0 or gmpy2.get_exp(ds) - gmpy2.get_exp(s_val) < tol_exp:
                    break
        nodes.append(s_val)
    return nodes


@lru_cache(maxsize=128)
def gauss_rule(params: JacobiParams, n_points: int, prec: PrecisionLike, domain: str = "[0,1]") -> QuadratureRule:
    """Gauss-Jacobi rule with ``n_points`` nodes.

    On ``"[0,1]"`` the weight is ``s**beta (1-s)**alpha``; on ``"[-1,1]"`` it is
    ``(1-x)**alpha (1+x)**beta``. Nodes are Newton-refined roots of the
    degree-``n_points`` polynomial; weights use
    ``w_k = G_n / ((1 - x_k^2) P_n'(x_k)^2)``.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if domain not in ("[0,1]", "[-1,1]"):
        raise ValueError(f"unknown domain {domain!r}")
    bits = bits_of(prec)
    a, b = params.alpha, params.beta
    n = n_points
    symmetric = domain == "[-1,1]" and a == b
    seeds = _seed_nodes(params, n)
    if symmetric:
        seeds = seeds[: (n + 1) // 2]
    s_nodes = _newton_nodes(params, n, bits, seeds) if n > 1 else None
    target = bits + 32
    with working(target):
        if n == 1:
            # root of J_1: s = (β+1)/(α+β+2)
            s_nodes = [to_real(Fraction(b + 1) / (a + b + 2))]
        # G_n = Γ(n+α+1)Γ(n+β+1)/(Γ(n+α+β+1) n!)
        G = gamma_ratio(n + a + 1, n + a + b + 1, target) * gamma_ratio(n + b + 1, n + 1, target)
        rec = _recurrence(params, n, target)
        s_w = []
        for s in s_nodes:
            s = +s
            if n == 1:
                dp = to_real(a + b + 2)
            else:
                pn, pnm1 = _pn_and_prev(params, n, s, rec)
                dp = _dpn_ds(params, n, s, mpfr(0), pnm1)
            # dP/dx = dp/2, 1 - x^2 = 4 s (1 - s); the [0,1] weight drops 2^{α+β+1}
            w01 = G / (4 * s * (1 - s) * (dp / 2) ** 2)
            s_w.append((s, w01))
    with working(bits):
        if domain == "[0,1]":
            nodes = tuple(+s for s, _ in s_w)
            weights = tuple(+w for _, w in s_w)
            return QuadratureRule(nodes, weights, domain, params)
        scale = mpfr(2) ** to_real(a + b + 1)
        pairs = [(2 * s - 1, w * scale) for s, w in s_w]
        if symmetric:
            # seeds held the left half (plus the centre when n is odd)
            left = pairs[: n // 2]
            middle = [(mpfr(0), pairs[-1][1])] if n % 2 else []
            pairs = left + middle + [(-x, w) for x, w in reversed(left)]
        nodes = tuple(+x for x, _ in pairs)
        weights = tuple(+w for _, w in pairs)
        return QuadratureRule(nodes, weights, domain, params)


# }}}
