"""Local power-series solutions and manufactured forcing terms.

In Volterra form ``v_j = psi_j + I^{theta_j}(sum_r p_{j,r} v_r + f_j)``. On a
grid with denominator ``q`` and ``k_j = theta_j q`` this gives, for
``mu >= k_j`` and ``m = mu - k_j``,

    vbar_{j,mu} = Γ(m/q+1)/Γ(m/q+theta_j+1) * (f_{j,m} + sum_r sum_a p_{j,r,a} vbar_{r,m-a})

and every coefficient below ``k_j`` comes from the initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .expr import expand
from .fracops import RationalOrder, caputo_derivative_series, vartheta_table
from .muntz import MuntzGrid, MuntzSeries
from .numeric import PrecisionLike, bits_of, to_real, working
from .problem import ProblemSpec

__all__ = [
    "ManufacturedForcing",
    "SeriesProblem",
    "SeriesSolution",
    "TruncationError",
    "initial_from_series",
    "manufacture_forcing",
    "manufactured_forcing_for",
    "radius_hint",
    "series_eval",
    "series_problem_from_spec",
    "series_residual",
    "series_solve",
]


class TruncationError(ValueError):
    """The requested series truncation cannot support the recurrence."""


@dataclass(frozen=True)
class SeriesProblem:
    """Problem data with every coefficient already expanded on ``grid``."""

    grid: MuntzGrid
    orders: tuple
    couplings: tuple
    forcing: tuple
    initial: tuple

    @property
    def n(self) -> int:
        return len(self.orders)

    def shifts(self) -> tuple:
        return tuple(RationalOrder.of(o).shift(self.grid) for o in self.orders)


@dataclass(frozen=True)
class SeriesSolution:
    """``series[j]`` holds every coefficient of ``v_j``, including the Taylor part ``psi``."""

    grid: MuntzGrid
    series: tuple
    psi: tuple
    M: int
    radius_hint: mpfr
    bits: int


def _psi_coeffs(order: RationalOrder, init, grid: MuntzGrid) -> dict:
    out = {}
    for k, v in enumerate(init):
        if v != 0:
            out[k * grid.q] = v / math.factorial(k)
    return out


def series_solve(problem: SeriesProblem, M: int, prec: PrecisionLike, T=1) -> SeriesSolution:
    """Coefficients ``vbar_{j,mu}`` for ``mu <= M`` by the triangular recurrence."""
    bits = bits_of(prec)
    grid, n = problem.grid, problem.n
    shifts = problem.shifts()
    if M < max(shifts):
        raise TruncationError(f"M={M} is below the largest order shift {max(shifts)}")
    for j in range(n):
        need = M - shifts[j]
        if problem.forcing[j].truncation_order < need:
            raise TruncationError(f"forcing {j} known to order {problem.forcing[j].truncation_order} < {need}")
        for r in range(n):
            if problem.couplings[j][r].truncation_order < need:
                raise TruncationError(f"coupling ({j},{r}) known only to order "
                                      f"{problem.couplings[j][r].truncation_order} < {need}")
    ratios = [vartheta_table(o, grid, M - k, bits + 16) for o, k in zip(problem.orders, shifts)]
    psi = []
    with working(bits, 16):
        for j in range(n):
            psi.append(_psi_coeffs(RationalOrder.of(problem.orders[j]),
                                   [mpc(v) for v in problem.initial[j]], grid))
        nz = [[[(a, c) for a, c in enumerate(problem.couplings[j][r].coeffs) if c != 0]
               for r in range(n)] for j in range(n)]
        v = [[mpc(0)] * (M + 1) for _ in range(n)]
        for mu in range(M + 1):
            for j in range(n):
                k = shifts[j]
                if mu < k:
                    v[j][mu] = mpc(psi[j].get(mu, 0))
                    continue
                m = mu - k
                acc = mpc(problem.forcing[j].coeffs[m])
                for r in range(n):
                    vr = v[r]
                    for a, c in nz[j][r]:
                        if a > m:
                            break
                        acc += c * vr[m - a]
                v[j][mu] = acc * ratios[j][m]
    with working(bits):
        series = tuple(MuntzSeries(grid, tuple(+x for x in row), bits) for row in v)
        psi_t = tuple(tuple(+mpc(psi[j].get(k * grid.q, 0)) for k in range(RationalOrder.of(o).ceil))
                      for j, o in enumerate(problem.orders))
    hint = min(radius_hint(s, T) for s in series)
    return SeriesSolution(grid, series, psi_t, M, hint, bits)


def radius_hint(s: MuntzSeries, T) -> mpfr:
    """Largest ``t = T 2^-k`` at which the last five nonzero terms decrease."""
    bits = s.bits
    idx = s.nonzero()[-5:]
    with working(bits):
        T = to_real(T)
        if len(idx) < 5:
            return T
        logs = [gmpy2.log2(abs(s.coeffs[mu])) for mu in idx]
        t = T
        for _ in range(200):
            lt = gmpy2.log2(t) / s.grid.q
            mags = [lg + mu * lt for lg, mu in zip(logs, idx)]
            if all(b < a for a, b in zip(mags, mags[1:])):
                return t
            t = t / 2
        return mpfr(0)


def series_eval(sol: SeriesSolution, j: int, t, prec: PrecisionLike | None = None) -> mpc:
    return sol.series[j].evaluate(t, sol.bits if prec is None else prec)


def series_residual(problem: SeriesProblem, sol: SeriesSolution) -> list:
    """``D^theta v_j - sum_r p_{j,r} v_r - f_j`` on the retained orders."""
    out = []
    for j in range(problem.n):
        res = caputo_derivative_series(problem.orders[j], sol.series[j])
        order = res.truncation_order
        for r in range(problem.n):
            res = res - (problem.couplings[j][r].truncate(order) * sol.series[r].truncate(order))
        res = res - problem.forcing[j].truncate(order)
        out.append(res)
    return out


def manufacture_forcing(orders, exact, couplings) -> list:
    """``f_j = D^{theta_j} exact_j - sum_r p_{j,r} exact_r`` as Müntz series."""
    n = len(orders)
    out = []
    for j in range(n):
        f = caputo_derivative_series(orders[j], exact[j])
        for r in range(n):
            order = min(f.truncation_order, couplings[j][r].truncation_order,
                        exact[r].truncation_order)
            f = f.truncate(order) - couplings[j][r].truncate(order) * exact[r].truncate(order)
        out.append(f)
    return out


def initial_from_series(order, s: MuntzSeries, prec: PrecisionLike) -> tuple:
    """``v^{(k)}(0) = k! * coeff(t^k)`` for ``k < ceil(order)``."""
    o = RationalOrder.of(order)
    with working(prec):
        return tuple(+(s.coeffs[k * s.grid.q] * math.factorial(k)) for k in range(o.ceil))


# {{{ problems from specs


def _expanded(spec: ProblemSpec, M: int, bits: int):
    grid = spec.grid
    kmax = max(o.shift(grid) for o in spec.orders)
    coup = tuple(tuple(expand(e, grid, M, bits) for e in row) for row in spec.couplings)
    if spec.manufactured:
        exact = [expand(e, grid, M + kmax, bits) for e in spec.exact]
        forcing = tuple(f.truncate(M) if f.truncation_order > M else f
                        for f in manufacture_forcing(spec.orders, exact, coup))
    else:
        forcing = tuple(expand(e, grid, M, bits) for e in spec.forcings)
    return coup, forcing


def series_problem_from_spec(spec: ProblemSpec, M: int, prec: PrecisionLike) -> SeriesProblem:
    """Expand every expression of ``spec`` to order ``M`` on its grid."""
    bits = bits_of(prec)
    coup, forcing = _expanded(spec, M, bits)
    return SeriesProblem(spec.grid, spec.orders, coup, forcing, spec.initial_values(bits))


@dataclass(frozen=True)
class ManufacturedForcing:
    """Forcing series accurate on the whole horizon, with its evaluation precision."""

    series: tuple
    M: int
    eval_bits: int
    bits: int

    def __call__(self, j: int, t) -> mpc:
        v = self.series[j].evaluate(t, self.eval_bits)
        with working(self.bits):
            return +v


def _term_log2(s: MuntzSeries, log2T) -> list:
    out = []
    for mu, c in enumerate(s.coeffs):
        if c == 0:
            out.append(None)
        else:
            out.append(float(gmpy2.log2(abs(c))) + mu * log2T / s.grid.q)
    return out


@lru_cache(maxsize=32)
def manufactured_forcing_for(spec: ProblemSpec, prec: PrecisionLike, max_order: int = 1 << 14) -> ManufacturedForcing:
    """Expand the manufactured forcing until its tail on ``[0, T]`` is negligible.

    The order doubles until the largest term among the last quarter is below
    ``2^-(bits+8)`` in absolute size; the expansion is then redone with
    enough guard bits to absorb the cancellation between its terms.
    """
    if not spec.manufactured:
        raise ValueError("problem has explicit forcing terms")
    bits = bits_of(prec)
    log2T = float(gmpy2.log2(spec.horizon(128)))
    M = max(64, 8 * spec.grid.q)
    while True:
        _, forcing = _expanded(spec, M, 128)
        peak, ok = -math.inf, True
        for f in forcing:
            logs = _term_log2(f, log2T)
            vals = [x for x in logs if x is not None]
            if vals:
                peak = max(peak, max(vals))
            tail = [x for x in logs[M - M // 4:] if x is not None]
            if tail and max(tail) > -(bits + 8):
                ok = False
        if ok:
            break
        if M >= max_order:
            raise TruncationError(f"manufactured forcing needs more than {max_order} terms")
        M *= 2
    guard = (max(0, math.ceil(peak)) if math.isfinite(peak) else 0) + 32
    _, forcing = _expanded(spec, M, bits + guard)
    return ManufacturedForcing(tuple(forcing), M, bits + guard, bits)


# }}}
