"""Müntz-Jacobi Galerkin solver driven by a triangular recurrence.

After ``t = T u`` the Volterra form of equation ``j`` is

    vbar_j = psibar_j + T^{theta_j} I^{theta_j}(sum_r pbar_{j,r} vbar_r + pbar_{j,n+1}).

Coefficients are projected onto the degree-``N`` Müntz-Jacobi span and
converted to powers of ``u^(1/q)``. Because ``I^theta`` shifts the exponent
index by ``kappa_j = theta_j q`` the Galerkin system is strictly upper
triangular and is solved one index at a time:

    ctilde_{j,l} = P_{j,l} + vartheta_j(l - kappa_j) *
                   sum_r sum_{d} T^{theta_j} phat_{j,r,d} ctilde_{r, l - kappa_j - d}.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpc, mpfr

from .expr import evaluate as eval_expr
from .expr import is_constant
from .fracops import BandedMatrix, q_matrix, vartheta_table
from .muntz import (
    BasisVector,
    MuntzGrid,
    MuntzSeries,
    basis_eval,
    conversion_table,
    from_monomial,
    project_samples,
    projection_nodes,
    to_monomial,
)
from .numeric import Precision, PrecisionLike, bits_of, to_complex, to_real, working
from .problem import ProblemSpec
from .series_oracle import manufactured_forcing_for

__all__ = [
    "AssembledSystem",
    "GalerkinSolution",
    "TransformedProblem",
    "assemble",
    "back_substitute",
    "dense_solve",
    "evaluate",
    "project_coefficients",
    "recurrence_solve",
    "solve",
    "transform_problem",
]

DENSE_MAX_N = 64


# {{{ transformation


@dataclass(frozen=True)
class TransformedProblem:
    """Data of the problem on ``u in [0, 1]``.

    ``coupling(j, r, u)`` and ``forcing(j, u)`` evaluate ``p(T u)``;
    ``psibar[j]`` maps grid index ``k q`` to ``v_j^{(k)}(0) T^k / k!``.
    """

    spec: ProblemSpec
    grid: MuntzGrid
    bits: int
    T: mpfr
    T_theta: tuple
    shifts: tuple
    psibar: tuple
    _forcing: object = field(repr=False, compare=False, default=None)

    def coupling(self, j: int, r: int, u) -> mpc:
        with working(self.bits, 8):
            t = self.T * to_real(u)
        return eval_expr(self.spec.couplings[j][r], t, self.bits)

    def forcing(self, j: int, u) -> mpc:
        with working(self.bits, 8):
            t = self.T * to_real(u)
        if self._forcing is not None:
            return self._forcing(j, t)
        return eval_expr(self.spec.forcings[j], t, self.bits)

    def forcing_is_constant(self, j: int) -> bool:
        return self._forcing is None and is_constant(self.spec.forcings[j])


def transform_problem(spec: ProblemSpec, prec: PrecisionLike) -> TransformedProblem:
    bits = bits_of(prec)
    grid = spec.grid
    T = spec.horizon(bits + 16)
    init = spec.initial_values(bits + 16)
    with working(bits, 16):
        T_theta = tuple(T ** to_real(o.value) for o in spec.orders)
        psibar = []
        for row in init:
            d, Tk, fac = {}, mpfr(1), 1
            for k, v in enumerate(row):
                if k:
                    Tk *= T
                    fac *= k
                if v != 0:
                    d[k * grid.q] = v * Tk / fac
            psibar.append(d)
    with working(bits):
        T_theta = tuple(+x for x in T_theta)
        psibar = tuple({k: +v for k, v in d.items()} for d in psibar)
        T_b = +T
    forcing = manufactured_forcing_for(spec, bits) if spec.manufactured else None
    return TransformedProblem(
        spec, grid, bits, T_b, T_theta, tuple(o.shift(grid) for o in spec.orders), psibar, forcing
    )


def project_coefficients(f, grid: MuntzGrid, N: int, prec: PrecisionLike, constant=None) -> tuple:
    """Monomial row ``phat`` of the projection of ``f`` (a function of ``u``).

    ``constant`` short-circuits the projection for functions known to be
    constant.
    """
    bits = bits_of(prec)
    if constant is not None:
        with working(bits):
            return (to_complex(constant),) + (mpc(0),) * N
    nodes = projection_nodes(grid, N, bits)
    with working(bits, 8):
        samples = [f(u) for u in nodes]
    return to_monomial(project_samples(grid, N, samples, bits)).coeffs


# }}}


# {{{ assembly


@dataclass(frozen=True)
class AssembledSystem:
    """Banded storage of the operators ``A_{j,r}``.

    ``(A_{j,r})_{k,l} = diag[j][r][l - k - kappa_j] * colscale[j][l - kappa_j]`` for
    ``l - k >= kappa_j``, else zero. ``diag[j][r][d] = T^{theta_j} phat_{j,r,d}`` and
    ``colscale[j][m] = Γ(m/q + 1)/Γ(m/q + theta_j + 1)``.
    """

    N: int
    grid: MuntzGrid
    bits: int
    n: int
    shifts: tuple
    T: mpfr
    T_theta: tuple
    phat: tuple
    forcing_phat: tuple
    diag: tuple
    colscale: tuple
    P: tuple
    transformed: TransformedProblem = field(repr=False, compare=False)

    def A_entry(self, j: int, r: int, k: int, l: int) -> mpc:
        kap = self.shifts[j]
        if l - k < kap:
            return mpc(0)
        with working(self.bits):
            return self.diag[j][r][l - k - kap] * self.colscale[j][l - kap]

    def A_dense(self, j: int, r: int) -> list:
        return [[self.A_entry(j, r, k, l) for l in range(self.N + 1)] for k in range(self.N + 1)]

    def Q(self, j: int) -> BandedMatrix:
        return q_matrix(self.transformed.spec.orders[j], self.grid, self.N, self.bits)

    def conversion(self):
        return conversion_table(self.grid, self.N, self.bits)


def assemble(spec: ProblemSpec, N: int, prec: PrecisionLike | None = None,
             transformed: TransformedProblem | None = None) -> AssembledSystem:
    bits = bits_of(prec if prec is not None else Precision.for_degree(N))
    tp = transformed or transform_problem(spec, bits)
    grid, n = tp.grid, spec.n
    if N < max(tp.shifts):
        raise ValueError(f"N={N} is below the largest order shift {max(tp.shifts)}")
    phat = []
    for j in range(n):
        row = []
        for r in range(n):
            e = spec.couplings[j][r]
            const = eval_expr(e, 0, bits) if is_constant(e) else None
            row.append(project_coefficients(
                lambda u, j=j, r=r: tp.coupling(j, r, u), grid, N, bits, constant=const))
        phat.append(tuple(row))
    fphat = []
    for j in range(n):
        const = eval_expr(spec.forcings[j], 0, bits) if tp.forcing_is_constant(j) else None
        fphat.append(project_coefficients(lambda u, j=j: tp.forcing(j, u), grid, N, bits, constant=const))
    diag, colscale, P = [], [], []
    with working(bits):
        for j in range(n):
            kap = tp.shifts[j]
            Tt = tp.T_theta[j]
            diag.append(tuple(tuple(Tt * c for c in phat[j][r][: N - kap + 1]) for r in range(n)))
            cs = vartheta_table(spec.orders[j], grid, N - kap, bits)
            colscale.append(cs)
            row = [mpc(tp.psibar[j].get(l, 0)) for l in range(N + 1)]
            for m in range(N - kap + 1):
                # (phat_{j,n+1} Q_j)_l = phat_{j,n+1,l-kappa} vartheta(l - kappa)
                row[m + kap] += Tt * fphat[j][m] * cs[m]
            P.append(tuple(row))
    return AssembledSystem(N, grid, bits, n, tp.shifts, tp.T, tp.T_theta, tuple(phat),
                           tuple(fphat), tuple(diag), tuple(colscale), tuple(P), tp)


# }}}


# {{{ solves


def recurrence_solve(sys: AssembledSystem) -> tuple:
    """Rows ``ctilde_j`` by increasing index, interleaved across equations."""
    N, n = sys.N, sys.n
    nz = [[[(d, c) for d, c in enumerate(sys.diag[j][r]) if c != 0] for r in range(n)]
          for j in range(n)]
    ct = [[mpc(0)] * (N + 1) for _ in range(n)]
    with working(sys.bits, 16):
        for l in range(N + 1):
            for j in range(n):
                kap = sys.shifts[j]
                if l < kap:
                    ct[j][l] = mpc(sys.P[j][l])
                    continue
                m = l - kap
                acc = mpc(0)
                for r in range(n):
                    cr = ct[r]
                    for d, c in nz[j][r]:
                        if d > m:
                            break
                        acc += c * cr[m - d]
                ct[j][l] = acc * sys.colscale[j][m] + sys.P[j][l]
    with working(sys.bits):
        return tuple(tuple(+x for x in row) for row in ct)


def dense_solve(sys: AssembledSystem) -> tuple:
    """Test oracle: Gaussian elimination on ``ctilde (I - A) = P``."""
    N, n = sys.N, sys.n
    if N > DENSE_MAX_N:
        raise ValueError(f"dense oracle is limited to N <= {DENSE_MAX_N}")
    size = n * (N + 1)
    with working(sys.bits, 16):
        # unknown (r, k) -> column; equation (j, l) -> row
        M = [[mpc(0)] * (size + 1) for _ in range(size)]
        for j in range(n):
            for l in range(N + 1):
                row = M[j * (N + 1) + l]
                row[j * (N + 1) + l] += 1
                for r in range(n):
                    for k in range(N + 1):
                        a = sys.A_entry(j, r, k, l)
                        if a != 0:
                            row[r * (N + 1) + k] -= a
                row[size] = mpc(sys.P[j][l])
        for col in range(size):
            piv = max(range(col, size), key=lambda i: abs(M[i][col]))
            if M[piv][col] == 0:
                raise ZeroDivisionError("singular Galerkin system")
            M[col], M[piv] = M[piv], M[col]
            pr = M[col]
            inv = 1 / pr[col]
            for i in range(col + 1, size):
                f = M[i][col]
                if f != 0:
                    f = f * inv
                    ri = M[i]
                    for c in range(col, size + 1):
                        ri[c] -= f * pr[c]
        x = [mpc(0)] * size
        for i in range(size - 1, -1, -1):
            acc = M[i][size]
            for c in range(i + 1, size):
                acc -= M[i][c] * x[c]
            x[i] = acc / M[i][i]
    with working(sys.bits):
        return tuple(tuple(+x[j * (N + 1) + l] for l in range(N + 1)) for j in range(n))


@dataclass(frozen=True)
class GalerkinSolution:
    coeffs: tuple
    monomial: tuple
    spec: ProblemSpec = field(repr=False)
    N: int
    bits: int
    T: mpfr
    seconds: float

    @property
    def grid(self) -> MuntzGrid:
        return self.coeffs[0].grid

    def __call__(self, j: int, t) -> mpc:
        return evaluate(self, j, t)


def back_substitute(sys: AssembledSystem, rows, seconds: float = 0.0) -> GalerkinSolution:
    t0 = time.perf_counter()
    coeffs = tuple(from_monomial(MuntzSeries(sys.grid, tuple(r), sys.bits), sys.N) for r in rows)
    seconds += time.perf_counter() - t0
    return GalerkinSolution(coeffs, tuple(tuple(r) for r in rows), sys.transformed.spec,
                            sys.N, sys.bits, sys.T, seconds)


def evaluate(sol: GalerkinSolution, j: int, t) -> mpc:
    """``v_{j,N}(t) = sum_i c_{j,i} Jm_i(t / T)`` for ``0 <= t <= T``."""
    with working(sol.bits, 8):
        t = to_real(t)
        if t < 0 or t > sol.T * (1 + mpfr(2) ** (8 - sol.bits)):
            raise ValueError(f"t={t} lies outside [0, T]")
        u = min(t / sol.T, mpfr(1))
    return basis_eval(sol.coeffs[j], u, sol.bits)


def solve(spec: ProblemSpec, N: int, prec: PrecisionLike | None = None) -> GalerkinSolution:
    """Assemble, run the recurrence and convert back to Jacobi coefficients.

    Wall time covers all three stages; the precision defaults to the policy
    ``max(128, ceil(2.2 N) + 64)`` bits.
    """
    bits = bits_of(prec if prec is not None else Precision.for_degree(N))
    t0 = time.perf_counter()
    sys = assemble(spec, N, bits)
    rows = recurrence_solve(sys)
    return back_substitute(sys, rows, time.perf_counter() - t0)


def monomial_solution(sol: GalerkinSolution, j: int) -> MuntzSeries:
    """``ctilde_j`` as a series in ``u``."""
    return MuntzSeries(sol.grid, sol.monomial[j], sol.bits)


# }}}
