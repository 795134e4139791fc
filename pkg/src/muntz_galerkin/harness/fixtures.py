"""Benchmark problems with known solutions.

Fixtures: ``exm1``, ``exm3``, ``exm2`` (manufactured oscillatory systems), ``exm5``
(a 2x2 system whose solution lies in a finite Müntz space), ``exm6``
(Mittag-Leffler relaxation), ``exm7`` (a stiff 5x5 constant-coefficient
system) and ``zero``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from ..expr import Num, evaluate, expand, parse, to_text
from ..fracops import RationalOrder
from ..numeric import PrecisionLike, bits_of, gamma, mittag_leffler, to_real, working
from ..problem import ProblemSpec
from ..series_oracle import initial_from_series

__all__ = [
    "EXM7_A",
    "EXM7_V0",
    "FIXTURES",
    "Fixture",
    "ExprReference",
    "MittagLefflerReference",
    "MatrixSeriesReference",
    "build_fixture",
    "exm7_matrix_reference",
]

Reference = Callable  # (j, t, bits) -> mpc


@dataclass(frozen=True)
class ExprReference:
    """Exact solutions given as expressions."""

    exprs: tuple

    def __call__(self, j: int, t, prec: PrecisionLike) -> mpc:
        return evaluate(self.exprs[j], t, prec)


@dataclass(frozen=True)
class MittagLefflerReference:
    """``scale * E_alpha(-t^alpha) + shift`` for a scalar problem."""

    alpha: Fraction
    scale: int
    shift: int

    def __call__(self, j: int, t, prec: PrecisionLike) -> mpc:
        bits = bits_of(prec)
        with working(bits, 16):
            z = -(to_real(t) ** to_real(self.alpha))
        e = mittag_leffler(self.alpha, z, bits + 16)
        with working(bits):
            return +(self.scale * e + self.shift)


@dataclass
class MatrixSeriesReference:
    """``E_{1/2}(A t^{1/2}) V0`` summed as ``sum_k (A^k V0) t^{k/2} / Γ(k/2 + 1)``.

    The vectors ``A^k V0`` are built once per precision; evaluation then costs
    one scalar series per component.
    """

    A: tuple
    V0: tuple
    alpha: Fraction = Fraction(1, 2)
    T_max: float = 2.0
    _cache: dict = field(default_factory=dict, repr=False)

    def _terms(self, bits: int):
        if bits in self._cache:
            return self._cache[bits]
        n = len(self.V0)
        rho = max(sum(abs(float(Fraction(x))) for x in row) for row in self.A)
        r = rho * self.T_max ** float(self.alpha)
        # peak of r^k / Γ(αk + 1) sets the cancellation guard
        logs = [k * math.log2(r) - math.lgamma(float(self.alpha) * k + 1) / math.log(2)
                for k in range(4000)] if r > 0 else [0.0]
        peak = max(logs)
        kpeak = logs.index(peak)
        lx = float(self.alpha) * math.log2(self.T_max)
        wp = bits + max(0, math.ceil(peak)) + 32
        with working(wp):
            A = [[to_real(Fraction(x)) for x in row] for row in self.A]
            vec = [to_real(Fraction(x)) for x in self.V0]
            terms, k = [], 0
            tol_log = -wp - 8
            while True:
                g = gamma(self.alpha * k + 1, wp)
                terms.append(tuple(v / g for v in vec))
                mag = max((abs(x) for x in terms[-1]), default=mpfr(0))
                if k > kpeak + 8 and (mag == 0 or gmpy2.log2(mag) + k * lx < tol_log):
                    break
                vec = [sum((A[i][c] * vec[c] for c in range(n)), mpfr(0)) for i in range(n)]
                k += 1
        self._cache[bits] = (wp, terms)
        return wp, terms

    def __call__(self, j: int, t, prec: PrecisionLike) -> mpc:
        bits = bits_of(prec)
        wp, terms = self._terms(bits)
        with working(wp):
            x = to_real(t) ** to_real(self.alpha)
            acc = mpfr(0)
            for term in reversed(terms):
                acc = acc * x + term[j]
        with working(bits):
            return mpc(acc)


@dataclass(frozen=True)
class Fixture:
    name: str
    spec: ProblemSpec
    reference: object
    degrees: tuple
    description: str
    params: dict = field(default_factory=dict, compare=False)


# {{{ builders


def _manufactured_initial(orders, exact_exprs, q: int) -> tuple:
    """Initial data read off the Taylor part of the exact solutions."""
    from ..muntz import MuntzGrid

    grid = MuntzGrid(q)
    out = []
    for o, e in zip(orders, exact_exprs):
        o = RationalOrder.of(o)
        s = expand(parse(e), grid, o.ceil * q, 256)
        vals = initial_from_series(o, s, 256)
        out.append(tuple(_complex_text(v) for v in vals))
    return tuple(out)


def _complex_text(v: mpc) -> str:
    re_, im_ = float(v.real), float(v.imag)
    if re_ != v.real or im_ != v.imag:
        raise ValueError(f"initial value {v} is not exactly representable")
    re_s = repr(re_).rstrip("0").rstrip(".") if re_ else "0"
    if im_ == 0:
        return re_s
    return f"{re_s}{'+' if im_ > 0 else '-'}{abs(im_)!r}i"


def exm1(full_scale: bool = False, omega: int | None = None) -> Fixture:
    w = omega if omega is not None else (70 if full_scale else 10)
    orders = ("1/4", "1/2", "3/4")
    exact = (f"sin({w}*t^(1/4))", f"cos({w}*t^(1/2))", f"sin({w}*t^(3/4)) + cos(12*t^(3/4))")
    couplings = (
        ("t^(1/2)", "1", "0.5*besselj(0; t^(5/4))"),
        ("1", "t", "2*t^(3/2)"),
        ("sin(2*t^(1/2))", "3", "t"),
    )
    spec = ProblemSpec(orders, couplings, _manufactured_initial(orders, exact, 4), "pi/2",
                       exact=exact, name="exm1")
    return Fixture("exm1", spec, ExprReference(spec.exact), (32, 64, 96, 128),
                   f"oscillatory 3x3 system, omega={w}, T=pi/2", {"omega": w})


def exm3(full_scale: bool = False, omega1: int | None = None, omega2: int | None = None) -> Fixture:
    w1 = omega1 if omega1 is not None else (80 if full_scale else 12)
    w2 = omega2 if omega2 is not None else (10 if full_scale else 3)
    orders = ("1/2", "3/2")
    exact = (f"t^(1/2)*exp(i*{w1}*t^(1/2))", f"exp(i*{w2}*t^(3/2))")
    couplings = (("t^(5/2)", "1"), ("1", "cos(t^(3/2))"))
    spec = ProblemSpec(orders, couplings, _manufactured_initial(orders, exact, 2), "3*pi/2",
                       exact=exact, name="exm3")
    return Fixture("exm3", spec, ExprReference(spec.exact), (32, 64, 96, 128),
                   f"complex oscillatory 2x2 system, omega=({w1}, {w2}), T=3pi/2",
                   {"omega1": w1, "omega2": w2})


def exm2(full_scale: bool = False) -> Fixture:
    orders = ("1/6", "1/3", "2/3")
    exact = ("sin(10*t^(1/6))", "t^(1/3)", "t^(2/3) + 5*t^(5/6)")
    couplings = (
        ("2*t", "t^(1/3)", "sin(2*t^(1/6))"),
        ("t^(11/6)", "t^(1/2)", "5"),
        ("t", "1", "cos(t^(2/3))"),
    )
    spec = ProblemSpec(orders, couplings, _manufactured_initial(orders, exact, 6), "1",
                       exact=exact, name="exm2")
    return Fixture("exm2", spec, ExprReference(spec.exact), (10, 20, 40, 80),
                   "non-smooth 3x3 system, T=1")


def _num(x: mpfr) -> str:
    return to_text(Num.from_value(x))


def exm5(theta="1/2", digits_bits: int = 1400) -> Fixture:
    """2x2 system with solution ``(t^(1+θ), Γ(θ+2) t)``.

    The forcing ``t^(1+θ) + Γ(θ+2) t^(1-θ)/Γ(2-θ) + Γ(θ+2) t`` is the
    closed form obtained with the reflection formula
    ``π csc(πθ) = Γ(-θ-1) Γ(θ+2)``.
    """
    th = Fraction(theta)
    RationalOrder.of(th)
    c = gamma(th + 2, digits_bits)
    with working(digits_bits):
        d = c / gamma(2 - th, digits_bits)
    a, b = _rat(1 + th), _rat(1 - th)
    forcing2 = f"t^({a}) + {_num(d)}*t^({b}) + {_num(c)}*t"
    spec = ProblemSpec(
        (th, th), (("0", "1"), ("-1", "-1")), (("0",), ("0",)), "1",
        forcings=("0", forcing2), name=f"exm5[{th}]",
    )
    ref = ExprReference((parse(f"t^({a})"), parse(f"{_num(c)}*t")))
    default_n = {Fraction(1, 4): 5, Fraction(2, 5): 7, Fraction(1, 2): 3, Fraction(2, 3): 5}
    n0 = default_n.get(th, 2 * th.denominator + th.numerator)
    return Fixture("exm5", spec, ref, (n0,), f"finite Müntz-space solution, theta={th}",
                   {"theta": th})


def _rat(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def exm6(full_scale: bool = False, T: str | None = None) -> Fixture:
    T = T if T is not None else ("1000" if full_scale else "1")
    spec = ProblemSpec(("1/2",), (("-1",),), (("10",),), T, forcings=("1",), name="exm6")
    return Fixture("exm6", spec, MittagLefflerReference(Fraction(1, 2), 9, 1), (16, 32, 64),
                   f"Mittag-Leffler relaxation on [0, {T}]", {"T": T})


EXM7_A = (
    (41, 41, -38, 40, -2),
    (-79, 81, 2, 0, -2),
    (20, -60, 20, -20, -8),
    (-22, 58, -24, 20, -4),
    (1, 1, -2, -4, -2),
)
EXM7_V0 = (1, 2, 3, 4, 5)


def _exm7_matrix() -> tuple:
    return tuple(tuple(Fraction(x, 8) for x in row) for row in EXM7_A)


def exm7(full_scale: bool = False, T: str | None = None) -> Fixture:
    T = T if T is not None else ("2" if full_scale else "1/2")
    A = _exm7_matrix()
    couplings = []
    for row in A:
        out = []
        for x in row:
            lit = str(float(abs(x)))  # multiples of 1/8 are exact decimals
            out.append(lit if x >= 0 else f"-{lit}")
        couplings.append(tuple(out))
    spec = ProblemSpec(("1/2",) * 5, tuple(couplings), tuple((str(v),) for v in EXM7_V0), T,
                       forcings=("0",) * 5, name="exm7")
    ref = MatrixSeriesReference(A, EXM7_V0, T_max=float(spec.T))
    return Fixture("exm7", spec, ref, (256,), f"stiff 5x5 system on [0, {T}]", {"T": T})


def exm7_matrix_reference(t, prec: PrecisionLike) -> tuple:
    """``E_{1/2}(A t^{1/2}) V0`` through the matrix Mittag-Leffler function."""
    from ..numeric import matrix_mittag_leffler

    bits = bits_of(prec)
    with working(bits, 16):
        s = gmpy2.sqrt(to_real(t))
        M = [[to_real(x) * s for x in row] for row in _exm7_matrix()]
    E = matrix_mittag_leffler(Fraction(1, 2), M, bits)
    with working(bits):
        return tuple(+sum((E[i][c] * EXM7_V0[c] for c in range(5)), mpc(0)) for i in range(5))


def zero(full_scale: bool = False) -> Fixture:
    spec = ProblemSpec(("1/2",), (("0",),), (("0",),), "1", exact=("0",), name="zero")
    return Fixture("zero", spec, ExprReference(spec.exact), (4, 8), "the all-zero problem")


FIXTURES = {
    "exm1": exm1,
    "exm3": exm3,
    "exm2": exm2,
    "exm5": exm5,
    "exm6": exm6,
    "exm7": exm7,
    "zero": zero,
}


def build_fixture(name: str, full_scale: bool = False, **params) -> Fixture:
    """Build a named fixture; desk-scale parameters unless ``full_scale``."""
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}") from None
    if name == "exm5":
        return builder(**params)
    return builder(full_scale=full_scale, **params)


# }}}
