"""Problem data for linear systems of Caputo-type fractional equations.

Equation ``j`` reads ``D^{theta_j} v_j = sum_r p_{j,r}(t) v_r + f_j(t)`` on
``[0, T]`` with ``v_j^{(k)}(0)`` prescribed for ``k < ceil(theta_j)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .expr import Expr, exponents, parse
from .fracops import RationalOrder
from .muntz import MuntzGrid
from .numeric import PrecisionLike, to_real, working

__all__ = [
    "ProblemSpec",
    "ProblemValidationError",
    "Scalar",
    "parse_complex",
]


class ProblemValidationError(ValueError):
    def __init__(self, field_name: str, message: str, line: int | None = None) -> None:
        self.field = field_name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field_name}{where}: {message}")


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_SCALAR_TOKEN = re.compile(rf"\s*(?:(?P<num>{_NUM})|(?P<pi>pi)|(?P<op>[*/]))")


@dataclass(frozen=True)
class Scalar:
    """A positive real written as a product/quotient of decimals and ``pi``.

    Examples: ``"1"``, ``"0.5"``, ``"1/2"``, ``"pi/2"``, ``"3*pi/2"``.
    """

    text: str

    def __post_init__(self) -> None:
        self._factors()

    def _factors(self) -> list[tuple[int, str]]:
        pos, out, sign = 0, [], 1
        expect_operand = True
        src = self.text.strip()
        while pos < len(src):
            m = _SCALAR_TOKEN.match(src, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"bad scalar {self.text!r} at offset {pos}")
            pos = m.end()
            if m.lastgroup == "op":
                if expect_operand:
                    raise ValueError(f"bad scalar {self.text!r}: operator without operand")
                sign = 1 if m.group("op") == "*" else -1
                expect_operand = True
                continue
            if not expect_operand:
                raise ValueError(f"bad scalar {self.text!r}: missing operator")
            out.append((sign, m.group(m.lastgroup)))
            expect_operand = False
        if expect_operand:
            raise ValueError(f"bad scalar {self.text!r}")
        return out

    def value(self, prec: PrecisionLike) -> mpfr:
        with working(prec, 8):
            acc = mpfr(1)
            for sign, tok in self._factors():
                x = gmpy2.const_pi() if tok == "pi" else mpfr(tok)
                if sign < 0 and x == 0:
                    raise ValueError(f"division by zero in {self.text!r}")
                acc = acc * x if sign > 0 else acc / x
        with working(prec):
            return +acc

    def as_fraction(self) -> Fraction | None:
        """Exact value when ``pi`` does not occur."""
        acc = Fraction(1)
        for sign, tok in self._factors():
            if tok == "pi":
                return None
            x = Fraction(tok)
            acc = acc * x if sign > 0 else acc / x
        return acc

    def __float__(self) -> float:
        return float(self.value(64))

    def __str__(self) -> str:
        return self.text


def _split_complex(s: str) -> tuple[str, str]:
    """Split ``"a+bi"`` into ``("a", "+b")``; the imaginary part may be empty."""
    body = s[:-1].rstrip("*")
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            return body[:k], body[k:]
    return "", body


def parse_complex(value, prec: PrecisionLike) -> mpc:
    """``"a"``, ``"a+bi"``, ``"bi"``, numbers or mpc values to an mpc."""
    with working(prec):
        if isinstance(value, mpc):
            return +value
        if isinstance(value, complex):
            return mpc(value)
        if isinstance(value, (int, Fraction)):
            return mpc(to_real(Fraction(value)))
        if isinstance(value, (float, mpfr)):
            return mpc(value)
        s = str(value).replace(" ", "")
        try:
            if not s.endswith("i"):
                return mpc(_real_literal(s), 0)
            re_s, im_s = _split_complex(s)
            if im_s in ("", "+", "-"):
                im_s += "1"
            return mpc(_real_literal(re_s) if re_s else mpfr(0), _real_literal(im_s))
        except ValueError:
            raise ValueError(f"bad complex literal {value!r}") from None


_REAL = re.compile(rf"^[+-]?{_NUM}$")


def _real_literal(s: str) -> mpfr:
    if not _REAL.match(s):
        raise ValueError(s)
    return mpfr(s)


def _as_expr(x) -> Expr:
    return parse(x) if isinstance(x, str) else x


@dataclass(frozen=True)
class ProblemSpec:
    """One SFDE instance.

    Exactly one of ``forcings`` and ``exact`` is given; with ``exact`` the
    forcing terms are manufactured so that ``exact`` solves the system.
    Initial data entries may be numbers, complex literals or mpc values.
    """

    orders: tuple
    couplings: tuple
    initial: tuple
    T: Scalar
    forcings: tuple | None = None
    exact: tuple | None = None
    name: str = ""
    q_override: int | None = field(default=None, compare=True)

    def __post_init__(self) -> None:
        try:
            orders = tuple(RationalOrder.of(o) for o in self.orders)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise ProblemValidationError("orders", str(exc)) from None
        object.__setattr__(self, "orders", orders)
        n = len(orders)
        if n == 0:
            raise ProblemValidationError("orders", "at least one equation is required")
        if len(self.couplings) != n or any(len(row) != n for row in self.couplings):
            raise ProblemValidationError("couplings", f"expected a {n}x{n} grid of expressions")
        object.__setattr__(
            self, "couplings", tuple(tuple(_as_expr(e) for e in row) for row in self.couplings)
        )
        if (self.forcings is None) == (self.exact is None):
            raise ProblemValidationError("forcings", "give exactly one of forcings or exact")
        for fname in ("forcings", "exact"):
            val = getattr(self, fname)
            if val is not None:
                if len(val) != n:
                    raise ProblemValidationError(fname, f"expected {n} expressions")
                object.__setattr__(self, fname, tuple(_as_expr(e) for e in val))
        if len(self.initial) != n:
            raise ProblemValidationError("initial", f"expected {n} rows")
        init = []
        for j, (row, o) in enumerate(zip(self.initial, orders)):
            row = tuple(row)
            if len(row) != o.ceil:
                raise ProblemValidationError(
                    "initial", f"equation {j} of order {o} needs {o.ceil} values, got {len(row)}"
                )
            for v in row:
                parse_complex(v, 64)
            init.append(row)
        object.__setattr__(self, "initial", tuple(init))
        T = self.T if isinstance(self.T, Scalar) else Scalar(str(self.T))
        if T.value(64) <= 0:
            raise ProblemValidationError("T", "horizon must be positive")
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return len(self.orders)

    @property
    def manufactured(self) -> bool:
        return self.exact is not None

    def expressions(self) -> list:
        out = [e for row in self.couplings for e in row]
        out += list(self.forcings or ()) + list(self.exact or ())
        return out

    @property
    def grid(self) -> MuntzGrid:
        """lcm of the order denominators and of every exponent denominator."""
        q = math.lcm(*(o.q_denom for o in self.orders))
        for e in self.expressions():
            for r in exponents(e):
                q = math.lcm(q, r.denominator)
        if self.q_override is not None:
            if self.q_override % q:
                raise ProblemValidationError("q", f"override {self.q_override} is not a multiple of {q}")
            q = self.q_override
        return MuntzGrid(q)

    def initial_values(self, prec: PrecisionLike) -> tuple:
        return tuple(tuple(parse_complex(v, prec) for v in row) for row in self.initial)

    def horizon(self, prec: PrecisionLike) -> mpfr:
        return self.T.value(prec)

    def with_horizon(self, T) -> ProblemSpec:
        from dataclasses import replace

        return replace(self, T=T if isinstance(T, Scalar) else Scalar(str(T)))
