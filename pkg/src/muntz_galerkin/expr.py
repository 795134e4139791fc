"""Expression language for coefficients, forcing terms and exact solutions.

Grammar (whitespace is insignificant)::

    expr    := term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := '-' factor | primary ('^' '(' rational ')')*
    primary := number | 'i' | 't' | '(' expr ')'
             | ('sin' | 'cos' | 'exp') '(' expr ')'
             | 'besselj' '(' integer ';' expr ')'
    rational := ['-'] int ['/' int]

Atoms only accept monomial arguments ``a * t^nu`` so every expression has a
Müntz expansion. Powers of ``t`` take rational exponents >= 0; any other base
takes a non-negative integer exponent.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr

from .muntz import GridMismatchError, MuntzGrid, MuntzSeries
from .numeric import PrecisionLike, bessel_j, bits_of, to_complex, to_real, working

__all__ = [
    "Bessel",
    "Call",
    "Expr",
    "ExprValidationError",
    "Imag",
    "Neg",
    "Num",
    "ParseError",
    "Pow",
    "Product",
    "Sum",
    "Var",
    "evaluate",
    "expand",
    "is_constant",
    "monomial_form",
    "parse",
    "to_text",
]

MAX_DEPTH = 64


# {{{ AST


@dataclass(frozen=True)
class Num:
    text: str

    @classmethod
    def from_value(cls, x, digits: int | None = None) -> Num:
        """Literal for a real value; ``digits`` defaults to the value's precision."""
        if isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1:
            if x < 0:
                raise ValueError("literals are unsigned; wrap negatives in Neg")
            return cls(str(int(x)))
        x = mpfr(x) if not isinstance(x, mpfr) else x
        if x < 0:
            raise ValueError("literals are unsigned; wrap negatives in Neg")
        if digits is None:
            digits = int(x.precision * math.log10(2)) + 2
        s = gmpy2.digits(x, 10, digits)
        mant, exp = s[0], s[1]
        if mant in ("0", ""):
            return cls("0")
        return cls(f"0.{mant}e{exp}")


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: Fraction


@dataclass(frozen=True)
class Call:
    name: str
    arg: Expr


@dataclass(frozen=True)
class Bessel:
    order: int
    arg: Expr


@dataclass(frozen=True)
class Neg:
    operand: Expr


@dataclass(frozen=True)
class Sum:
    """``terms[0] ± terms[1] ± ...``; ``signs[k]`` is +1 or -1 and signs[0] == 1."""

    terms: tuple
    signs: tuple


@dataclass(frozen=True)
class Product:
    factors: tuple


Expr = Union[Num, Imag, Var, Pow, Call, Bessel, Neg, Sum, Product]

ATOMS = ("sin", "cos", "exp")

# }}}


# {{{ parser


class ParseError(ValueError):
    def __init__(self, offset: int, expected: str, found: str) -> None:
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {offset}: expected {expected}, found {found}")


class ExprValidationError(ValueError):
    def __init__(self, message: str, atom: str | None = None) -> None:
        self.atom = atom
        super().__init__(message)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<op>[-+*/^();])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(src: str) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(pos, "a token", repr(src[pos]))
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str) -> None:
        self.toks = _tokenize(src)
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _found(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind not in ("op", "name"):
            raise ParseError(self.tok.offset, repr(text), self._found())
        t = self.tok
        self.i += 1
        return t

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError(self.tok.offset, f"nesting depth <= {MAX_DEPTH}", "deeper nesting")

    def expr(self):
        self._enter()
        terms, signs = [self.term()], [1]
        while self.tok.kind == "op" and self.tok.text in "+-":
            signs.append(1 if self.tok.text == "+" else -1)
            self.i += 1
            terms.append(self.term())
        self.depth -= 1
        return terms[0] if len(terms) == 1 else Sum(tuple(terms), tuple(signs))

    def term(self):
        factors = [self.factor()]
        while self.tok.kind == "op" and self.tok.text == "*":
            self.i += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            self._enter()
            node = Neg(self.factor())
            self.depth -= 1
            return node
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            self.expect("(")
            r = self.rational()
            self.expect(")")
            # (b^r1)^r2 is stored as b^(r1 r2) so chains never nest
            node = Pow(node.base, node.exponent * r) if isinstance(node, Pow) else Pow(node, r)
        return node

    def integer(self, signed: bool = True) -> int:
        neg = False
        if signed and self.tok.kind == "op" and self.tok.text == "-":
            neg = True
            self.i += 1
        if self.tok.kind != "num" or not self.tok.text.isdigit():
            raise ParseError(self.tok.offset, "an integer", self._found())
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    def rational(self) -> Fraction:
        num = self.integer()
        if self.tok.kind == "op" and self.tok.text == "/":
            self.i += 1
            off = self.tok.offset
            den = self.integer(signed=False)
            if den == 0:
                raise ParseError(off, "a nonzero denominator", "0")
            return Fraction(num, den)
        return Fraction(num)

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            if tok.text == "i":
                self.i += 1
                return Imag()
            if tok.text == "t":
                self.i += 1
                return Var()
            if tok.text in ATOMS:
                self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text == "besselj":
                self.i += 1
                self.expect("(")
                order = self.integer()
                self.expect(";")
                arg = self.expr()
                self.expect(")")
                return Bessel(order, arg)
            raise ParseError(tok.offset, "a number, 'i', 't', '(' or a function name", repr(tok.text))
        raise ParseError(tok.offset, "a number, 'i', 't', '(' or a function name", self._found())


def parse(src: str, validate: bool = True) -> Expr:
    """Parse ``src``; by default also apply :func:`validate`."""
    p = _Parser(src)
    node = p.expr()
    if p.tok.kind != "end":
        raise ParseError(p.tok.offset, "an operator or end of input", p._found())
    if validate:
        validate_expr(node)
    return node


# }}}


# {{{ structure


def _children(e) -> tuple:
    if isinstance(e, (Pow,)):
        return (e.base,)
    if isinstance(e, (Call, Bessel)):
        return (e.arg,)
    if isinstance(e, Neg):
        return (e.operand,)
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    return ()


def is_constant(e) -> bool:
    """True when ``t`` does not occur in ``e``."""
    if isinstance(e, Var):
        return False
    return all(is_constant(c) for c in _children(e))


_ONE = Num("1")


def monomial_form(e):
    """``(coefficient, nu)`` with ``e == coefficient * t**nu``, or None."""
    if is_constant(e):
        return e, Fraction(0)
    if isinstance(e, Var):
        return _ONE, Fraction(1)
    if isinstance(e, Pow):
        if isinstance(e.base, Var):
            return _ONE, e.exponent
        inner = monomial_form(e.base)
        if inner is None or e.exponent.denominator != 1:
            return None
        return Pow(inner[0], e.exponent), inner[1] * e.exponent
    if isinstance(e, Neg):
        inner = monomial_form(e.operand)
        return None if inner is None else (Neg(inner[0]), inner[1])
    if isinstance(e, Product):
        coefs, nu = [], Fraction(0)
        for f in e.factors:
            m = monomial_form(f)
            if m is None:
                return None
            coefs.append(m[0])
            nu += m[1]
        return (coefs[0] if len(coefs) == 1 else Product(tuple(coefs))), nu
    return None


def validate_expr(e) -> None:
    """Enforce the exponent rules and the monomial-argument restriction."""
    if isinstance(e, Pow):
        r = e.exponent
        if isinstance(e.base, Var):
            if r < 0:
                raise ExprValidationError(f"negative power t^({r}) is not allowed")
        elif r.denominator != 1 or r < 0:
            raise ExprValidationError(
                f"power ^({r}) of a non-t base needs a non-negative integer exponent"
            )
    if isinstance(e, (Call, Bessel)):
        name = e.name if isinstance(e, Call) else "besselj"
        if monomial_form(e.arg) is None:
            raise ExprValidationError(
                f"argument of {name} must be a monomial a*t^(p/q), got {to_text(e.arg)}", name
            )
    for c in _children(e):
        validate_expr(c)


def exponents(e) -> set:
    """Every power of ``t`` that can appear in the expansion's generators."""
    out = set()
    if isinstance(e, Var):
        out.add(Fraction(1))
    if isinstance(e, Pow) and isinstance(e.base, Var):
        out.add(e.exponent)
        return out
    if isinstance(e, (Call, Bessel)):
        m = monomial_form(e.arg)
        if m is not None and m[1] != 0:
            out.add(m[1])
        return out
    for c in _children(e):
        out |= exponents(c)
    return out


def min_grid(e) -> int:
    """Smallest grid denominator on which ``e`` expands."""
    return math.lcm(1, *(r.denominator for r in exponents(e)))


# }}}


# {{{ printing


def _rat(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def to_text(e) -> str:
    """Canonical text; ``parse(to_text(e)) == e`` structurally."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Pow):
        b = to_text(e.base)
        if not isinstance(e.base, (Num, Imag, Var, Call, Bessel)):
            b = f"({b})"
        return f"{b}^({_rat(e.exponent)})"
    if isinstance(e, Call):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Bessel):
        return f"besselj({e.order}; {to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if isinstance(e.operand, (Sum, Product)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Sum):
        parts = []
        for k, (s, term) in enumerate(zip(e.signs, e.terms)):
            txt = to_text(term)
            if isinstance(term, Sum):
                txt = f"({txt})"
            parts.append(txt if k == 0 else f" {'+' if s > 0 else '-'} {txt}")
        return "".join(parts)
    if isinstance(e, Product):
        return "*".join(
            f"({to_text(f)})" if isinstance(f, (Sum, Product)) else to_text(f) for f in e.factors
        )
    raise TypeError(f"not an expression node: {e!r}")


# }}}


# {{{ evaluation


def _real_pow(t: mpfr, r: Fraction) -> mpfr:
    if r == 0:
        return mpfr(1)
    if t == 0:
        return mpfr(0)
    if r.denominator == 1:
        return t ** int(r)
    return gmpy2.root(t, r.denominator) ** r.numerator if r.numerator > 0 else t ** to_real(r)


def _eval(e, t: mpfr, bits: int):
    if isinstance(e, Num):
        return mpc(mpfr(e.text))
    if isinstance(e, Imag):
        return mpc(0, 1)
    if isinstance(e, Var):
        return mpc(t)
    if isinstance(e, Pow):
        if isinstance(e.base, Var):
            return mpc(_real_pow(t, e.exponent))
        return _eval(e.base, t, bits) ** int(e.exponent)
    if isinstance(e, Call):
        z = _eval(e.arg, t, bits)
        return {"sin": gmpy2.sin, "cos": gmpy2.cos, "exp": gmpy2.exp}[e.name](z)
    if isinstance(e, Bessel):
        z = _eval(e.arg, t, bits)
        n = abs(e.order)
        v = bessel_j(n, z, bits)
        return -v if (e.order < 0 and n % 2) else v
    if isinstance(e, Neg):
        return -_eval(e.operand, t, bits)
    if isinstance(e, Sum):
        acc = mpc(0)
        for s, term in zip(e.signs, e.terms):
            v = _eval(term, t, bits)
            acc = acc + v if s > 0 else acc - v
        return acc
    if isinstance(e, Product):
        acc = mpc(1)
        for f in e.factors:
            acc *= _eval(f, t, bits)
        return acc
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e, t, prec: PrecisionLike) -> mpc:
    """Value of ``e`` at ``t >= 0``."""
    bits = bits_of(prec)
    with working(bits, 16):
        tv = to_real(t)
        if tv < 0:
            raise ValueError("expressions are evaluated for t >= 0 only")
        v = _eval(e, tv, bits + 16)
    with working(bits):
        return +v


# }}}


# {{{ Müntz expansion


def _atom_taylor(name: str, order: int, n_max: int, bits: int) -> list:
    """Taylor coefficients ``c_n`` of the atom in its argument ``x``, n <= n_max."""
    c = [mpfr(0)] * (n_max + 1)
    with working(bits):
        if name == "exp":
            f = mpfr(1)
            for n in range(n_max + 1):
                c[n] = f
                f /= n + 1
        elif name in ("sin", "cos"):
            start = 1 if name == "sin" else 0
            f = mpfr(1) / gmpy2.fac(start)
            for n in range(start, n_max + 1, 2):
                c[n] = f
                f = -f / ((n + 1) * (n + 2))
        else:
            # J_k(x) = sum_m (-1)^m (x/2)^(2m+k) / (m! (m+k)!)
            k = order
            f = mpfr(1) / (gmpy2.fac(k) * mpfr(2) ** k)
            m = 0
            while 2 * m + k <= n_max:
                c[2 * m + k] = f
                f = -f / (4 * (m + 1) * (m + 1 + k))
                m += 1
    return c


def _expand(e, grid: MuntzGrid, M: int, bits: int) -> MuntzSeries:
    if is_constant(e):
        v = _eval(e, mpfr(0), bits)
        return MuntzSeries.constant(grid, v, M, bits)
    if isinstance(e, Var):
        return MuntzSeries.from_terms(grid, {grid.q: 1}, M, bits)
    if isinstance(e, Pow):
        if isinstance(e.base, Var):
            return MuntzSeries.from_terms(grid, {grid.index_of(e.exponent): 1}, M, bits)
        base = _expand(e.base, grid, M, bits)
        k = int(e.exponent)
        out = MuntzSeries.constant(grid, 1, M, bits)
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out
    if isinstance(e, (Call, Bessel)):
        coef, nu = monomial_form(e.arg)
        step = grid.index_of(nu)
        a = _eval(coef, mpfr(0), bits)
        n_max = M // step
        if isinstance(e, Call):
            tay = _atom_taylor(e.name, 0, n_max, bits)
            sign = 1
        else:
            tay = _atom_taylor("besselj", abs(e.order), n_max, bits)
            sign = -1 if (e.order < 0 and e.order % 2) else 1
        terms, p = {}, mpc(1)
        for n in range(n_max + 1):
            if tay[n] != 0:
                terms[n * step] = sign * tay[n] * p
            p *= a
        return MuntzSeries.from_terms(grid, terms, M, bits)
    if isinstance(e, Neg):
        return -_expand(e.operand, grid, M, bits)
    if isinstance(e, Sum):
        acc = None
        for s, term in zip(e.signs, e.terms):
            v = _expand(term, grid, M, bits)
            if s < 0:
                v = -v
            acc = v if acc is None else acc + v
        return acc
    if isinstance(e, Product):
        acc = None
        for f in e.factors:
            v = _expand(f, grid, M, bits)
            acc = v if acc is None else acc * v
        return acc
    raise TypeError(f"not an expression node: {e!r}")


def expand(e, grid: MuntzGrid, M: int, prec: PrecisionLike) -> MuntzSeries:
    """Müntz series of ``e`` in powers of ``t**(1/q)``, known to order ``M``."""
    if M < 0:
        raise ValueError("truncation order must be >= 0")
    bad = [r for r in exponents(e) if (r * grid.q).denominator != 1]
    if bad:
        raise GridMismatchError(
            f"exponent {bad[0]} is not a multiple of 1/{grid.q}; enlarge q to a multiple of {min_grid(e)}"
        )
    bits = bits_of(prec)
    with working(bits, 16):
        s = _expand(e, grid, M, bits + 16)
    return s.with_precision(bits)


# }}}
