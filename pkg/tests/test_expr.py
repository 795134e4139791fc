from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from muntz_galerkin.expr import (
    MAX_DEPTH,
    ExprValidationError,
    ParseError,
    evaluate,
    expand,
    exponents,
    is_constant,
    min_grid,
    monomial_form,
    parse,
    to_text,
)
from muntz_galerkin.muntz import GridMismatchError, MuntzGrid
from muntz_galerkin.numeric import working

BITS = 200


def near(a, b, p=16):
    with working(BITS):
        return abs(mpc(a) - mpc(b)) <= mpfr(2) ** (p - BITS) * max(1, abs(mpc(b)))


def test_parse_examples():
    parse("sin(2*t^(1/2))")
    parse("t^(5/2)")
    with pytest.raises(ExprValidationError) as ei:
        parse("sin(t + 1)")
    assert ei.value.atom == "sin"
    parse("sin(t + 1)", validate=False)
    parse("0.5*besselj(0; t^(5/4)) + exp(i*80*t^(1/2))")


@pytest.mark.parametrize("src, offset", [
    ("", 0), ("t +", 3), ("sin t", 4), ("t^2", 2), ("t^(1/0)", 5), ("2 3", 2), ("foo(t)", 0),
    ("besselj(1/2; t)", 9), ("(t", 2), ("t)", 1), ("#", 0),
])
def test_parse_errors(src, offset):
    with pytest.raises(ParseError) as ei:
        parse(src)
    assert ei.value.offset == offset
    assert 0 <= ei.value.offset <= len(src)
    assert ei.value.expected and ei.value.found


def test_validation_rules():
    for bad in ("t^(-1/2)", "(1+t)^(1/2)", "exp(t*t + t)", "besselj(0; sin(t))"):
        with pytest.raises(ExprValidationError):
            parse(bad)
    parse("(1+t)^(3)")
    parse("exp(-2*i*t^(1/3))")


def test_depth_limit():
    parse("(" * (MAX_DEPTH - 1) + "t" + ")" * (MAX_DEPTH - 1))
    with pytest.raises(ParseError):
        parse("(" * (MAX_DEPTH + 5) + "t" + ")" * (MAX_DEPTH + 5))
    with pytest.raises(ParseError):
        parse("-" * 500 + "t")


def test_eval_examples():
    assert evaluate(parse("t^(5/2)"), 4, BITS) == 32
    assert evaluate(parse("besselj(0; t^(5/4))"), 0, BITS) == 1
    assert evaluate(parse("exp(i*80*t^(1/2))"), 0, BITS) == 1
    with working(BITS):
        assert near(evaluate(parse("exp(i*t)"), 1, BITS), mpc(gmpy2.cos(mpfr(1)), gmpy2.sin(mpfr(1))))
        assert near(evaluate(parse("besselj(-1; t)"), 2, BITS), -evaluate(parse("besselj(1; t)"), 2, BITS))
        assert near(evaluate(parse("2 - 3*t + (1+t)^(2)"), "0.5", BITS), mpfr("2.75"))
    with pytest.raises(ValueError):
        evaluate(parse("t"), -1, BITS)


def test_literal_precision():
    # decimal literals round once at the working precision
    with working(BITS):
        assert evaluate(parse("0.1"), 0, BITS) == mpc(mpfr("0.1"))


def test_expand_examples():
    s = expand(parse("exp(i*t^(1/2))"), MuntzGrid(2), 2, BITS)
    assert s.coeffs == (1, mpc(0, 1), mpc(-0.5))
    assert expand(parse("3"), MuntzGrid(2), 0, BITS).coeffs == (3,)
    s = expand(parse("sin(2*t^(1/2))"), MuntzGrid(2), 3, BITS)
    with working(BITS):
        assert s.coeffs[:3] == (0, 2, 0) and near(s.coeffs[3], mpfr(-4) / 3)
    with pytest.raises(GridMismatchError):
        expand(parse("t^(1/3)"), MuntzGrid(2), 4, BITS)
    with pytest.raises(ValueError):
        expand(parse("t"), MuntzGrid(2), -1, BITS)


def test_structure_helpers():
    e = parse("2*t^(1/2)*t")
    assert monomial_form(e)[1] == Fraction(3, 2)
    assert monomial_form(parse("t + 1")) is None
    assert is_constant(parse("exp(i*2)")) and not is_constant(parse("sin(t)"))
    assert exponents(parse("sin(t^(1/4)) + t^(2/3)")) == {Fraction(1, 4), Fraction(2, 3)}
    assert min_grid(parse("sin(t^(1/4)) + t^(2/3)")) == 12
    assert min_grid(parse("5")) == 1


@pytest.mark.parametrize("src, q", [
    ("sin(2*t^(1/2))", 2),
    ("0.5*besselj(0; t^(5/4))", 4),
    ("t^(1/2)*exp(i*80*t^(1/2))", 2),
    ("cos(3*t^(2/3)) - t^(1/3)*besselj(2; 2*t^(1/3))", 3),
    ("(1 + t^(1/4))^(3)*exp(-t)", 4),
])
def test_eval_expand_consistency(src, q):
    e = parse(src)
    grid = MuntzGrid(q)
    M = 12
    s = expand(e, grid, M, BITS)
    scaled = []
    for t in ("1e-2", "1e-3", "1e-4"):
        with working(BITS):
            tv = mpfr(t)
            err = abs(evaluate(e, tv, BITS) - s.evaluate(tv))
            scaled.append(err / tv ** (mpfr(M + 1) / q))
    # C is bounded and does not grow as t -> 0
    assert all(b <= 2 * a + mpfr(2) ** (40 - BITS) for a, b in zip(scaled, scaled[1:])), scaled


# printing

ints = st.integers(0, 99).map(str)
rats = st.tuples(st.integers(0, 9), st.integers(1, 6)).map(lambda p: f"{p[0]}/{p[1]}")
decimals = st.sampled_from(["0.5", "1e-3", "2.25E+2", ".75", "3."])


def exprs():
    leaf = st.one_of(ints, decimals, st.just("i"), st.just("t"), rats.map(lambda r: f"t^({r})"))
    mono = st.tuples(st.one_of(ints, st.just("i"), decimals), rats).map(lambda p: f"{p[0]}*t^({p[1]})")

    def extend(inner):
        return st.one_of(
            st.tuples(inner, st.sampled_from(["+", "-", "*"]), inner).map(lambda p: f"{p[0]} {p[1]} {p[2]}"),
            inner.map(lambda x: f"({x})"),
            inner.map(lambda x: f"-{x}"),
            st.tuples(inner, st.integers(0, 3)).map(lambda p: f"({p[0]})^({p[1]})"),
            st.tuples(st.sampled_from(["sin", "cos", "exp"]), mono).map(lambda p: f"{p[0]}({p[1]})"),
            st.tuples(st.integers(-3, 3), mono).map(lambda p: f"besselj({p[0]}; {p[1]})"),
        )

    return st.recursive(leaf, extend, max_leaves=12)


@given(exprs())
def test_print_parse_identity(src):
    e = parse(src)
    assert parse(to_text(e)) == e
    assert to_text(parse(to_text(e))) == to_text(e)


@given(exprs(), st.fractions(0, 1, max_denominator=50))
def test_print_preserves_value(src, t):
    e = parse(src)
    tv = gmpy2.mpq(t.numerator, t.denominator)
    a = evaluate(e, tv, BITS)
    b = evaluate(parse(to_text(e)), tv, BITS)
    assert a == b or (gmpy2.is_nan(a.real) and gmpy2.is_nan(b.real))


alphabet = st.sampled_from(list("t()+-*^/;ie.0123456789 ") + ["sin", "cos", "exp", "besselj", "x", "\n"])


@settings(max_examples=200)
@given(st.lists(alphabet, max_size=400).map("".join))
def test_parser_totality(src):
    try:
        parse(src)
    except (ParseError, ExprValidationError):
        pass


@settings(max_examples=20)
@given(st.text(max_size=10_000))
def test_parser_totality_long_text(src):
    try:
        parse(src)
    except (ParseError, ExprValidationError) as exc:
        if isinstance(exc, ParseError):
            assert 0 <= exc.offset <= len(src)


def test_parser_long_inputs():
    parse(" + ".join(["t^(1/2)"] * 2000))
    with pytest.raises(ParseError):
        parse("(" * 10_000)
