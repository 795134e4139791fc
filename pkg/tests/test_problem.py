import json

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from muntz_galerkin.harness.problem_file import dump_problem, load_problem, parse_problem
from muntz_galerkin.numeric import working
from muntz_galerkin.problem import ProblemSpec, ProblemValidationError, Scalar, parse_complex

BASE = {"n": 1, "orders": ["1/2"], "T": "1", "couplings": [["-1"]], "forcings": ["1"], "initial": [["10"]]}


def doc(**changes):
    d = dict(BASE)
    d.update(changes)
    return json.dumps(d, indent=1)


def test_scalar():
    assert Scalar("1/2").as_fraction() == gmpy2.mpq(1, 2)
    assert Scalar("3*pi/2").as_fraction() is None
    with working(128):
        assert Scalar("3*pi/2").value(128) == 3 * gmpy2.const_pi() / 2
    for bad in ("", "pi pi", "*2", "2/", "x"):
        with pytest.raises(ValueError):
            Scalar(bad)
    assert float(Scalar("0.25")) == 0.25


@pytest.mark.parametrize("text, value", [
    ("1", mpc(1)), ("-2.5", mpc(-2.5)), ("1+2i", mpc(1, 2)), ("3-i", mpc(3, -1)),
    ("-i", mpc(0, -1)), ("2.5e-3i", ("0", "2.5e-3")), ("1e+2-1e-1i", ("100", "-0.1")),
])
def test_parse_complex(text, value):
    if isinstance(value, tuple):
        with working(64):
            value = mpc(mpfr(value[0]), mpfr(value[1]))
    assert parse_complex(text, 64) == value


def test_parse_complex_errors():
    for bad in ("", "1+", "1+2j", "abc", "1++2i"):
        with pytest.raises(ValueError):
            parse_complex(bad, 64)


def test_spec_validation():
    spec = ProblemSpec(("1/2", "3/2"), (("0", "1"), ("t", "0")), (("1",), ("0", "1")), "2",
                       forcings=("0", "sin(t^(1/3))"))
    assert spec.grid.q == 6
    assert spec.n == 2 and not spec.manufactured
    with pytest.raises(ProblemValidationError) as ei:
        ProblemSpec(("1",), (("0",),), (("1",),), "1", forcings=("0",))
    assert ei.value.field == "orders"
    with pytest.raises(ProblemValidationError):
        ProblemSpec(("1/2",), (("0",),), (("1", "2"),), "1", forcings=("0",))
    with pytest.raises(ProblemValidationError):
        ProblemSpec(("1/2",), (("0",),), (("1",),), "1", forcings=("0",), exact=("t",))
    with pytest.raises(ProblemValidationError):
        ProblemSpec(("1/2",), (("0", "0"),), (("1",),), "1", forcings=("0",))
    with pytest.raises(ProblemValidationError):
        ProblemSpec(("1/2",), (("0",),), (("1",),), "0", forcings=("0",))
    with pytest.raises(ProblemValidationError):
        ProblemSpec(("1/2",), (("0",),), (("1",),), "1", forcings=("0",), q_override=3).grid


def test_load_example():
    spec = parse_problem(doc(name="relax"))
    assert spec.name == "relax"
    assert spec.orders[0].value == gmpy2.mpq(1, 2)
    assert spec.initial_values(64) == ((mpc(10),),)


def test_manufactured_file():
    spec = parse_problem(doc(forcings=None, manufactured={"exact": ["t^(3/2)"]}).replace('"forcings": null,', ""))
    assert spec.manufactured


def line_of(text, key):
    return text[: text.index(f'"{key}"')].count("\n") + 1


@pytest.mark.parametrize("text, field, key", [
    (doc().replace('"T": "1",', ""), "T", None),
    (doc(extra=1), "extra", "extra"),
    (doc(n=0), "n", "n"),
    (doc(orders=["1/2", "1/3"]), "orders", "orders"),
    (doc(orders=["0.5"]), "orders[0]", "orders"),
    (doc(orders=["2"]), "orders", "orders"),
    (doc(couplings=[["-1", "2"]]), "couplings", "couplings"),
    (doc(couplings=[["sin(t+1)"]]), "couplings[0]", "couplings"),
    (doc(forcings=["t^(1"]), "forcings[0]", "forcings"),
    (doc(initial=[["1", "2"]]), "initial", "initial"),
    (doc(initial=[["1+"]]), "initial", "initial"),
    (doc(T="-"), "T", "T"),
    (doc(q=3), "q", "q"),
    (doc(manufactured={"exact": ["t"]}), "forcings", "forcings"),
])
def test_file_errors(text, field, key):
    with pytest.raises(ProblemValidationError) as ei:
        parse_problem(text)
    assert ei.value.field == field
    assert ei.value.line == (None if key is None else line_of(text, key))
    if key is not None:
        assert f"line {ei.value.line}" in str(ei.value)


def test_json_errors():
    with pytest.raises(ProblemValidationError) as ei:
        parse_problem('{"n": 1,\n "orders": ["1/2"]')
    assert (ei.value.field, ei.value.line) == ("json", 2)
    with pytest.raises(ProblemValidationError) as ei:
        parse_problem("[1]")
    assert (ei.value.field, ei.value.line) == ("json", 1)


def test_dump_round_trip(tmp_path):
    spec = parse_problem(doc(name="x", q=4, couplings=[["-1 + 0.5*besselj(0; t^(1/2))"]],
                             initial=[["1-2i"]], T="3*pi/2"))
    again = parse_problem(dump_problem(spec))
    assert again == spec
    p = tmp_path / "p.json"
    p.write_text(dump_problem(spec))
    assert load_problem(p) == spec


@given(st.sampled_from(["1/2", "1/3", "2/3", "5/4", "7/2"]), st.integers(1, 12))
def test_grid_is_lcm(order, k):
    spec = ProblemSpec((order,), ((f"t^(1/{k})",),), (("0",) * -(-int(order[0]) // int(order[-1])),),
                       "1", forcings=("0",))
    from fractions import Fraction
    o = Fraction(order)
    q = spec.grid.q
    assert q % o.denominator == 0 and q % k == 0
    assert all(q % d for d in range(1, q) if d % o.denominator == 0 and d % k == 0) or q == 1
