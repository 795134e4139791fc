"""JSON problem files.

::

    {"n": 1, "orders": ["1/2"], "T": "1",
     "couplings": [["-1"]], "forcings": ["1"], "initial": [["10"]]}

``forcings`` may be replaced by ``"manufactured": {"exact": [...]}``.
Optional keys: ``name`` and ``q`` (a grid denominator override).
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from ..expr import ExprValidationError, ParseError, parse, to_text
from ..problem import ProblemSpec, ProblemValidationError, Scalar

__all__ = ["dump_problem", "load_problem", "parse_problem"]

_REQUIRED = ("n", "orders", "T", "couplings", "initial")
_KNOWN = set(_REQUIRED) | {"forcings", "manufactured", "name", "q"}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _string_list(doc, key, n, text):
    val = doc[key]
    if not isinstance(val, list) or len(val) != n or not all(isinstance(x, str) for x in val):
        raise ProblemValidationError(key, f"expected a list of {n} strings", _line_of(text, key))
    return val


def _exprs(strings, key, text):
    out = []
    for k, s in enumerate(strings):
        try:
            out.append(parse(s))
        except (ParseError, ExprValidationError) as exc:
            raise ProblemValidationError(f"{key}[{k}]", str(exc), _line_of(text, key)) from None
    return tuple(out)


def parse_problem(text: str, source: str = "<string>") -> ProblemSpec:
    """Validate a JSON document and build the problem it describes."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemValidationError("json", f"{source}: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(doc, dict):
        raise ProblemValidationError("json", "top level must be an object", 1)
    for key in _REQUIRED:
        if key not in doc:
            raise ProblemValidationError(key, "missing required field")
    unknown = sorted(set(doc) - _KNOWN)
    if unknown:
        raise ProblemValidationError(unknown[0], "unknown field", _line_of(text, unknown[0]))
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemValidationError("n", "must be a positive integer", _line_of(text, "n"))

    orders = _string_list(doc, "orders", n, text)
    for k, o in enumerate(orders):
        if not re.fullmatch(r"\s*\d+\s*(/\s*\d+\s*)?", o):
            raise ProblemValidationError(f"orders[{k}]", f"{o!r} is not a rational g/q", _line_of(text, "orders"))
    orders = tuple(o.replace(" ", "") for o in orders)

    coup = doc["couplings"]
    if (not isinstance(coup, list) or len(coup) != n
            or any(not isinstance(row, list) or len(row) != n for row in coup)):
        raise ProblemValidationError("couplings", f"expected a {n}x{n} grid of strings", _line_of(text, "couplings"))
    if any(not isinstance(x, str) for row in coup for x in row):
        raise ProblemValidationError("couplings", "entries must be strings", _line_of(text, "couplings"))
    couplings = tuple(_exprs(row, "couplings", text) for row in coup)

    has_f, has_m = "forcings" in doc, "manufactured" in doc
    if has_f == has_m:
        raise ProblemValidationError("forcings", "give exactly one of forcings or manufactured",
                                     _line_of(text, "forcings") or _line_of(text, "manufactured"))
    forcings = exact = None
    if has_f:
        forcings = _exprs(_string_list(doc, "forcings", n, text), "forcings", text)
    else:
        man = doc["manufactured"]
        if not isinstance(man, dict) or set(man) != {"exact"}:
            raise ProblemValidationError("manufactured", 'expected {"exact": [...]}', _line_of(text, "manufactured"))
        exact = _exprs(_string_list(man, "exact", n, text), "manufactured.exact", text)

    init = doc["initial"]
    if (not isinstance(init, list) or len(init) != n
            or any(not isinstance(row, list) for row in init)
            or any(not isinstance(v, (str, int, float)) or isinstance(v, bool) for row in init for v in row)):
        raise ProblemValidationError("initial", f"expected {n} lists of complex strings", _line_of(text, "initial"))
    initial = tuple(tuple(str(v) for v in row) for row in init)

    T = doc["T"]
    if not isinstance(T, (str, int, float)) or isinstance(T, bool):
        raise ProblemValidationError("T", "expected a string", _line_of(text, "T"))
    try:
        T = Scalar(str(T))
    except ValueError as exc:
        raise ProblemValidationError("T", str(exc), _line_of(text, "T")) from None

    q = doc.get("q")
    if q is not None and (not isinstance(q, int) or q < 2):
        raise ProblemValidationError("q", "must be an integer >= 2", _line_of(text, "q"))
    name = doc.get("name", "")
    try:
        spec = ProblemSpec(orders, couplings, initial, T, forcings=forcings, exact=exact,
                           name=str(name), q_override=q)
        spec.grid  # noqa: B018  (validates q)
    except ProblemValidationError as exc:
        if exc.line is None:
            raise ProblemValidationError(exc.field, str(exc).split(": ", 1)[1], _line_of(text, exc.field)) from None
        raise
    except ValueError as exc:
        raise ProblemValidationError("initial", str(exc), _line_of(text, "initial")) from None
    return spec


def load_problem(path) -> ProblemSpec:
    p = Path(path)
    return parse_problem(p.read_text(encoding="utf-8"), str(p))


def dump_problem(spec: ProblemSpec) -> str:
    """Inverse of :func:`parse_problem`."""
    doc = {
        "n": spec.n,
        "orders": [str(o) for o in spec.orders],
        "T": spec.T.text,
        "couplings": [[to_text(e) for e in row] for row in spec.couplings],
    }
    if spec.manufactured:
        doc["manufactured"] = {"exact": [to_text(e) for e in spec.exact]}
    else:
        doc["forcings"] = [to_text(e) for e in spec.forcings]
    doc["initial"] = [[str(v) for v in row] for row in spec.initial]
    if spec.name:
        doc["name"] = spec.name
    if spec.q_override is not None:
        doc["q"] = spec.q_override
    return json.dumps(doc, indent=2, ensure_ascii=False)
