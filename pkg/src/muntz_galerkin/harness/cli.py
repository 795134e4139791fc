"""Command line entry point: ``muntz-galerkin {solve,converge,fixture,oracle}``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import gmpy2
from gmpy2 import mpc

from ..galerkin import evaluate, solve
from ..numeric import Precision, to_real, working
from .convergence import RunConfig, converge, error_norm, resolve_problem, write_summary
from .fixtures import FIXTURES, build_fixture


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _point_list(text: str) -> tuple:
    out = []
    for x in text.split(","):
        x = x.strip()
        if not x:
            continue
        try:
            Fraction(x)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad evaluation point {x!r}") from None
        out.append(x)
    return tuple(out)


def _sci(x, digits: int) -> str:
    """``x`` in scientific notation with ``digits`` digits after the point."""
    if x == 0:
        return f"{0:.{digits}e}"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = gmpy2.digits(x, 10, digits + 1)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+03d}"


def _fmt_c(z: mpc, digits: int = 20) -> str:
    re_ = _sci(z.real, digits)
    if z.imag == 0:
        return re_
    return f"{re_} {'+' if z.imag >= 0 else '-'} {_sci(abs(z.imag), digits)}i"


def _fixture_params(ns) -> tuple:
    out = []
    for key in ("theta", "omega", "T"):
        val = getattr(ns, key, None)
        if val is not None:
            out.append((key, val))
    return tuple(out)


def _config(ns, problem: str, degrees) -> RunConfig:
    emit = frozenset(ns.emit.split(",")) if getattr(ns, "emit", None) else frozenset({"csv", "plotdata", "summary"})
    return RunConfig(
        problem=problem,
        degrees=degrees,
        bits=ns.bits,
        reference=ns.reference,
        output=ns.out,
        emit=emit,
        full_scale=getattr(ns, "full_scale", False),
        fixture_params=_fixture_params(ns),
        jobs=getattr(ns, "jobs", 1),
    )


def _print_records(records, out=None) -> int:
    out = out or sys.stdout
    print(f"{'N':>6} {'E(N)':>24} {'seconds':>10} {'bits':>6}", file=out)
    failed = 0
    for r in records:
        if r.ok:
            print(f"{r.N:>6} {float(r.error):>24.6e} {r.seconds:>10.3f} {r.bits:>6}", file=out)
        else:
            failed += 1
            print(f"{r.N:>6} FAILED: {r.failure}", file=out)
    return 1 if failed else 0


def _dump_points(sol, points, digits: int) -> None:
    for t in points:
        with working(sol.bits):
            tv = to_real(Fraction(t))
        vals = [_fmt_c(evaluate(sol, j, tv), digits) for j in range(len(sol.coeffs))]
        print(f"t={t}: " + "; ".join(f"v{j + 1}={v}" for j, v in enumerate(vals)))


def cmd_solve(ns) -> int:
    cfg = _config(ns, ns.problem, (ns.N,))
    try:
        spec, ref, title = resolve_problem(cfg)
    except ValueError:
        if ns.reference != "auto":
            raise
        spec, ref, title = resolve_problem_without_reference(cfg)
    bits = cfg.precision(ns.N)
    sol = solve(spec, ns.N, bits)
    print(title)
    print(f"N={ns.N} bits={bits} seconds={sol.seconds:.3f}")
    if ref is not None:
        print(f"E(N)={float(error_norm(sol, ref)):.6e}")
    if ns.points:
        _dump_points(sol, ns.points, ns.digits)
    return 0


def resolve_problem_without_reference(cfg: RunConfig):
    from .problem_file import load_problem

    spec = load_problem(cfg.problem)
    return spec, None, spec.name or cfg.problem


def cmd_converge(ns) -> int:
    cfg = _config(ns, ns.problem, ns.degrees)
    records = converge(cfg, progress=None)
    return _print_records(records)


def cmd_fixture(ns) -> int:
    fx = build_fixture(ns.name, ns.full_scale, **dict(_fixture_params(ns)))
    degrees = ns.degrees or fx.degrees
    cfg = _config(ns, ns.name, degrees)
    print(f"{fx.name}: {fx.description}")
    records = converge(cfg)
    status = _print_records(records)
    if ns.points:
        N = degrees[-1]
        sol = solve(fx.spec, N, cfg.precision(N))
        _dump_points(sol, ns.points, ns.digits)
    return status


def cmd_oracle(ns) -> int:
    from ..series_oracle import series_problem_from_spec, series_solve

    cfg = _config(ns, ns.problem, (1,))
    try:
        spec, _, title = resolve_problem(cfg)
    except ValueError:
        spec, _, title = resolve_problem_without_reference(cfg)
    bits = ns.bits or Precision.for_degree(ns.M).bits
    sp = series_problem_from_spec(spec, ns.M, bits)
    sol = series_solve(sp, ns.M, bits, spec.horizon(bits))
    q = spec.grid.q
    print(f"{title}  (grid 1/{q}, M={ns.M}, bits={bits}, terms decrease for t <= {float(sol.radius_hint):.4g})")
    for j, s in enumerate(sol.series):
        print(f"v{j + 1}:")
        shown = 0
        for mu, c in enumerate(s.coeffs):
            if c == 0:
                continue
            print(f"  t^({Fraction(mu, q)}): {_fmt_c(c, ns.digits)}")
            shown += 1
            if shown >= ns.terms:
                break
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="muntz-galerkin", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problem=True):
        if problem:
            sp.add_argument("problem", help="problem file (JSON) or fixture name")
        sp.add_argument("--bits", type=int, default=None, help="working precision (default: policy in N)")
        sp.add_argument("--reference", choices=("auto", "exact", "series"), default="auto")
        sp.add_argument("--full-scale", action="store_true", help="original fixture parameters")
        sp.add_argument("--theta", default=None, help="exm5 order")
        sp.add_argument("--omega", type=int, default=None, help="exm1 frequency")
        sp.add_argument("--T", default=None, help="exm6/exm7 horizon")
        sp.add_argument("--digits", type=int, default=20, help="digits in printed values")

    s = sub.add_parser("solve", help="solve at one degree")
    common(s)
    s.add_argument("-N", "--N", type=int, required=True)
    s.add_argument("--points", type=_point_list, default=(), help="t1,t2,... to evaluate")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("converge", help="sweep over degrees")
    common(c)
    c.add_argument("--degrees", type=_int_list, required=True)
    c.add_argument("--out", default=None, help="directory for records.csv, plot.dat, summary.txt")
    c.add_argument("--emit", default=None, help="subset of csv,plotdata,summary")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_converge)

    f = sub.add_parser("fixture", help="run a bundled benchmark")
    f.add_argument("name", choices=sorted(FIXTURES))
    common(f, problem=False)
    f.add_argument("--degrees", type=_int_list, default=None)
    f.add_argument("--out", default=None)
    f.add_argument("--emit", default=None)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--points", type=_point_list, default=())
    f.set_defaults(func=cmd_fixture)

    o = sub.add_parser("oracle", help="local series solution")
    common(o)
    o.add_argument("-M", "--M", type=int, default=32, help="series order")
    o.add_argument("--terms", type=int, default=8, help="nonzero terms shown per component")
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


__all__ = ["build_parser", "main", "write_summary"]
