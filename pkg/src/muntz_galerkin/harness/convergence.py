"""Error norm, convergence sweeps and their output files."""

from __future__ import annotations

import csv
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import gmpy2
from gmpy2 import mpfr

from ..galerkin import GalerkinSolution, evaluate, solve
from ..numeric import Precision, PrecisionLike, bits_of, to_real, working
from ..orthopoly import JacobiParams, gauss_rule
from ..problem import ProblemSpec
from .fixtures import ExprReference, Fixture, build_fixture

__all__ = [
    "ConvergenceRecord",
    "RunConfig",
    "converge",
    "error_norm",
    "read_records",
    "resolve_problem",
    "write_outputs",
    "write_plot",
    "write_records",
    "write_summary",
]


def error_norm(sol: GalerkinSolution, reference, n_quad: int | None = None,
               prec: PrecisionLike | None = None) -> mpfr:
    """``max_j sqrt((T/2) sum_k |e_j(t_k)|^2 w_k)`` on ``n_quad + 1`` Legendre points.

    ``reference(j, t, bits)`` returns the exact solution; nodes are mapped by
    ``t = (T/2)(x + 1)``. ``n_quad`` defaults to the solution degree.
    """
    bits = bits_of(prec if prec is not None else sol.bits)
    n_quad = sol.N if n_quad is None else n_quad
    rule = gauss_rule(JacobiParams(0, 0), n_quad + 1, bits, "[-1,1]")
    with working(bits):
        T = +sol.T
        ts = [T / 2 * (x + 1) for x in rule.nodes]
    worst = mpfr(0)
    for j in range(len(sol.coeffs)):
        with working(bits):
            acc = mpfr(0)
            for t, w in zip(ts, rule.weights):
                e = evaluate(sol, j, t) - reference(j, t, bits)
                acc += gmpy2.norm(e) * w
            val = gmpy2.sqrt(acc * T / 2)
            worst = max(worst, val)
    return worst


# {{{ records


@dataclass(frozen=True)
class ConvergenceRecord:
    """One row of a sweep. ``error`` is kept at 53 bits so text round-trips exactly."""

    N: int
    error: mpfr
    seconds: float
    bits: int
    error_fine: mpfr | None = field(default=None, compare=False)
    failure: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not gmpy2.is_nan(self.error) and self.error < 0:
            raise ValueError("E(N) must be non-negative")

    @property
    def ok(self) -> bool:
        return self.failure is None


def _e53(x) -> mpfr:
    return mpfr(x, 53)


def _fmt(x: mpfr) -> str:
    if gmpy2.is_nan(x):
        return "nan"
    if x == 0:
        return "0"
    return repr(float(x))


CSV_HEADER = ("N", "error", "seconds", "bits")


def write_records(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.N, _fmt(r.error), repr(r.seconds), r.bits])


def read_records(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: missing header {','.join(CSV_HEADER)}")
    return [ConvergenceRecord(int(a), mpfr(b, 53), float(c), int(d)) for a, b, c, d in rows[1:]]


def write_plot(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            if not r.ok or gmpy2.is_nan(r.error):
                continue
            lg = "-inf" if r.error == 0 else f"{float(gmpy2.log10(r.error)):.6f}"
            fh.write(f"{r.N} {lg}\n")


def _discrepancy(r: ConvergenceRecord) -> bool:
    if r.error_fine is None or not r.ok:
        return False
    a, b = r.error, r.error_fine
    big = max(a, b)
    return big > 0 and abs(a - b) / big > 0.1


def write_summary(records, path, title: str = "", notes=()) -> None:
    lines = [title or "convergence run", ""]
    lines += list(notes)
    lines.append(f"{'N':>6} {'E(N)':>24} {'E(N), 4(N+1) pts':>24} {'seconds':>10} {'bits':>6}")
    for r in records:
        if not r.ok:
            lines.append(f"{r.N:>6} FAILED: {r.failure}")
            continue
        fine = _fmt(_e53(r.error_fine)) if r.error_fine is not None else "-"
        flag = "  <- >10% quadrature discrepancy" if _discrepancy(r) else ""
        lines.append(f"{r.N:>6} {_fmt(r.error):>24} {fine:>24} {r.seconds:>10.3f} {r.bits:>6}{flag}")
    Path(path).write_text("\n".join(lines) + "\n")


# }}}


# {{{ sweeps


@dataclass(frozen=True)
class RunConfig:
    """A convergence study.

    ``problem`` is a fixture name or a path to a problem file. ``reference``
    is ``"auto"`` (the fixture's own reference or the exact expressions of a
    manufactured problem), ``"exact"`` or ``"series"``.
    """

    problem: str
    degrees: tuple
    bits: int | None = None
    reference: str = "auto"
    output: str | None = None
    emit: frozenset = frozenset({"csv", "plotdata", "summary"})
    full_scale: bool = False
    fixture_params: tuple = ()
    fine_check: bool = True
    jobs: int = 1

    def __post_init__(self) -> None:
        degrees = tuple(int(n) for n in self.degrees)
        if not degrees:
            raise ValueError("degrees must be non-empty")
        if any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise ValueError("degrees must be strictly increasing")
        object.__setattr__(self, "degrees", degrees)
        if self.reference not in ("auto", "exact", "series"):
            raise ValueError(f"unknown reference kind {self.reference!r}")

    def precision(self, N: int) -> int:
        return self.bits if self.bits is not None else Precision.for_degree(N).bits


@dataclass(frozen=True)
class SeriesReference:
    """Reference from the local series solution; valid only near the origin."""

    spec: ProblemSpec
    M: int

    def __call__(self, j: int, t, prec: PrecisionLike):
        from ..series_oracle import series_problem_from_spec, series_solve

        bits = bits_of(prec)
        key = (bits,)
        cache = _SERIES_CACHE.setdefault((self.spec, self.M), {})
        if key not in cache:
            sp = series_problem_from_spec(self.spec, self.M, bits + 32)
            cache[key] = series_solve(sp, self.M, bits + 32, self.spec.horizon(bits))
        v = cache[key].series[j].evaluate(t, bits + 32)
        with working(bits):
            return +v


_SERIES_CACHE: dict = {}


def resolve_problem(cfg: RunConfig) -> tuple[ProblemSpec, object, str]:
    """``(spec, reference, title)`` for a config."""
    from .fixtures import FIXTURES
    from .problem_file import load_problem

    if cfg.problem in FIXTURES:
        fx: Fixture = build_fixture(cfg.problem, cfg.full_scale, **dict(cfg.fixture_params))
        spec, ref, title = fx.spec, fx.reference, f"{fx.name}: {fx.description}"
    else:
        spec = load_problem(cfg.problem)
        ref = ExprReference(spec.exact) if spec.manufactured else None
        title = f"{spec.name or os.path.basename(cfg.problem)}"
    if cfg.reference == "exact":
        if not spec.manufactured:
            raise ValueError("reference 'exact' needs a manufactured problem")
        ref = ExprReference(spec.exact)
    elif cfg.reference == "series":
        ref = SeriesReference(spec, 4 * max(cfg.degrees))
    if ref is None:
        raise ValueError("no reference solution available; use a manufactured problem or --reference series")
    return spec, ref, title


def _one(spec: ProblemSpec, ref, N: int, bits: int, fine: bool) -> ConvergenceRecord:
    try:
        sol = solve(spec, N, bits)
        E = error_norm(sol, ref)
        Ef = error_norm(sol, ref, 4 * (N + 1) - 1) if fine else None
        return ConvergenceRecord(N, _e53(E), sol.seconds, bits,
                                 None if Ef is None else _e53(Ef))
    except Exception as exc:  # recorded, sweep continues
        msg = f"{type(exc).__name__}: {exc}"
        if os.environ.get("MUNTZ_DEBUG"):
            msg += "\n" + traceback.format_exc()
        return ConvergenceRecord(N, mpfr("nan", 53), math.nan, bits, failure=msg)


def converge(cfg: RunConfig, progress=None) -> list:
    """Solve at every degree of ``cfg`` and measure E(N)."""
    spec, ref, title = resolve_problem(cfg)
    jobs = [(N, cfg.precision(N)) for N in cfg.degrees]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futs = [pool.submit(_one, spec, ref, N, b, cfg.fine_check) for N, b in jobs]
            records = [f.result() for f in futs]
    else:
        records = []
        for N, b in jobs:
            rec = _one(spec, ref, N, b, cfg.fine_check)
            if progress:
                progress(rec)
            records.append(rec)
    if cfg.output:
        write_outputs(records, cfg.output, cfg.emit, title)
    return records


def write_outputs(records, out_dir, emit=frozenset({"csv", "plotdata", "summary"}), title: str = "") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in emit:
        write_records(records, out / "records.csv")
    if "plotdata" in emit:
        write_plot(records, out / "plot.dat")
    if "summary" in emit:
        write_summary(records, out / "summary.txt", title)


# }}}
