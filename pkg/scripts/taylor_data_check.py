#!/usr/bin/env python3
"""Feed the recurrence exact Taylor data instead of projected data.

The coupling and forcing blocks of the assembled exm1 system are replaced by
the Müntz-Taylor coefficients of the true coefficient functions. If the
growth seen in E(N) comes from the projection of under-resolved data, this
substitution should make the error fall much earlier.
"""

from __future__ import annotations

import argparse
import dataclasses
from dataclasses import dataclass

from gmpy2 import mpc

from muntz_galerkin.galerkin import assemble, back_substitute, recurrence_solve
from muntz_galerkin.harness import build_fixture, error_norm
from muntz_galerkin.numeric import working
from muntz_galerkin.series_oracle import series_problem_from_spec


@dataclass(frozen=True)
class TaylorCheckConfig:
    degrees: tuple = (32, 64, 96, 128)
    bits: int = 400
    omega: int = 10


def taylor_system(spec, N: int, bits: int):
    sys = assemble(spec, N, bits)
    sp = series_problem_from_spec(spec, N, bits)
    n, T = spec.n, sys.T
    coup = [[sp.couplings[j][r].rescale(T).coeffs for r in range(n)] for j in range(n)]
    forc = [sp.forcing[j].rescale(T).coeffs for j in range(n)]
    diag, P = [], []
    with working(bits):
        for j in range(n):
            kap, Tt, cs = sys.shifts[j], sys.T_theta[j], sys.colscale[j]
            diag.append(tuple(tuple(Tt * c for c in coup[j][r][:N - kap + 1]) for r in range(n)))
            row = [mpc(sys.transformed.psibar[j].get(l, 0)) for l in range(N + 1)]
            for m in range(N - kap + 1):
                row[m + kap] += Tt * forc[j][m] * cs[m]
            P.append(tuple(row))
    return dataclasses.replace(sys, diag=tuple(diag), P=tuple(P))


def run(cfg: TaylorCheckConfig) -> list:
    fx = build_fixture("exm1", omega=cfg.omega)
    out = []
    for N in cfg.degrees:
        s = taylor_system(fx.spec, N, cfg.bits)
        E = error_norm(back_substitute(s, recurrence_solve(s)), fx.reference)
        out.append((N, E))
        print(f"N={N:<4d} E={float(E):.3e}", flush=True)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", default=",".join(map(str, TaylorCheckConfig.degrees)))
    ap.add_argument("--bits", type=int, default=TaylorCheckConfig.bits)
    ap.add_argument("--omega", type=int, default=TaylorCheckConfig.omega)
    ns = ap.parse_args()
    run(TaylorCheckConfig(tuple(int(x) for x in ns.degrees.split(",")), ns.bits, ns.omega))


if __name__ == "__main__":
    main()
