#!/usr/bin/env python3
"""exm7 at and beyond N=256 against the matrix Mittag-Leffler reference.

Each degree runs at the policy precision. Expect several minutes for the
full default list.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from muntz_galerkin import Precision, solve
from muntz_galerkin.harness import build_fixture, error_norm
from muntz_galerkin.harness.fixtures import exm7_matrix_reference


@dataclass(frozen=True)
class Exm7Config:
    degrees: tuple = (256, 320, 448, 576, 704)


def run(cfg: Exm7Config) -> list:
    fx = build_fixture("exm7")
    cache = {}

    def ref(j, t, prec):
        key = (t, int(prec))
        if key not in cache:
            cache[key] = exm7_matrix_reference(t, prec)
        return cache[key][j]

    rows = []
    for N in cfg.degrees:
        bits = Precision.for_degree(N).bits
        t0 = time.perf_counter()
        sol = solve(fx.spec, N, bits)
        E = error_norm(sol, ref)
        cache.clear()
        rows.append((N, bits, E))
        print(f"N={N:<4d} bits={bits:<5d} E={float(E):.3e}  "
              f"solve {sol.seconds:.2f}s  total {time.perf_counter() - t0:.1f}s", flush=True)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", default=",".join(map(str, Exm7Config.degrees)))
    ns = ap.parse_args()
    run(Exm7Config(tuple(int(x) for x in ns.degrees.split(","))))


if __name__ == "__main__":
    main()
