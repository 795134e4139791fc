#!/usr/bin/env python3
"""E(N) for exm1 well past its default degrees, for two frequencies.

The desk problem's error grows until N is a few hundred before it starts to
fall. Running with ``--omega 1`` shows the growth does not depend on the
oscillation frequency.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import gmpy2

from muntz_galerkin.harness import RunConfig, converge


@dataclass(frozen=True)
class LargeNConfig:
    degrees: tuple = (32, 64, 96, 128, 192, 256, 320, 384, 448)
    omegas: tuple = (10, 1)
    jobs: int = 4


def run(cfg: LargeNConfig) -> dict:
    out = {}
    for omega in cfg.omegas:
        rc = RunConfig("exm1", cfg.degrees, fixture_params=(("omega", omega),),
                       fine_check=False, jobs=cfg.jobs)
        recs = converge(rc)
        out[omega] = recs
        print(f"omega={omega}")
        for r in recs:
            lg = float(gmpy2.log10(r.error)) if r.ok and r.error > 0 else float("nan")
            print(f"  N={r.N:<4d} bits={r.bits:<5d} log10 E={lg:8.2f}  {r.seconds:.1f}s")
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", default=",".join(map(str, LargeNConfig.degrees)))
    ap.add_argument("--omega", type=int, action="append")
    ap.add_argument("--jobs", type=int, default=LargeNConfig.jobs)
    ns = ap.parse_args()
    run(LargeNConfig(tuple(int(x) for x in ns.degrees.split(",")),
                     tuple(ns.omega or LargeNConfig.omegas), ns.jobs))


if __name__ == "__main__":
    main()
