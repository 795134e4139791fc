#!/usr/bin/env python3
"""Convergence sweeps for every bundled fixture at its default degrees.

Writes ``records.csv``, ``plot.dat`` and ``summary.txt`` per fixture under
``--out`` (default ``results/``) and prints a short table.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from muntz_galerkin.harness import FIXTURES, RunConfig, build_fixture, converge


@dataclass(frozen=True)
class SweepConfig:
    fixtures: tuple = tuple(sorted(FIXTURES))
    out: str = "results"
    full_scale: bool = False
    jobs: int = 1


def run(cfg: SweepConfig) -> None:
    for name in cfg.fixtures:
        fx = build_fixture(name, cfg.full_scale)
        run_cfg = RunConfig(name, fx.degrees, output=f"{cfg.out}/{name}",
                            full_scale=cfg.full_scale, jobs=cfg.jobs)
        print(f"== {fx.name}: {fx.description}")
        for r in converge(run_cfg):
            err = f"{float(r.error):.3e}" if r.ok else f"FAILED ({r.failure})"
            print(f"  N={r.N:<4d} bits={r.bits:<5d} E={err}  {r.seconds:.2f}s")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixtures", default=",".join(SweepConfig.fixtures))
    ap.add_argument("--out", default=SweepConfig.out)
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ns = ap.parse_args()
    run(SweepConfig(tuple(ns.fixtures.split(",")), ns.out, ns.full_scale, ns.jobs))


if __name__ == "__main__":
    main()
