"""Problem files, benchmark fixtures, convergence sweeps and the CLI."""

from .convergence import ConvergenceRecord, RunConfig, converge, error_norm
from .fixtures import FIXTURES, Fixture, build_fixture
from .problem_file import load_problem, parse_problem


def run_fixture(name: str, full_scale: bool = False, degrees=None, bits=None, output=None, **params):
    """Convergence records for a bundled benchmark at its default or given degrees."""
    fx = build_fixture(name, full_scale, **params)
    cfg = RunConfig(name, tuple(degrees or fx.degrees), bits=bits, output=output,
                    full_scale=full_scale, fixture_params=tuple(params.items()))
    return converge(cfg)


__all__ = [
    "FIXTURES",
    "ConvergenceRecord",
    "Fixture",
    "RunConfig",
    "build_fixture",
    "converge",
    "error_norm",
    "load_problem",
    "parse_problem",
    "run_fixture",
]
