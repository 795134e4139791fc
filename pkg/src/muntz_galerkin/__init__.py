"""Müntz-Jacobi Galerkin solver for linear systems of fractional ODEs with rational Caputo orders."""

from .expr import ParseError, parse
from .fracops import RationalOrder
from .galerkin import GalerkinSolution, assemble, dense_solve, evaluate, recurrence_solve, solve
from .muntz import MuntzGrid, MuntzSeries
from .numeric import Precision
from .problem import ProblemSpec, ProblemValidationError
from .series_oracle import series_problem_from_spec, series_solve

__all__ = [
    "GalerkinSolution",
    "MuntzGrid",
    "MuntzSeries",
    "ParseError",
    "Precision",
    "ProblemSpec",
    "ProblemValidationError",
    "RationalOrder",
    "assemble",
    "dense_solve",
    "evaluate",
    "parse",
    "recurrence_solve",
    "series_problem_from_spec",
    "series_solve",
    "solve",
]

__version__ = "0.1.0"
