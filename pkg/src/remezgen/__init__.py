"""Best uniform approximation by arbitrary (non-Chebyshev) function systems."""

from .applications import (
    SpectrumSpec,
    markov_bernstein_exponential,
    markov_bernstein_lacunary,
    min_stability_interval,
    ode_derivative_bound,
)
from .constraints import ConstraintSet, LinearFunctional, build_functional, project_oriented
from .errors import RemezError
from .function_system import (
    Cauchy,
    Domain,
    ExpTrig,
    FunctionSystem,
    Gaussian,
    PhaseTrig,
    Poly,
    Power,
    Spline,
    eval_poly,
    eval_poly_derivative,
    moment_vector,
    truncate_halfline,
)
from .oracle import grid_chebyshev
from .problem import ProblemSpec, load_problem, parse_problem, result_to_dict
from .remez import ApproxResult, SolverOptions, solve, solve_constrained
from .search import SearchGrid
from .targets import parse_target

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "Cauchy",
    "ConstraintSet",
    "Domain",
    "ExpTrig",
    "FunctionSystem",
    "Gaussian",
    "LinearFunctional",
    "PhaseTrig",
    "Poly",
    "Power",
    "ProblemSpec",
    "RemezError",
    "SearchGrid",
    "SolverOptions",
    "SpectrumSpec",
    "Spline",
    "build_functional",
    "eval_poly",
    "eval_poly_derivative",
    "grid_chebyshev",
    "load_problem",
    "markov_bernstein_exponential",
    "markov_bernstein_lacunary",
    "min_stability_interval",
    "moment_vector",
    "ode_derivative_bound",
    "parse_problem",
    "parse_target",
    "project_oriented",
    "result_to_dict",
    "solve",
    "solve_constrained",
    "truncate_halfline",
]
