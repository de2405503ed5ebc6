"""Vector P1 finite elements for the stabilized Maxwell system in conductive media."""

from .mesh import Mesh, build_structured_mesh
from .coefficients import CoefficientField
from .manufactured import ExactSolution
from .timestepper import build_operators, cfl_max_tau, run
from .analysis import convergence_rates, relative_errors
from .study import convergence_study, solve_manufactured

__version__ = "0.1.0"
