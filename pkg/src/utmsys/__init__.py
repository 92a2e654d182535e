"""Contour-integral solutions of half-line linear evolution systems."""

from .contour import Region, boundary_path, decay_certificate, in_D_plus, real_line
from .dispersion import BranchSet, find_symmetries, symmetries_from_dispersion
from .symbol import PolynomialMatrix, char_poly, eval_symbol, x_operator
from .systems import fitzhugh_nagumo, klein_gordon, wave_like
from .transforms import make_function, make_signal
from .solvers import (
    BoundarySpec,
    BVProblem,
    SolutionField,
    count_required_bcs,
    dalembert_eval,
    generic_solve,
    solve_fn_neumann,
    solve_kg_dirichlet,
    solve_wave_family,
)

__version__ = "0.1.0"
