"""Global relations, boundary-condition elimination and solution formulas."""

from .dalembert import dalembert_eval
from .problem import BoundarySpec, BVProblem, SolutionField
from .special import solve_fn_neumann, solve_kg_dirichlet, solve_wave_family
from .generic import (
    GlobalRelationSystem,
    build_global_relations,
    count_required_bcs,
    generic_solve,
)
