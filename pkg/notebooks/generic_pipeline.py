# the generic pipeline: any 2 x 2 symbol with polynomial entries
# steps: branches, symmetries, D+, boundary-condition count, then the solution

import numpy as np

from utmsys.cli import branch_formula
from utmsys.dispersion import BranchSet, find_symmetries
from utmsys.solvers import BoundarySpec, BVProblem, count_required_bcs, generic_solve, solve_kg_dirichlet
from utmsys.solvers.generic import evaluation_contour
from utmsys.symbol import PolynomialMatrix
from utmsys.systems import klein_gordon
from utmsys.transforms import make_signal, poly_exp, zero_function

# Klein-Gordon written out explicitly: Lambda(k) = [[0, -1], [alpha + k^2, 0]]
alpha = 2.0
M = PolynomialMatrix.from_entries([[[0], [-1]], [[alpha, 0, 1], [0]]], names=("q", "p"))
B = BranchSet(M)
S = find_symmetries(M, B)
print("branches:", branch_formula(M))
print("symmetries:", S.describe())
path = evaluation_contour(B)
print("contour:", path.kind)
required, report = count_required_bcs(M, S, path)
print("boundary conditions needed:", required, report["data_components"])

q0 = poly_exp(1.0, 2, 1.0)
qb = make_signal("poly-exp", n=2)
P = BVProblem(M, [q0], [BoundarySpec.dirichlet(qb)])
x, t = np.array([0.0, 0.5, 1.5]), np.array([0.8])
G = generic_solve(P, x, t)
K = solve_kg_dirichlet(alpha, q0, zero_function(), qb, x, t)
print("generic vs closed form:", np.abs(G.values - K.values).max())
