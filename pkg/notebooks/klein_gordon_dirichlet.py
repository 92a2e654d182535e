# Klein-Gordon on the half line with a prescribed boundary value
# q_tt - q_xx + alpha q = 0, written as a first-order system for (q, p = q_t)

import numpy as np

from utmsys.dispersion import BranchSet, find_symmetries
from utmsys.oracle import FDConfig, fd_reference, pde_residual
from utmsys.solvers import BoundarySpec, BVProblem, solve_kg_dirichlet
from utmsys.systems import klein_gordon
from utmsys.transforms import make_signal, poly_exp, zero_function

alpha = 1.0
M = klein_gordon(alpha)
B = BranchSet(M)
print(B.labels.describe())  # two branches, +-i sqrt(alpha + k^2)
print(find_symmetries(M, B).describe())

q0 = poly_exp(1.0, 2, 1.0)  # x^2 exp(-x)
p0 = zero_function()
qb = make_signal("poly-exp", n=2)  # t^2 exp(-t), compatible at the corner

x = np.linspace(0.0, 3.0, 7)
t = np.array([0.5, 1.0, 2.0])
F = solve_kg_dirichlet(alpha, q0, p0, qb, x, t)
print("boundary value vs data:", np.abs(F.values[:, 0, 0] - qb(t)).max())
print("max quadrature error estimate:", F.errors.max())

# an independent check by finite differences on a truncated domain
P = BVProblem(M, [q0, p0], [BoundarySpec.dirichlet(qb)])
R = fd_reference(P, FDConfig(h=0.02, L=20.0), x, t)
print("max |UTM - FD| in q:", np.abs(F.values[..., 0] - R.values[..., 0]).max(), "FD error ~", R.errors.max())

# residual of the PDE on a small stencil around (1.5, 0.8), away from the characteristic x = t
xs = 1.5 + 0.01 * np.arange(-3, 4)
ts = 0.8 + 0.01 * np.arange(-1, 2)
print("PDE residual:", pde_residual(solve_kg_dirichlet(alpha, q0, p0, qb, xs, ts), M))
