# Linearised FitzHugh-Nagumo with a prescribed flux at x = 0
# here D+ is bounded by a hyperbola, so the boundary integral runs off the real line

import numpy as np

from utmsys.contour import Region, boundary_path
from utmsys.dispersion import BranchSet
from utmsys.oracle import images_reference
from utmsys.solvers import BoundarySpec, BVProblem, solve_fn_neumann
from utmsys.systems import fitzhugh_nagumo
from utmsys.transforms import exp_decay, gaussian_truncated, make_signal, zero_function

beta = 0.5
M = fitzhugh_nagumo(beta)
R = Region(BranchSet(M))
path = boundary_path(R)
print(path.kind)
v = path.vertices
print("on Im(k)^2 = 1 + Re(k)^2:", np.abs(v.imag**2 - 1 - v.real**2).max())

x = np.linspace(0.0, 2.0, 5)
t = np.array([0.5, 1.5])

# flux data h(t) = -exp(-t)
u0 = exp_decay(1.0, 1.0)
# near x = 0 the tail may miss tol slightly; a ToleranceWarning says so and the error column records it
F = solve_fn_neumann(beta, u0, zero_function(), make_signal("exp", c=-1.0), x, t)
print(np.round(F.values[..., 0].real, 6))

# with zero flux, the even extension gives an exact whole-line reference
even = gaussian_truncated(1.0, 0.0, 1.0)
F0 = solve_fn_neumann(beta, even, zero_function(), None, x, t)
P = BVProblem(M, [even], [BoundarySpec.neumann()])
ref = images_reference(P, x, t)
print("max |UTM - images|:", np.abs(F0.values - ref.values).max())
