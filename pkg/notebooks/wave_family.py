# the wave family u_tt + a u_xt - u_xx = 0 (a = 0 is the classical wave equation)
# a = 0 has a d'Alembert closed form for each boundary condition, which we use as a check

import numpy as np

from utmsys.solvers import BoundarySpec, dalembert_eval, solve_wave_family
from utmsys.transforms import make_signal, poly_exp, zero_function

u0 = poly_exp(1.0, 2, 1.0)
v0 = zero_function()
x = np.linspace(0.0, 2.0, 5)
t = 1.2

# tolerance warnings, if any, come from slowly decaying tails at x = 0
for bc in (BoundarySpec.dirichlet(make_signal("poly-exp", n=2)),
           BoundarySpec.neumann(make_signal("poly-exp", c=-1.0, n=1)),
           BoundarySpec.robin(2.0, 1.0, make_signal("poly-exp", n=2))):
    F = solve_wave_family(0.0, u0, v0, bc, x, [t])
    ref = dalembert_eval(bc, u0, v0, None, x, t)
    print(f"{bc.kind:>9}: max |UTM - dAlembert| = {np.abs(F.values[0, :, 0] - ref).max():.2e}")

# with a = 1 the characteristics are no longer symmetric; Dirichlet data still suffices
F = solve_wave_family(1.0, u0, v0, BoundarySpec.dirichlet(make_signal("poly-exp", n=2)), x, [t])
print("a = 1:", np.round(F.values[0, :, 0].real, 6))
