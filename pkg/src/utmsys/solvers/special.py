"""Final solution formulas for the Klein-Gordon, FitzHugh-Nagumo and wave-like systems.

Each formula is written as integrands of (1/2 pi) int exp(i k x) (...) dk in
the branch-symmetric form of :mod:`.integrands`, so no integrand depends on
how Omega_1 and Omega_2 are labeled.  Terms involving the unknown solution
transforms vanish identically for x > 0 and are not evaluated.
"""

import numpy as np

from ..contour import Region, boundary_path, damped_path, real_line, shifted_path
from ..dispersion import BranchSet
from ..errors import UnsupportedCaseError
from ..systems import fitzhugh_nagumo, klein_gordon, wave_like
from ..transforms import half_line_ft
from .integrands import FieldEvaluator, PairAlgebra, Term, boundary_pair
from .problem import BoundarySpec, as_grid


def _hat(f):
    return lambda k: half_line_ft(f, k)


def _signal(g):
    return None if g is None or g.is_zero else g


def _real_breakpoints(B):
    return [b.k.real for b in B.branch_points if abs(b.k.imag) < 1e-12]


# -- Klein-Gordon, Dirichlet -------------------------------------------------

def kg_dirichlet_integrand(q0, p0, qb):
    """Integrand (k, om, t) -> (2, P) for (q, p) with q(0, t) = qb(t)."""
    q0h, p0h = _hat(q0), _hat(p0)
    h = _signal(qb)

    def fn(k, om, t, static=False):
        A = PairAlgebra(om, t)
        if static:
            q = p = np.zeros(k.shape, dtype=complex)
        else:
            Um = q0h(k) - q0h(-k)
            Pm = p0h(k) - p0h(-k)
            q = A.dd_lin(-Pm, Um)
            c0, c1 = A.dt_coeffs(-Pm, Um)
            p = A.dd_lin(c0, c1)
        if h is not None:
            H, Hd = boundary_pair(h, om, t, "both", static)
            q = q + 2j * k * A.dd(H)
            p = p + 2j * k * A.dd(Hd)
        return np.stack([q, p])

    return fn


def solve_kg_dirichlet(alpha, q0, p0, qb, x, t, tol=1e-8, workers=1, K_max=None):
    """q_tt = q_xx - alpha q on x > 0 with q(0, t) = qb(t); returns (q, p = q_t)."""
    x, t = as_grid(x, t)
    M = klein_gordon(alpha)
    B = BranchSet(M)
    path = real_line(breakpoints=[0.0] + _real_breakpoints(B))
    term = Term(path, kg_dirichlet_integrand(q0, p0, qb), label="real line", tail=_signal(qb) is not None)
    ev = FieldEvaluator(B, [term], M.names, tol, K_max)
    return ev.evaluate(x, t, workers)


# -- FitzHugh-Nagumo, Neumann ------------------------------------------------

def fn_neumann_integrands(beta, v0, w0, vxb):
    """(data integrand over R, boundary integrand over the D+ boundary or None)."""
    v0h, w0h = _hat(v0), _hat(w0)
    h = _signal(vxb)

    def data(k, om, t):
        A = PairAlgebra(om, t)
        Vp = v0h(k) + v0h(-k)
        Wp = w0h(k) + w0h(-k)
        v = A.dd_lin(Wp, Vp)
        w = A.dd_lin(-beta * Vp - 2 * A.m * Wp, Wp)
        return np.stack([v, w])

    def bdry(k, om, t):
        A = PairAlgebra(om, t)
        H = boundary_pair(h, om, t)
        v = -2 * A.dd_lin(0.0, 1.0, H)
        w = 2 * beta * A.dd(H)
        return np.stack([v, w])

    return data, (bdry if h is not None else None)


def solve_fn_neumann(beta, v0, w0, vxb, x, t, tol=1e-8, workers=1, K_max=None):
    """v_t = v_xx - v - w, w_t = beta v on x > 0 with v_x(0, t) = vxb(t)."""
    x, t = as_grid(x, t)
    M = fitzhugh_nagumo(beta)
    B = BranchSet(M)
    data, bdry = fn_neumann_integrands(beta, v0, w0, vxb)
    terms = [Term(real_line(breakpoints=[0.0] + _real_breakpoints(B)), data, label="real line")]
    if bdry is not None:
        R = Region(B)
        terms.append(Term(damped_path(R, boundary_path(R)), bdry, label="boundary of D+"))
    return FieldEvaluator(B, terms, M.names, tol, K_max).evaluate(x, t, workers)


# -- wave-like family ----------------------------------------------------------

def _initial_part(A, k, a, u0, v0):
    """I1 = DD[((Omega + i a k) u0hat - v0hat) e] and its t-derivative."""
    c0 = 1j * a * k * u0 - v0
    c1 = u0
    d0, d1 = A.dt_coeffs(c0, c1)
    return A.dd_lin(c0, c1), A.dd_lin(d0, d1)


def wave_dirichlet_integrand(a, u0, v0, ub):
    u0h, v0h = _hat(u0), _hat(v0)
    h = _signal(ub)

    def fn(k, om, t, static=False):
        A = PairAlgebra(om, t)
        # mu_j = alpha_j / alpha_other, so that Omega_other(mu_j k) = Omega_j(k)
        mu = om / om[..., ::-1]
        if static:
            u = v = np.zeros(k.shape, dtype=complex)
        else:
            u, v = _initial_part(A, k, a, u0h(k), v0h(k))
            mk = mu * k[..., None]
            X = v0h(mk) - (om + 1j * a * mk) * u0h(mk)
            u = u + A.dd(X * A.e)
            v = v + A.dd(-om * X * A.e)
        if h is not None:
            c = 1j * k[..., None] * (1 - mu)
            H, Hd = boundary_pair(h, om, t, "both", static)
            u = u + A.dd(c * H)
            v = v + A.dd(c * Hd)
        return np.stack([u, v])

    return fn


def wave_neumann_integrand(u0, v0, g):
    u0h, v0h = _hat(u0), _hat(v0)
    h = _signal(g)

    def fn(k, om, t, static=False):
        A = PairAlgebra(om, t)
        if static:
            u = v = np.zeros(k.shape, dtype=complex)
        else:
            Up = u0h(k) + u0h(-k)
            Vp = v0h(k) + v0h(-k)
            d0, d1 = A.dt_coeffs(-Vp, Up)
            u = A.dd_lin(-Vp, Up)
            v = A.dd_lin(d0, d1)
        if h is not None:
            H, Hd = boundary_pair(h, om, t, "both", static)
            u = u + 2 * A.dd(H)
            v = v + 2 * A.dd(Hd)
        return np.stack([u, v])

    return fn


def wave_robin_integrands(gamma, u0, v0, f):
    """(I1 over R, J1 + J2 + J3 over the path C) for u_x(0,t) + gamma u(0,t) = f(t)."""
    u0h, v0h = _hat(u0), _hat(v0)
    h = _signal(f)

    def initial(k, om, t):
        A = PairAlgebra(om, t)
        u, v = _initial_part(A, k, 0.0, u0h(k), v0h(k))
        return np.stack([u, v])

    def corrected(k, om, t, static=False):
        A = PairAlgebra(om, t)
        if static:
            u = v = np.zeros(k.shape, dtype=complex)
        else:
            r = (gamma - 1j * k) / (gamma + 1j * k)
            um, vm = u0h(-k), v0h(-k)
            u = -r * (A.sa_lin(um, 0.0) - A.dd_lin(vm, 0.0))
            # d/dt S0 = -m S0 - (d^2/4) D,  d/dt D = -(m D + S0)
            dS = -A.m * A.S0 - A.dd_sq * A.D
            dD = -(A.m * A.D + A.S0)
            v = -r * (dS * um - dD * vm)
        if h is not None:
            c = 2j * k / (gamma + 1j * k)
            H, Hd = boundary_pair(h, om, t, "both", static)
            u = u + c * A.dd(H)
            v = v + c * A.dd(Hd)
        return np.stack([u, v])

    return initial, corrected


def robin_path(gamma):
    """The real line, passing above i gamma when gamma > 0."""
    base = real_line(breakpoints=[0.0])
    if gamma > 0:
        return shifted_path(base, 1j * gamma, "above", reach=np.inf)
    return base


def solve_wave_family(a, u0, v0, bc, x, t, tol=1e-8, workers=1, K_max=None):
    """u_tt = u_xx + a u_xt on x > 0 with one boundary condition on u; returns (u, v = u_t)."""
    x, t = as_grid(x, t)
    if not isinstance(bc, BoundarySpec):
        raise TypeError("bc must be a BoundarySpec")
    bc = bc.normalized()
    M = wave_like(a)
    B = BranchSet(M)
    line = real_line(breakpoints=[0.0])
    data = _signal(bc.data) is not None
    if bc.kind == "dirichlet":
        terms = [Term(line, wave_dirichlet_integrand(a, u0, v0, bc.data), (0.0,), "real line", data)]
    elif a != 0:
        raise UnsupportedCaseError(f"{bc.kind} conditions for the wave-like family are only implemented for a = 0")
    elif bc.kind == "neumann":
        terms = [Term(line, wave_neumann_integrand(u0, v0, bc.data), (0.0,), "real line", data)]
    else:
        gamma = bc.gamma
        initial, corrected = wave_robin_integrands(gamma, u0, v0, bc.data.scaled(1.0 / bc.b))
        terms = [Term(line, initial, (0.0,), "real line"), Term(robin_path(gamma), corrected, (0.0,), "path C", data)]
    ev = FieldEvaluator(B, terms, M.names, tol, K_max, diagnostics={"boundary": bc.kind})
    return ev.evaluate(x, t, workers)
