"""Independent reference solutions: finite differences and the method of images.

Neither oracle shares code with the transform solvers beyond the problem
description, so agreement between them is a meaningful check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.sparse.linalg import splu

from .errors import GridTooCoarseError, InstabilityError, UnsupportedCaseError
from .solvers.problem import SolutionField, as_grid


@dataclass(frozen=True)
class FDConfig:
    """Crank-Nicolson method of lines on [0, L] with homogeneous Dirichlet data at x = L.

    ``tau`` defaults to h.  ``levels`` grids h, h/2, ... are run; the finest
    is reported and the last two give the Richardson error estimate.
    """

    h: float = 0.01
    L: float = 40.0
    tau: float = None
    levels: int = 2
    growth_limit: float = 1e8

    def __post_init__(self):
        if not (self.h > 0 and self.L > 0 and (self.tau is None or self.tau > 0)):
            raise ValueError("h, L and tau must be positive")
        if self.levels < 2:
            raise ValueError("Richardson estimation needs at least two levels")

    @property
    def time_step(self):
        return self.h if self.tau is None else self.tau


def _derivative_operators(M):
    """(p, (N, N) coefficient) pairs of Lambda(-i d/dx) = sum_p C_p (-i)**p d^p/dx^p."""
    C = M.coefficients
    if C.shape[2] > 3:
        raise UnsupportedCaseError("the finite-difference oracle handles at most second derivatives")
    return [(p, C[:, :, p] * (-1j) ** p) for p in range(C.shape[2]) if np.any(C[:, :, p] != 0)]


def _time_derivative(sig, t, step=1e-5):
    return (sig(np.array([t + step])) - sig(np.array([max(t - step, 0.0)]))) / (t + step - max(t - step, 0.0))


class _MethodOfLines:
    """dQ/dt = A Q + sum_m f_m g_m(t) on nodes x_i = i h, with some entries prescribed."""

    def __init__(self, P, h, L):
        M = P.system
        self.N = N = M.size
        self.n = n = int(round(L / h))
        self.h = h
        self.x = np.arange(n + 1) * h
        size = (n + 1) * N
        ops = _derivative_operators(M)
        idx = lambda i, c: i * N + c  # noqa: E731

        # boundary roles at x = 0
        self.fixed = {}  # entry -> callable t -> value
        ghost = {}  # component -> (a, b, signal) for a Q + b Q_x = data
        bcs = [bc.normalized() for bc in P.boundary]
        for bc in bcs:
            c = bc.component
            if bc.kind == "dirichlet":
                self.fixed[idx(0, c)] = (lambda s, g=bc.data: complex(g(np.array([s]))[0]))
            elif bc.kind == "neumann":
                ghost[c] = (0.0, 1.0, bc.data)
            else:
                ghost[c] = (bc.a, bc.b, bc.data)
        # a component forced by a Dirichlet one through Q_r,t = -lam Q_c
        C0 = M.coefficients[:, :, 0]
        for r in range(N):
            if np.any(M.coefficients[r, :, 1:] != 0):
                continue
            nz = np.nonzero(C0[r])[0]
            if len(nz) == 1 and nz[0] != r and idx(0, r) in self.fixed and idx(0, nz[0]) not in self.fixed:
                lam = C0[r, nz[0]]
                g = next(bc.data for bc in bcs if bc.component == r and bc.kind == "dirichlet")
                self.fixed[idx(0, int(nz[0]))] = (lambda s, g=g, lam=lam: complex(-_time_derivative(g, s)[0] / lam))
        for c in range(N):
            self.fixed[idx(n, c)] = (lambda s: 0j)

        rows, cols, vals = [], [], []
        forcing = []  # (entry, coefficient, signal)

        def add(r, c, v):
            rows.append(r)
            cols.append(c)
            vals.append(v)

        for i in range(n + 1):
            for r in range(N):
                e = idx(i, r)
                if e in self.fixed:
                    continue
                for p, Cp in ops:
                    for c in range(N):
                        coef = -Cp[r, c]
                        if coef == 0:
                            continue
                        if p == 0:
                            add(e, idx(i, c), coef)
                            continue
                        if i > 0:
                            st = {1: [(-1, -0.5), (1, 0.5)], 2: [(-1, 1.0), (0, -2.0), (1, 1.0)]}[p]
                            for off, w in st:
                                add(e, idx(i + off, c), coef * w / h**p)
                        elif c in ghost:
                            a, b, g = ghost[c]
                            # ghost value Q(-h) = Q(h) - 2 h (g - a Q(0)) / b
                            if p == 1:
                                add(e, idx(0, c), coef * (-a / b))
                                forcing.append((e, coef / b, g))
                            else:
                                add(e, idx(0, c), coef * (-2.0 + 2 * h * a / b) / h**2)
                                add(e, idx(1, c), coef * 2.0 / h**2)
                                forcing.append((e, coef * (-2.0 / (h * b)), g))
                        else:
                            st = {1: [(0, -1.5), (1, 2.0), (2, -0.5)], 2: [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]}[p]
                            for off, w in st:
                                add(e, idx(off, c), coef * w / h**p)
        self.A = sp.csc_matrix((vals, (rows, cols)), shape=(size, size), dtype=complex)
        self.forcing = forcing
        self.size = size
        q0 = np.zeros(size, dtype=complex)
        for c, f in enumerate(P.initial):
            q0[c::N] = np.asarray(f(self.x), dtype=complex)
        q0[idx(n, 0): idx(n, 0) + N] = 0
        self.q0 = q0
        self._lu = {}

    def _force(self, t):
        f = np.zeros(self.size, dtype=complex)
        for e, coef, g in self.forcing:
            f[e] += coef * complex(g(np.array([t]))[0])
        return f

    def _factor(self, tau):
        key = round(tau, 14)
        if key not in self._lu:
            I = sp.identity(self.size, dtype=complex, format="csc")
            left = (I - 0.5 * tau * self.A).tolil()
            right = (I + 0.5 * tau * self.A).tolil()
            for e in self.fixed:
                left.rows[e], left.data[e] = [e], [1.0]
                right.rows[e], right.data[e] = [], []
            self._lu[key] = (splu(left.tocsc()), right.tocsr())
        return self._lu[key]

    def march(self, times, tau, limit):
        """Solution vectors at the sorted output ``times``."""
        q = self.q0.copy()
        for e, val in self.fixed.items():
            q[e] = val(0.0)
        scale = 1.0 + np.abs(q).max()
        out = []
        t_now = 0.0
        f_now = self._force(0.0)
        for T in times:
            span = T - t_now
            steps = int(np.ceil(span / tau - 1e-9)) if span > 0 else 0
            if steps:
                dt = span / steps
                lu, right = self._factor(dt)
                for _ in range(steps):
                    t_next = t_now + dt
                    f_next = self._force(t_next)
                    rhs = right @ q + 0.5 * dt * (f_now + f_next)
                    for e, val in self.fixed.items():
                        rhs[e] = val(t_next)
                    q = lu.solve(rhs)
                    t_now, f_now = t_next, f_next
                    if not np.all(np.isfinite(q)) or np.abs(q).max() > limit * scale:
                        raise InstabilityError(f"finite-difference solution grew beyond {limit:g} times its scale")
            out.append(q.copy())
        return out

    def sample(self, q, x):
        """Values at arbitrary x in [0, L], shape (len(x), N)."""
        Q = q.reshape(self.n + 1, self.N)
        pos = x / self.h
        on_node = np.abs(pos - np.round(pos)) < 1e-9
        if np.all(on_node):
            return Q[np.round(pos).astype(int)]
        return CubicSpline(self.x, Q, axis=0)(x)


def fd_reference(P, cfg=None, x=None, t=None):
    """Finite-difference solution on the (x, t) grid with a Richardson error estimate."""
    cfg = cfg or FDConfig()
    x, t = as_grid(x, t)
    if x.max() > cfg.L / 2:
        raise ValueError("grid must stay well inside the finite-difference domain")
    order = np.argsort(t)
    results = []
    for level in range(cfg.levels):
        h = cfg.h / 2**level
        mol = _MethodOfLines(P, h, cfg.L)
        qs = mol.march(t[order], cfg.time_step / 2**level, cfg.growth_limit)
        vals = np.empty((t.size, x.size, P.system.size), dtype=complex)
        for i, q in zip(order, qs):
            vals[i] = mol.sample(q, x)
        results.append(vals)
    fine, coarse = results[-1], results[-2]
    comp_err = np.abs(fine - coarse) / 3.0
    err = comp_err.max(axis=-1)
    diag = {"h": cfg.h, "L": cfg.L, "levels": cfg.levels, "component_errors": comp_err}
    if cfg.levels >= 3:
        e1 = np.abs(results[-2] - results[-3]).max()
        e2 = np.abs(results[-1] - results[-2]).max()
        diag["richardson_ratio"] = float(e1 / e2) if e2 > 0 else np.inf
    return SolutionField(x, t, fine, err, P.system.names, diag)


def _expm_batch(A):
    """exp(A) for a stack of square matrices; closed form for 2 x 2."""
    if A.shape[-1] != 2:
        return expm(A)
    mu = (A[:, 0, 0] + A[:, 1, 1]) / 2
    B = A - mu[:, None, None] * np.eye(2)
    # B**2 = delta**2 I by Cayley-Hamilton
    d = np.sqrt(B[:, 0, 0] ** 2 + B[:, 0, 1] * B[:, 1, 0])
    small = np.abs(d) < 1e-4
    ds = np.where(small, 1.0, d)
    d2 = d * d
    # combine exponents so large |mu| and |delta| do not overflow separately
    ep, em = np.exp(mu + ds), np.exp(mu - ds)
    c = np.where(small, np.exp(mu) * (1 + d2 / 2 * (1 + d2 / 12)), (ep + em) / 2)
    sc = np.where(small, np.exp(mu) * (1 + d2 / 6 * (1 + d2 / 20)), (ep - em) / (2 * ds))
    return c[:, None, None] * np.eye(2) + sc[:, None, None] * B


# -- method of images ----------------------------------------------------------

def images_reference(P, x=None, t=None, points=2**19, half_width=40.0):
    """Whole-line Fourier solution of the odd (Dirichlet) or even (Neumann) extension.

    Needs homogeneous boundary data and a symbol that is even in k, so that
    the extension's parity is preserved by the evolution.
    """
    M = P.system
    x, t = as_grid(x, t)
    if len(P.boundary) != 1:
        raise UnsupportedCaseError("the method of images needs exactly one boundary condition")
    bc = P.boundary[0].normalized()
    if bc.kind == "robin" or not bc.data.is_zero:
        raise UnsupportedCaseError("the method of images needs homogeneous Dirichlet or Neumann data")
    C = M.coefficients
    if np.any(C[:, :, 1::2] != 0):
        raise UnsupportedCaseError("the method of images needs a symbol even in k")
    sign = -1.0 if bc.kind == "dirichlet" else 1.0
    dx = 2 * half_width / points
    xs = (np.arange(points) - points // 2) * dx
    ext = np.zeros((P.system.size, points), dtype=complex)
    pos = xs > 0
    for c, f in enumerate(P.initial):
        vals = np.asarray(f(np.abs(xs)), dtype=complex)
        ext[c] = np.where(pos, vals, sign * vals)
        if sign < 0:
            ext[c, xs == 0] = 0
    # on the periodic grid f_hat(k) = dx * sum f(x_m) exp(-i k x_m)
    k = 2 * np.pi * np.fft.fftfreq(points, d=dx)
    shift = np.exp(-1j * k * xs[0])
    fh = np.fft.fft(ext, axis=1) * shift
    L = M(k)  # (P, N, N)
    out = np.empty((t.size, x.size, M.size), dtype=complex)
    for i, tt in enumerate(t):
        prop = _expm_batch(-tt * L)
        qh = np.einsum("pac,cp->ap", prop, fh)
        q = np.fft.ifft(qh / shift, axis=1)
        near = (xs >= -4 * dx) & (xs <= x.max() + 4 * dx)
        out[i] = CubicSpline(xs[near], q[:, near], axis=1)(x).T
    err = np.zeros((t.size, x.size))
    return SolutionField(x, t, out, err, M.names, {"points": points, "half_width": half_width})


# -- residual ------------------------------------------------------------------

def pde_residual(F, M):
    """Max over interior grid points of |Q_t + Lambda(-i d/dx) Q| by centered differences."""
    cut = max(1, M.coefficients.shape[2] - 1)
    if F.t.size < 3 or F.x.size < 2 * cut + 1:
        raise GridTooCoarseError(f"the residual needs at least 3 times and {2 * cut + 1} positions")
    Q = F.values  # (nt, nx, N)
    Qt = np.gradient(Q, F.t, axis=0)
    res = Qt.copy()
    D = Q
    C = M.coefficients
    for p in range(C.shape[2]):
        if p:
            D = np.gradient(D, F.x, axis=1)
        Cp = C[:, :, p] * (-1j) ** p
        if np.any(Cp != 0):
            res += np.einsum("ab,tib->tia", Cp, D)
    inner = res[1:-1, cut:-cut]
    return float(np.abs(inner).max(initial=0.0))
