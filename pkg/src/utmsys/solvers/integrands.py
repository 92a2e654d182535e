"""Branch-symmetric algebra for two-branch integrands, and the grid evaluation engine.

For a 2x2 system every solution integrand is a symmetric function of the
branch pair (Omega_1, Omega_2).  Writing e_j = exp(-Omega_j t),
m = (Omega_1 + Omega_2)/2, d = Omega_1 - Omega_2 and P = Omega_1 Omega_2,
the building blocks are the average SA[Y] = (Y_1 + Y_2)/2 and the divided
difference DD[Y] = (Y_1 - Y_2)/d of per-branch quantities.  Powers of Omega
reduce through Omega**2 = 2 m Omega - P, so integrands linear in Omega are
stored as a pair of coefficients (c0, c1) meaning (c0 + c1 Omega) E.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..quadrature import exp_convolve, integrate_contour, with_removable
from .problem import SolutionField


def _sinhc(z):
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    z2 = zs * zs
    out[small] = 1 + z2 / 6 * (1 + z2 / 20 * (1 + z2 / 42))
    out[~small] = np.sinh(z[~small]) / z[~small]
    return out


class PairAlgebra:
    """Symmetric quantities of a branch pair ``om`` (shape (..., 2)) at time t."""

    def __init__(self, om, t):
        om = np.asarray(om, dtype=complex)
        self.om = om
        self.t = float(t)
        w1, w2 = om[..., 0], om[..., 1]
        self.m = (w1 + w2) / 2
        self.prod = w1 * w2
        self.dd_sq = (w1 - w2) ** 2 / 4
        self.e = np.exp(-om * t)
        z = (w1 - w2) * t / 2
        near = np.abs(z) <= 1.0
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            em = np.exp(-self.m * t)
            S0_near = em * np.cosh(z)
            D_near = -t * em * _sinhc(z)
            S0_far = (self.e[..., 0] + self.e[..., 1]) / 2
            D_far = (self.e[..., 0] - self.e[..., 1]) / (w1 - w2)
        self.S0 = np.where(near, S0_near, S0_far)
        self.D = np.where(near, D_near, D_far)

    # plain per-branch operations
    def dd(self, Y):
        return (Y[..., 0] - Y[..., 1]) / (self.om[..., 0] - self.om[..., 1])

    def sa(self, Y):
        return (Y[..., 0] + Y[..., 1]) / 2

    # linear-in-Omega combinations
    def dd_lin(self, c0, c1, E=None):
        """DD[(c0 + c1 Omega) E]; E defaults to the exponential pair."""
        if E is None:
            DD, SA = self.D, self.S0
        else:
            DD, SA = self.dd(E), self.sa(E)
        return c0 * DD + c1 * (self.m * DD + SA)

    def sa_lin(self, c0, c1, E=None):
        if E is None:
            DD, SA = self.D, self.S0
        else:
            DD, SA = self.dd(E), self.sa(E)
        return c0 * SA + c1 * (self.m * SA + self.dd_sq * DD)

    def dt_coeffs(self, c0, c1):
        """Coefficients of d/dt (c0 + c1 Omega) e = -(c0 Omega + c1 Omega**2) e."""
        return c1 * self.prod, -c0 - 2 * self.m * c1


def signal_derivatives(h, t, step=1e-3):
    """h and its first three derivatives at t, from a quintic through six samples in [0, inf)."""
    offs = step * (np.arange(6) if t < 3 * step else np.arange(-3, 3) + 0.5)
    vals = np.asarray(h(t + offs), dtype=float)
    c = np.polynomial.polynomial.polyfit(offs, vals, 5)
    return c[0], c[1], 2 * c[2], 6 * c[3]


def static_pair(h, om, t, derivative=False):
    """Non-oscillating large-k part of boundary_pair.

    Integrating by parts, H_j = h/Omega_j - h'/Omega_j**2 + h''/Omega_j**3,
    all at time t, plus terms that carry exp(-Omega_j t) or decay faster;
    the derivative is the same series one order up.
    """
    h0, h1, h2, h3 = signal_derivatives(h, t)
    inv = 1 / om
    H = (h0 - (h1 - h2 * inv) * inv) * inv
    Hd = (h1 - (h2 - h3 * inv) * inv) * inv
    if derivative == "both":
        return H, Hd
    return Hd if derivative else H


def boundary_pair(h, om, t, derivative=False, static=False):
    """H_j = int_0^t exp(-Omega_j (t-s)) h(s) ds, or its t-derivative when asked.

    The derivative is int_0^t exp(-Omega_j (t-s)) h'(s) ds + e_j h(0), which
    keeps the decay in k that differentiating under the integral would lose.
    ``derivative="both"`` returns (H, dH/dt) from a single pass.
    """
    if h is None:
        return None
    if static:
        return static_pair(h, om, t, derivative)
    res = exp_convolve(h, om, [t], derivative=derivative)
    h0 = complex(np.asarray(h(np.array([0.0])))[0])
    if derivative == "both":
        H, Hd = res[0][0], res[1][0]
        return H, Hd + np.exp(-om * t) * h0
    H = res[0]
    if derivative:
        H = H + np.exp(-om * t) * h0
    return H


TAIL_RADII = np.array([1e4, 2e4, 4e4])


@dataclass
class Term:
    """One contour integral (1/2 pi) int_path exp(i k x) fn(k, om, t) dk.

    With ``tail`` set, fn also accepts ``static=True`` and then returns only
    its non-oscillating boundary-data part, whose 1/k tail is integrated in
    closed form.
    """

    path: object
    fn: object
    removable: tuple = ()
    label: str = ""
    tail: bool = False


def _pairs(B, k):
    om = B.roots(k)
    return om


@dataclass
class FieldEvaluator:
    """Evaluates a list of Terms on an (x, t) grid."""

    branches: object
    terms: list
    names: tuple
    tol: float = 1e-8
    K_max: float = None
    diagnostics: dict = field(default_factory=dict)

    def integrand(self, term, t):
        def F(k):
            return term.fn(k, _pairs(self.branches, k), t)

        return with_removable(F, term.removable)

    def tail_model(self, term, t):
        """(c0, s, r, lam): the model c0 + s/(lam + i k) + r/(lam + i k)**2 of the slow tail.

        The static part of the integrand is fitted by a series in 1/(i k)
        at large real |k|; lam puts the model's pole above the path, so that
        for x > 0 the model integrates to (s + r x) exp(-lam x).
        """
        k = np.concatenate([TAIL_RADII, -TAIL_RADII]).astype(complex)
        F = np.asarray(term.fn(k, _pairs(self.branches, k), t, static=True), dtype=complex)
        z = 1 / (1j * k)
        V = np.stack([np.ones_like(z), z, z**2, z**3], axis=1)
        coef = np.linalg.lstsq(V, F.T, rcond=None)[0]
        lam = 1.0 + max(0.0, float(np.max(term.path.vertices.imag)))
        # s/(lam + i k) contributes -lam s to the 1/(i k)**2 coefficient
        return coef[0], coef[1], coef[2] + lam * coef[1], lam

    def row(self, x, t):
        nc = len(self.names)
        val = np.zeros((nc, x.size), dtype=complex)
        err = np.zeros(x.size)
        radius = []
        ok = True
        for term in self.terms:
            F = self.integrand(term, t)
            model = self.tail_model(term, t) if term.tail and t > 0 else None
            if model is not None:
                c0, sk, rk, lam = model

                def F(k, F=F, c0=c0, sk=sk, rk=rk, lam=lam):
                    z = 1 / (lam + 1j * k)
                    return F(k) - c0[:, None] - (sk[:, None] + rk[:, None] * z) * z

            def integrand(k, F=F):
                Fk = np.asarray(F(k), dtype=complex)
                ex = np.exp(1j * np.outer(x, k))
                return (Fk[:, None, :] * ex[None, :, :]).reshape(nc * x.size, -1) / (2 * np.pi)

            res = integrate_contour(integrand, term.path, self.tol / len(self.terms), self.K_max)
            val += res.value.reshape(nc, x.size)
            if model is not None:
                val += (sk[:, None] + rk[:, None] * x[None, :]) * np.exp(-lam * x)[None, :]
            err += res.error.reshape(nc, x.size).max(axis=0)
            radius.append(res.radius)
            ok &= res.converged
        return val, err, radius, ok

    def evaluate(self, x, t_values, workers=1):
        x = np.asarray(x, dtype=float)
        t_values = np.asarray(t_values, dtype=float)
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda t: self.row(x, t), t_values))
        else:
            rows = [self.row(x, t) for t in t_values]
        values = np.stack([np.moveaxis(r[0], 0, -1) for r in rows])
        errors = np.stack([r[1] for r in rows])
        diag = dict(self.diagnostics)
        diag["K_reached"] = [r[2] for r in rows]
        diag["converged"] = [bool(r[3]) for r in rows]
        diag["paths"] = [term.path.kind for term in self.terms]
        diag["tol"] = self.tol
        return SolutionField(x, t_values, values, errors, self.names, diag)
