"""Closed-form d'Alembert evaluation of the half-line wave equation u_tt = u_xx."""

import numpy as np
from scipy.integrate import quad

from .problem import BoundarySpec


def _int(f, a, b, weight=None):
    if b <= a:
        return 0.0
    g = f if weight is None else (lambda s: f(s) * weight(s))
    return quad(lambda s: float(np.real(g(s))), a, b, limit=200, epsabs=1e-13, epsrel=1e-12)[0]


def dalembert_point(kind, u0, v0, data, x, t, gamma=None):
    U = lambda s: float(u0(s))  # noqa: E731
    V = lambda s: float(v0(s))  # noqa: E731
    if x >= t:
        return 0.5 * (U(x + t) + U(x - t)) + 0.5 * _int(V, x - t, x + t)
    tau = t - x
    if kind == "dirichlet":
        return 0.5 * (U(x + t) - U(tau)) + 0.5 * _int(V, tau, x + t) + float(data(tau))
    if kind == "neumann":
        g = lambda s: float(data(s))  # noqa: E731
        return 0.5 * (U(x + t) + U(tau)) + 0.5 * (_int(V, 0, tau) + _int(V, 0, x + t)) - _int(g, 0, tau)
    if kind == "robin":
        kern = lambda s: np.exp(gamma * (tau - s))  # noqa: E731
        f = lambda s: float(data(s))  # noqa: E731
        return (
            0.5 * (U(x + t) + U(tau))
            + gamma * _int(U, 0, tau, kern)
            + 0.5 * _int(V, tau, t + x)
            + _int(V, 0, tau, kern)
            - _int(f, 0, tau, kern)
        )
    raise ValueError(f"unknown boundary kind {kind!r}")


def dalembert_eval(kind, u0, v0, data, x, t, gamma=None):
    """Exact solution of the a = 0 wave equation on x > 0.

    ``kind`` is 'dirichlet' (data = u(0,t)), 'neumann' (data = u_x(0,t)),
    'robin' (data = f in u_x(0,t) + gamma u(0,t) = f(t)) or a BoundarySpec;
    for a Robin BoundarySpec gamma = a/b and the data are divided by b.
    Vectorized over broadcast x and t (evaluated point by point).
    """
    if isinstance(kind, BoundarySpec):
        bc = kind.normalized()
        kind = bc.kind
        data = bc.data if data is None else data
        if kind == "robin":
            gamma = bc.gamma
            data = data.scaled(1.0 / bc.b)
    kind = kind.lower()
    if kind == "robin" and gamma is None:
        raise ValueError("Robin evaluation needs gamma")
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    out = np.empty(x.shape)
    for idx in np.ndindex(x.shape):
        out[idx] = dalembert_point(kind, u0, v0, data, float(x[idx]), float(t[idx]), gamma)
    return out if out.shape else float(out)
