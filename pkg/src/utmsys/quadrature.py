"""Vectorized adaptive quadrature along complex polylines, and exponential convolutions.

The integrand convention is ``f(nodes) -> array (m, P)``: one row per output
(for instance per (x, t) grid point) and one column per node.  Every output
shares the same adaptive subdivision.
"""

import math
import warnings

import numpy as np

from .errors import NonDecayingTailError, ToleranceWarning

# Gauss-Kronrod 7/15 abscissae and weights (non-negative half, QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]

CHUNK = 4096


class QuadResult:
    """Integral values and error estimates, one entry per integrand output."""

    def __init__(self, value, error, converged=True, radius=None, intervals=0):
        self.value = value
        self.error = error
        self.converged = converged
        self.radius = radius
        self.intervals = intervals

    def __repr__(self):
        return f"QuadResult(max error={np.max(self.error, initial=0):.3g}, converged={self.converged})"


def _evaluate(f, nodes, m=None):
    out = []
    for s in range(0, nodes.size, CHUNK):
        v = np.asarray(f(nodes[s : s + CHUNK]), dtype=complex)
        if v.ndim == 1:
            v = v[None, :]
        out.append(v)
    return np.concatenate(out, axis=1)


def integrate_polyline(f, vertices, tol, max_intervals=50000, min_length=1e-12):
    """Adaptive G7K15 integral of f along the polyline through ``vertices``.

    Intervals are bisected until ``max|K - G|`` over outputs is below
    ``tol * length / total length``.  Returns a QuadResult whose error is the
    sum of the interval estimates, per output.
    """
    v = np.asarray(vertices, dtype=complex)
    a, b = v[:-1], v[1:]
    keep = a != b
    a, b = a[keep], b[keep]
    if a.size == 0:
        return QuadResult(np.zeros(1, dtype=complex), np.zeros(1))
    total = np.abs(b - a).sum()
    value = None
    error = None
    converged = True
    count = a.size
    while a.size:
        c, h = (a + b) / 2, (b - a) / 2
        nodes = (c[:, None] + h[:, None] * NODES[None, :]).ravel()
        vals = _evaluate(f, nodes).reshape(-1, a.size, 15)
        K = (vals * KRONROD_WEIGHTS).sum(-1) * h
        G = (vals * GAUSS_WEIGHTS).sum(-1) * h
        e = np.abs(K - G)
        if value is None:
            value = np.zeros(K.shape[0], dtype=complex)
            error = np.zeros(K.shape[0])
        length = np.abs(b - a)
        ok = (e.max(axis=0) <= tol * length / total) | (length < min_length * max(1.0, total))
        if count + np.count_nonzero(~ok) > max_intervals:
            ok[:] = True
            converged = False
        value += K[:, ok].sum(axis=1)
        error += e[:, ok].sum(axis=1)
        a, b, c = a[~ok], b[~ok], c[~ok]
        count += a.size
        a, b = np.concatenate([a, c]), np.concatenate([c, b])
    return QuadResult(value, error, converged, intervals=count)


def integrate_contour(f, path, tol, K_max=None, warn=True):
    """Integral of f along a ContourPath, truncated by doubling the radius.

    The core part (inside the path's core radius) is integrated first; then
    annuli [R, 2R] at both ends are added until twice the last annulus
    contribution is below tol/2.  If K_max is reached first the tail is
    either still decreasing (ToleranceWarning) or not (NonDecayingTailError).
    """
    if K_max is None:
        K_max = path.K_max
    core = integrate_polyline(f, path.vertices, tol / 4)
    value, error = core.value.copy(), core.error.copy()
    converged = core.converged
    if not path.infinite:
        return QuadResult(value, error, converged, radius=None)
    R = path.core_radius
    prev = prev2 = None
    while True:
        R2 = 2 * R
        piece = 0
        for end in (0, 1):
            res = integrate_polyline(f, path.tail(end, R, R2), tol / 16)
            piece = piece + res.value
            error = error + res.error
            converged &= res.converged
        value = value + piece
        # an oscillatory annulus can cancel by accident, so the previous
        # (twice as large, for 1/k^2 decay) annulus also bounds the tail
        tail = 2 * np.abs(piece) if prev is None else 2 * np.maximum(np.abs(piece), np.abs(prev) / 2)
        if prev is not None and tail.max() < tol / 2:
            break
        if R2 >= K_max:
            # oscillatory 1/k tails let neighbouring annuli grow by up to 1.5x,
            # so decay is judged over two doublings
            ref = prev2 if prev2 is not None else prev
            big = np.max(np.abs(piece)) > tol
            if ref is not None and big and np.max(np.abs(piece)) >= 0.9 * np.max(np.abs(ref)):
                raise NonDecayingTailError(
                    f"integrand does not decay: annulus contribution {np.max(np.abs(piece)):.3g} at |k|={R2:.3g}"
                )
            if prev2 is not None:
                value, tail = _extrapolate_tail(value, tail, piece, prev, prev2)
            if tail.max() >= tol / 2:
                converged = False
                if warn:
                    warnings.warn(
                        f"contour tail estimate {tail.max():.3g} exceeds tol/2 at K_max={K_max:.3g}",
                        ToleranceWarning,
                        stacklevel=2,
                    )
            break
        prev2, prev = prev, piece
        R = R2
    return QuadResult(value, error + tail, converged, radius=R2)


def _extrapolate_tail(value, tail, piece, prev, prev2):
    """Sum the remaining annuli as a geometric series where their ratio has settled.

    Algebraic decay k**-p makes successive doubling annuli shrink by a fixed
    factor 2**(1-p); where the last two ratios agree the rest of the tail is
    piece r / (1 - r), with the ratio drift as its error.
    """
    big = np.abs(prev) > 1e-300
    r = np.where(big, piece / np.where(big, prev, 1), 0)
    r_old = np.where(np.abs(prev2) > 1e-300, prev / np.where(np.abs(prev2) > 1e-300, prev2, 1), 0)
    settled = big & (np.abs(r) < 0.75) & (np.abs(r - r_old) < 0.1 * np.abs(r) + 1e-3)
    extra = np.where(settled, piece * r / (1 - np.where(settled, r, 0)), 0)
    drift = np.abs(piece) * np.abs(r - r_old) / (1 - np.minimum(np.abs(r), 0.75)) ** 2
    new_tail = np.where(settled, drift + 0.05 * np.abs(extra), tail)
    return value + extra, np.minimum(new_tail, tail)


def with_removable(f, points, radius=1e-6, offset=1e-4):
    """Wrap f so nodes within ``radius`` of a removable singularity use a two-sided average."""
    points = [complex(p) for p in points]
    if not points:
        return f

    def g(k):
        k = np.asarray(k, dtype=complex)
        near = np.zeros(k.shape, dtype=bool)
        for p in points:
            near |= np.abs(k - p) < radius
        if not near.any():
            return f(k)
        kk = k.copy()
        kk[near] = kk[near] + offset
        v1 = np.asarray(f(kk), dtype=complex)
        kk[near] = k[near] - offset
        v2 = np.asarray(f(kk), dtype=complex)
        v0 = np.asarray(f(np.where(near, k + 1.0, k)), dtype=complex)
        return np.where(near, (v1 + v2) / 2, v0)

    return g


# -- exponential convolution -------------------------------------------------

_DEG = 7
_FACT = np.array([math.factorial(n) for n in range(_DEG + 1)], dtype=float)
_SIGMA = (1 - np.cos(np.pi * (np.arange(_DEG + 1) + 0.5) / (_DEG + 1))) / 2
_VINV = np.linalg.inv(np.vander(_SIGMA, _DEG + 1, increasing=True))


def phi_functions(z, count):
    """phi_1(z) .. phi_count(z), with phi_m(z) = sum_j z**j / (j+m)!.

    Small |z| uses the Taylor series of phi_count and the stable downward
    recurrence phi_m = z phi_{m+1} + 1/m!; larger |z| uses the upward
    recurrence from exp(z).  Returns shape (count,) + z.shape.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    out = np.empty((count,) + z.shape, dtype=complex)
    small = np.abs(z) < 2.0
    if small.any():
        zs = z[small]
        term = np.full(zs.shape, 1.0 / math.factorial(count), dtype=complex)
        acc = term.copy()
        for j in range(1, 30):
            term = term * zs / (j + count)
            acc += term
        out[count - 1][small] = acc
        for m in range(count - 1, 0, -1):
            acc = zs * acc + 1.0 / math.factorial(m)
            out[m - 1][small] = acc
    big = ~small
    if big.any():
        zb = z[big]
        phi = np.exp(zb)
        for m in range(count):
            phi = (phi - 1.0 / math.factorial(m)) / zb
            out[m][big] = phi
    return out.reshape((count,) + shape)


def exp_convolve(h, omega, t_values, panel=0.05, derivative=False):
    """H(omega, t) = int_0^t exp(-omega (t - s)) h(s) ds for all omega and t.

    ``h`` is a vectorized callable on [0, max t].  On each panel h is
    replaced by its degree-7 Chebyshev interpolant and the integral of the
    exponential against each monomial is done exactly via phi functions, so
    large |omega| costs nothing extra.  With ``derivative=True`` the
    interpolant's derivative is convolved instead, giving the same integral
    for h'; ``derivative="both"`` returns the pair (H, H for h').
    Results have shape (len(t_values),) + omega.shape.
    """
    omega = np.asarray(omega, dtype=complex)
    t_values = np.atleast_1d(np.asarray(t_values, dtype=float))
    if np.any(t_values < 0):
        raise ValueError("t must be nonnegative")
    modes = (False, True) if derivative == "both" else (bool(derivative),)
    order = np.argsort(t_values)
    outs = [np.zeros((t_values.size,) + omega.shape, dtype=complex) for _ in modes]
    ys = [np.zeros(omega.shape, dtype=complex) for _ in modes]
    t_prev = 0.0
    for idx in order:
        t = t_values[idx]
        span = t - t_prev
        if span > 0:
            npan = max(1, int(np.ceil(span / panel - 1e-12)))
            tau = span / npan
            z = -omega * tau
            E = np.exp(z)
            W = tau * _FACT.reshape((-1,) + (1,) * z.ndim) * phi_functions(z, _DEG + 1)
            for p in range(npan):
                a = t_prev + p * tau
                coef = _VINV @ np.asarray(h(a + tau * _SIGMA), dtype=complex)
                for i, dmode in enumerate(modes):
                    c = np.append(coef[1:] * np.arange(1, _DEG + 1) / tau, 0.0) if dmode else coef
                    ys[i] = E * ys[i] + np.tensordot(c, W, axes=(0, 0))
        for i in range(len(modes)):
            outs[i][idx] = ys[i]
        t_prev = t
    return tuple(outs) if derivative == "both" else outs[0]


def time_integral(g, omega, t, tol=1e-12):
    """int_0^t exp(omega s) g(s) ds by adaptive Gauss-Kronrod (scalar omega)."""
    if t == 0:
        return 0j
    omega = complex(omega)
    scale = 1.0
    res = integrate_polyline(
        lambda s: np.exp(omega * s.real) * np.asarray(g(s.real), dtype=complex),
        [0.0, complex(t)],
        tol * scale,
    )
    return complex(res.value[0]), float(res.error[0]), res.converged
