"""Dispersion branches, branch points and symmetries of det(w I - Lambda(k)) = 0.

Everything here works from the bivariate coefficient array of the
dispersion polynomial, so systems given only by their dispersion relation
are handled by the same code as systems given by a symbol matrix.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    BranchTrackingError,
    DiscriminantError,
    LabelingError,
    SymmetryTrackingError,
)
from .symbol import PolynomialMatrix, bideriv_w, bieval, bitrim

__all__ = [
    "BranchPoint",
    "BranchSet",
    "LabelAssignment",
    "Symmetry",
    "SymmetrySet",
    "asymptotic_labels",
    "branch_points",
    "branches_at",
    "find_symmetries",
    "nontrivial_roots",
    "polynomial_roots",
    "symmetries_from_dispersion",
]


# -- root finding ------------------------------------------------------------

def polynomial_roots(coeffs):
    """Roots of polynomials with ascending coefficients along the last axis.

    Batched companion-matrix eigenvalues.  The leading coefficient must be
    nonzero; entries beyond the true degree should already be trimmed.
    """
    a = np.asarray(coeffs, dtype=complex)
    d = a.shape[-1] - 1
    if d < 1:
        return np.zeros(a.shape[:-1] + (0,), dtype=complex)
    lead = a[..., -1]
    lead = np.where(lead == 0, 1e-300, lead)
    b = a[..., :-1] / lead[..., None]
    if d == 2:
        # stable quadratic formula: the larger root first, the other from Vieta
        p, c = b[..., 1], b[..., 0]
        sq = np.sqrt(p * p - 4 * c)
        sq = np.where((np.conj(p) * sq).real < 0, -sq, sq)
        q = -(p + sq) / 2
        safe = np.where(q == 0, 1.0, q)
        return np.stack([q, np.where(q == 0, 0.0, c / safe)], axis=-1)
    comp = np.zeros(a.shape[:-1] + (d, d), dtype=complex)
    if d > 1:
        idx = np.arange(d - 1)
        comp[..., idx + 1, idx] = 1.0
    comp[..., :, -1] = -b
    return np.linalg.eigvals(comp)


def _omega_coeffs(C, k):
    k = np.asarray(k, dtype=complex)
    return np.stack([np.polynomial.polynomial.polyval(k, C[:, b]) for b in range(C.shape[1])], axis=-1)


def _nu_coeffs(C, w):
    w = np.asarray(w, dtype=complex)
    return np.stack([np.polynomial.polynomial.polyval(w, C[a, :]) for a in range(C.shape[0])], axis=-1)


def _polish(C, Cw, k, w):
    k = np.asarray(k, dtype=complex)[..., None]
    p = bieval(C, k, w)
    dp = bieval(Cw, k, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(dp != 0, p / dp, 0)
    w2 = w - step
    better = np.abs(bieval(C, k, w2)) < np.abs(p)
    return np.where(better & np.isfinite(w2), w2, w)


def _gap(values):
    v = np.asarray(values)
    if v.size < 2:
        return np.inf
    d = np.abs(v[:, None] - v[None, :])
    d[np.diag_indices(len(v))] = np.inf
    return d.min()


def _match(prev, new):
    """Reorder ``new`` to follow ``prev``; returns (ordered, max displacement)."""
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(new)
    out[rows] = new[cols]
    return out, cost[rows, cols].max() if len(rows) else 0.0


def _continue(solve, points, state, error=BranchTrackingError, hmin=1e-10):
    """Adaptive continuation of ``state`` along a polyline of points.

    ``solve(z, state)`` returns ``(new_state, ok)``; rejected steps are halved.
    """
    for z0, z1 in zip(points[:-1], points[1:]):
        if z0 == z1:
            continue
        s, h = 0.0, 1.0 / 16
        while s < 1.0:
            h = min(h, 1.0 - s)
            z = z0 + (s + h) * (z1 - z0)
            new, ok = solve(z, state)
            if ok:
                state, s = new, s + h
                h = min(2 * h, 0.25)
            else:
                h /= 2
                if h < hmin:
                    if error is SymmetryTrackingError:
                        raise SymmetryTrackingError(f"symmetry roots collide near k={z:.6g}", k=z)
                    raise error(f"root continuation stalled near k={z:.6g}")
    return state


# -- branch points -----------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    """A root of the discriminant, tagged 'branching' or 'collision'."""

    k: complex
    kind: str
    permutation: tuple = ()


def _discriminant_samples(C, N, z):
    roots = polynomial_roots(_omega_coeffs(C, z))
    out = np.ones(z.shape, dtype=complex)
    for i in range(N):
        for j in range(i + 1, N):
            out *= (roots[..., i] - roots[..., j]) ** 2
    return out


def _find_branch_points(C, N):
    if N < 2:
        return []
    kdeg = C.shape[0] - 1
    D = (2 * N - 2) * kdeg
    if D == 0:
        return []
    M = 1 << int(np.ceil(np.log2(4 * (D + 1))))
    z = np.exp(2j * np.pi * np.arange(M) / M)
    vals = _discriminant_samples(C, N, z)
    coef = np.fft.fft(vals) / M
    scale = np.abs(coef).max()
    if scale < 1e-14:
        raise DiscriminantError("discriminant vanishes identically: branches coincide everywhere")
    coef = coef[: D + 1]
    coef[np.abs(coef) < 1e-11 * scale] = 0
    nz = np.nonzero(coef)[0]
    lo, hi = nz[0], nz[-1]
    pts = list(np.zeros(lo, dtype=complex))
    if hi > lo:
        pts += list(np.roots(coef[lo : hi + 1][::-1]))
    clusters = []
    for p in pts:
        for c in clusters:
            if abs(np.mean(c) - p) < 1e-6 * max(1.0, abs(p)) or abs(np.mean(c) - p) < 1e-5:
                c.append(p)
                break
        else:
            clusters.append([p])
    centers = [complex(np.mean(c)) for c in clusters]
    return sorted(centers, key=lambda c: (round(c.real, 9), round(c.imag, 9)))


def _monodromy(C, centers, idx, npts=64):
    b = centers[idx]
    others = [abs(b - c) for j, c in enumerate(centers) if j != idx]
    r = 0.05 * min(others) if others else 0.05 * max(1.0, abs(b))
    loop = b + r * np.exp(2j * np.pi * np.arange(npts + 1) / npts)
    start = polynomial_roots(_omega_coeffs(C, loop[0]))
    state = start
    for z in loop[1:]:
        state, _ = _match(state, polynomial_roots(_omega_coeffs(C, z)))
    perm = []
    for v in state:
        perm.append(int(np.argmin(np.abs(start - v))))
    return tuple(perm)


# -- labeling ----------------------------------------------------------------

@dataclass(frozen=True)
class LabelAssignment:
    """Leading behaviour Omega_j ~ c_j k**p_j along ``direction``, in label order."""

    direction: complex
    exponents: tuple
    coefficients: tuple
    radius: float
    anchor_values: tuple = field(repr=False, default=())

    def describe(self):
        parts = []
        for j, (p, c) in enumerate(zip(self.exponents, self.coefficients)):
            parts.append(f"Omega_{j + 1} ~ ({c:.4g}) k^{p}")
        return "; ".join(parts)


class BranchSet:
    """The N roots Omega_j(k) of the dispersion relation with a fixed labeling.

    Labels are assigned on the positive real axis at the anchor radius by
    :func:`asymptotic_labels` and carried to other k by continuation along
    the straight segment from the anchor, bypassing branch points on the
    side the segment passes them.

    Parameters
    ----------
    source : PolynomialMatrix or array_like
        The symbol, or the bivariate coefficient array ``C[a, b]`` of the
        dispersion polynomial ``sum C[a, b] k**a w**b`` (monic in w is not
        required).
    """

    def __init__(self, source, labels_direction=1.0):
        if isinstance(source, PolynomialMatrix):
            C = source.bivariate_char_poly()
            self.symbol = source
        else:
            C = bitrim(np.asarray(source, dtype=complex))
            self.symbol = None
        if C.shape[1] < 2:
            raise ValueError("dispersion polynomial must depend on w")
        self.dispersion = np.array(C, dtype=complex)
        self.dispersion.setflags(write=False)
        self._Cw = bideriv_w(self.dispersion)
        self.size = C.shape[1] - 1
        self._centers = _find_branch_points(self.dispersion, self.size)
        self._points = None
        bmax = max((abs(c) for c in self._centers), default=0.0)
        self.anchor_radius = 10.0 * (1.0 + bmax)
        if len(self._centers) > 1:
            dmin = min(abs(a - b) for i, a in enumerate(self._centers) for b in self._centers[i + 1 :])
            self.detour_radius = min(0.1, 0.25 * dmin)
        else:
            self.detour_radius = 0.1
        self.labels = asymptotic_labels(self, labels_direction)
        self.anchor = self.labels.direction * self.labels.radius
        self._anchor_values = np.array(self.labels.anchor_values, dtype=complex)

    # unlabeled evaluation
    def roots(self, k):
        """Branch values at k in no particular order (vectorized)."""
        k = np.asarray(k, dtype=complex)
        w = polynomial_roots(_omega_coeffs(self.dispersion, k))
        return _polish(self.dispersion, self._Cw, k, w)

    @property
    def branch_points(self):
        if self._points is None:
            pts = []
            for i, c in enumerate(self._centers):
                perm = _monodromy(self.dispersion, self._centers, i)
                kind = "collision" if perm == tuple(range(self.size)) else "branching"
                pts.append(BranchPoint(c, kind, perm))
            self._points = pts
        return list(self._points)

    def _solve(self, z, state):
        new, disp = _match(state, self.roots(z))
        return new, disp < 0.25 * _gap(state)

    def _route(self, k):
        """Waypoints from the anchor to k, bypassing branch points."""
        z0 = complex(self.anchor)
        k = complex(k)
        delta = self.detour_radius
        u = k - z0
        L = abs(u)
        if L == 0:
            return [z0], None
        u /= L
        hits = []
        for b in self._centers:
            s = ((b - z0) * np.conj(u)).real
            s_cl = min(max(s, 0.0), L)
            c = z0 + s_cl * u
            d = abs(c - b)
            if d < delta:
                hits.append((s, b, c, d))
        hits.sort(key=lambda h: h[0])
        pts = [z0]
        at_point = None
        for s, b, c, d in hits:
            perp = ((b - z0) * np.conj(1j * u)).real
            half = np.sqrt(max(delta**2 - perp**2, 0.0))
            e1 = z0 + (s - half) * u
            s_exit = s + half
            end_inside = s_exit >= L
            if abs(k - b) < 1e-6 * delta:
                pts.append(e1)
                at_point = k
                return pts, at_point
            target = k if end_inside else z0 + s_exit * u
            n = c - b
            if abs(n) < 1e-14 * max(1.0, abs(b)):
                n = 1j * u
            th1 = np.angle(e1 - b)
            th2 = np.angle(target - b)
            thn = np.angle(n)
            ccw = (th2 - th1) % (2 * np.pi)
            if end_inside and abs(c - k) < 1e-15 + 1e-12 * abs(k):
                # closest approach is the endpoint itself: take the shorter arc
                sweep = ccw if ccw <= np.pi else ccw - 2 * np.pi
            elif (thn - th1) % (2 * np.pi) <= ccw:
                sweep = ccw
            else:
                sweep = ccw - 2 * np.pi
            nseg = max(4, int(np.ceil(abs(sweep) / (np.pi / 8))))
            th = th1 + sweep * np.arange(nseg + 1) / nseg
            arc = list(b + delta * np.exp(1j * th))
            pts.append(e1)
            pts.extend(arc[1:])
            if end_inside:
                pts.append(k)
                return pts, None
        pts.append(k)
        return pts, None

    def branches_at(self, k):
        """Labeled branch values at a single k (length-N array)."""
        pts, at_point = self._route(k)
        state = _continue(self._solve, pts, self._anchor_values.copy())
        if at_point is not None:
            state, _ = _match(state, self.roots(at_point))
        return state

    def branches_along(self, points):
        """Labeled values along a polyline, continued from the first point.

        Returns an array of shape (len(points), N).
        """
        points = [complex(p) for p in points]
        state = self.branches_at(points[0])
        out = [state]
        for z0, z1 in zip(points[:-1], points[1:]):
            state = _continue(self._solve, [z0, z1], state)
            out.append(state)
        return np.array(out)

    def __call__(self, k):
        return self.branches_at(k)


def branches_at(B, k):
    return B.branches_at(k)


def branch_points(B):
    return B.branch_points


def _exponent(r1, r2, v1, v2, N):
    a1, a2 = abs(v1), abs(v2)
    if a1 < 1e-200 or a2 < 1e-200:
        return None
    p = np.log(a2 / a1) / np.log(r2 / r1)
    return Fraction(int(round(p * N)), N)


def asymptotic_labels(B, direction=1.0):
    """Order the branches by leading behaviour c k**p along a ray.

    Branches are sorted by decreasing exponent p, then decreasing Re c, then
    decreasing Im c.  Raises LabelingError when two branches share both.
    """
    direction = complex(direction)
    direction /= abs(direction)
    R = B.anchor_radius
    z1, z2 = R * direction, 2 * R * direction
    v1 = B.roots(z1)
    state = _continue(B._solve, [z1, z2], v1.copy())
    N = B.size
    items = []
    for j in range(N):
        p = _exponent(R, 2 * R, v1[j], state[j], N)
        if p is None:
            c = 0j
        else:
            c = complex(state[j] / z2 ** float(p))
        items.append((p, c, j))

    def cmp(x, y):
        px = x[0] if x[0] is not None else Fraction(-10**9)
        py = y[0] if y[0] is not None else Fraction(-10**9)
        if px != py:
            return -1 if px > py else 1
        tol = 1e-2 * max(1.0, abs(x[1]), abs(y[1]))
        if abs(x[1].real - y[1].real) > tol:
            return -1 if x[1].real > y[1].real else 1
        if abs(x[1].imag - y[1].imag) > tol:
            return -1 if x[1].imag > y[1].imag else 1
        raise LabelingError(
            f"branches {x[2] + 1} and {y[2] + 1} share leading behaviour {x[1]:.4g} k^{px}"
        )

    order = sorted(items, key=cmp_to_key(cmp))
    return LabelAssignment(
        direction=direction,
        exponents=tuple(o[0] for o in order),
        coefficients=tuple(o[1] for o in order),
        radius=R,
        anchor_values=tuple(v1[o[2]] for o in order),
    )


# -- symmetries --------------------------------------------------------------

def nu_roots(C, w):
    """All nu with P(nu, w) = 0, vectorized over w; shape w.shape + (deg_k,)."""
    return polynomial_roots(_nu_coeffs(C, w))


def nontrivial_roots(C, k, w):
    """Roots nu of P(nu, w) = 0 other than nu = k, where w is a branch value at k.

    Label-free and vectorized: the root nearest to k is removed.
    """
    k = np.asarray(k, dtype=complex)
    nus = nu_roots(C, w)
    drop = np.argmin(np.abs(nus - k[..., None]), axis=-1)
    keep = np.ones(nus.shape, dtype=bool)
    np.put_along_axis(keep, drop[..., None], False, axis=-1)
    return nus[keep].reshape(nus.shape[:-1] + (nus.shape[-1] - 1,))


@dataclass
class Symmetry:
    """One symmetry nu(k), stored by its values on the tracking samples."""

    samples: np.ndarray
    values: np.ndarray
    branches: list
    slot: int = 0

    @property
    def is_identity(self):
        return bool(np.all(np.abs(self.values - self.samples) <= 1e-8 * (1 + np.abs(self.samples))))

    @property
    def multiplicity(self):
        return len(self.branches)

    @property
    def ratio(self):
        r = self.values / self.samples
        if np.all(np.abs(r - r[0]) <= 1e-8 * (1 + abs(r[0]))):
            return complex(r[0])
        return None

    def describe(self):
        r = self.ratio
        if r is None:
            text = "nu(k)"
        elif abs(r - 1) < 1e-8:
            text = "k"
        elif abs(r + 1) < 1e-8:
            text = "-k"
        elif abs(r.imag) < 1e-12 * max(1.0, abs(r)):
            text = f"{r.real:.10g}*k"
        else:
            text = f"({r.real:.10g}{r.imag:+.10g}j)*k"
        if self.multiplicity > 1:
            text += f" (x{self.multiplicity})"
        return text


class SymmetrySet:
    """Symmetries nu_l of the dispersion relation with their branch maps.

    ``permutation[l][j]`` is the label n with Omega_j(nu_l(k)) = Omega_n(k),
    or None when Omega_j(nu_l(k)) is not a branch value at k.
    """

    def __init__(self, branches, samples, omegas, nus, symmetries, permutation):
        self.branches = branches
        self.samples = samples
        self._omegas = omegas
        self._nus = nus
        self.symmetries = symmetries
        self.permutation = permutation

    def __len__(self):
        return len(self.symmetries)

    def __getitem__(self, l):
        return self.symmetries[l]

    def describe(self):
        return [s.describe() for s in self.symmetries]

    def for_branch(self, n):
        """The symmetries nu with P(nu(k), Omega_n(k)) = 0, i.e. those acting on branch n."""
        return [s for s in self.symmetries if n in s.branches]

    def _solver(self):
        C = self.branches.dispersion

        def solve(z, state):
            om, nus = state
            new_om, disp = _match(om, self.branches.roots(z))
            if not disp < 0.25 * _gap(om):
                return state, False
            rows = nu_roots(C, new_om)
            new_nus = np.empty_like(nus)
            for n in range(len(om)):
                new_nus[n], d = _match(nus[n], rows[n])
                if not d < 0.25 * _gap(nus[n]):
                    return state, False
            return (new_om, new_nus), True

        return solve

    def evaluate(self, l, k):
        """nu_l(k), continued from the first tracking sample."""
        sym = self.symmetries[l]
        state = (self._omegas[0], self._nus[0])
        om, nus = _continue(self._solver(), [complex(self.samples[0]), complex(k)], state, SymmetryTrackingError)
        return nus[sym.branches[0], sym.slot]

    def valid(self, l, k):
        """Whether Im nu_l(k) <= 0, i.e. Q0-hat is defined at nu_l(k)."""
        return self.evaluate(l, k).imag <= 0

    def residual(self, l, j_sample):
        """|P(nu_l(k), Omega_n(k))| at one tracking sample, for each generating branch n."""
        C = self.branches.dispersion
        sym = self.symmetries[l]
        return [abs(bieval(C, sym.values[j_sample], self._omegas[j_sample, n])) for n in sym.branches]

    def branch_values(self, j_sample):
        return self._omegas[j_sample].copy()


def default_samples(B, count=40):
    s0 = 1.0 + max((abs(c) for c in B._centers), default=0.0)
    return s0 * ((1.2 - 0.1j) + (1.2 - 0.1j) * np.linspace(0, 1, count))


def _build_symmetries(B, samples):
    samples = np.asarray(samples, dtype=complex)
    C = B.dispersion
    om0 = B.branches_at(samples[0])
    nus0 = nu_roots(C, om0)
    S = len(samples)
    N = B.size
    omegas = np.empty((S, N), dtype=complex)
    nus = np.empty((S,) + nus0.shape, dtype=complex)
    omegas[0], nus[0] = om0, nus0
    tmp = SymmetrySet(B, samples, None, None, [], [])
    solve = tmp._solver()
    state = (om0, nus0)
    for s in range(1, S):
        state = _continue(solve, [samples[s - 1], samples[s]], state, SymmetryTrackingError)
        omegas[s], nus[s] = state

    syms = []
    for n in range(N):
        for d in range(nus.shape[2]):
            seq = nus[:, n, d]
            for sym in syms:
                if np.all(np.abs(sym.values - seq) <= 1e-7 * (1 + np.abs(seq))):
                    sym.branches.append(n)
                    break
            else:
                syms.append(Symmetry(samples, seq.copy(), [n], d))
    syms.sort(key=lambda s: 0 if s.is_identity else 1)

    mid = S // 2
    perm = []
    for sym in syms:
        v = sym.values[mid]
        at_nu = B.branches_at(v)
        row = []
        for j in range(N):
            dist = np.abs(omegas[mid] - at_nu[j])
            n = int(np.argmin(dist))
            ok = dist[n] <= 1e-6 * (1 + abs(at_nu[j]))
            row.append(n if ok else None)
        perm.append(tuple(row))
    return SymmetrySet(B, samples, omegas, nus, syms, perm)


def find_symmetries(M, B, samples=None):
    """Symmetries of det(Lambda(nu) - Omega_j(k) I) = 0 by continuation.

    ``M`` is accepted for interface symmetry with the rest of the package;
    the dispersion polynomial carried by ``B`` is what is used.
    """
    if samples is None:
        samples = default_samples(B)
    return _build_symmetries(B, samples)


def symmetries_from_dispersion(P, samples=None):
    """Symmetries from a bivariate dispersion polynomial ``P[a, b]`` (k**a w**b)."""
    B = BranchSet(P)
    if samples is None:
        samples = default_samples(B)
    return _build_symmetries(B, samples)
