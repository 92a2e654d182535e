"""The region D+ where some Re Omega_j < 0 in the upper half plane, and integration paths.

Paths are polylines.  An infinite path has a core polyline inside
``|k| <= core_radius`` and two arms that can be extended on demand; the
quadrature layer asks for the piece of each arm between two radii.
"""

from dataclasses import dataclass

import numpy as np
from skimage import measure

from .dispersion import BranchSet
from .errors import TopologyError
from .symbol import PolynomialMatrix, bideriv_k, bideriv_w, bieval

__all__ = [
    "ContourPath",
    "DecayReport",
    "Region",
    "boundary_path",
    "decay_certificate",
    "in_D_plus",
    "real_line",
    "shifted_path",
]

DEFAULT_KMAX = 1.0e4


class Region:
    """D+ = union over j of {Im k > 0, Re Omega_j(k) < 0}.

    Membership only needs min_j Re Omega_j, which does not depend on how
    the branches are labeled.
    """

    description = "union over j of {Im k > 0, Re Omega_j(k) < 0}"

    def __init__(self, branches):
        if isinstance(branches, PolynomialMatrix):
            branches = BranchSet(branches)
        self.branches = branches
        C = branches.dispersion
        self._C, self._Ck, self._Cw = C, bideriv_k(C), bideriv_w(C)

    def min_real(self, k):
        """min_j Re Omega_j(k), vectorized."""
        return self.branches.roots(k).real.min(axis=-1)

    def contains(self, k, zero_tol=0.0):
        k = np.asarray(k, dtype=complex)
        return (k.imag > 0) & (self.min_real(k) < -zero_tol)

    def __call__(self, k):
        return self.contains(k)

    def _level(self, k):
        """(Re Omega, Omega') for the branch of smallest real part at scalar k."""
        roots = self.branches.roots(k)
        j = int(np.argmin(roots.real))
        w = roots[j]
        dk = bieval(self._Ck, k, w)
        dw = bieval(self._Cw, k, w)
        return w.real, complex(-dk / dw)

    def refine(self, k, iters=6):
        """Newton-project k onto the level set Re Omega = 0."""
        k = complex(k)
        for _ in range(iters):
            g, d = self._level(k)
            if d == 0:
                break
            step = -g * np.conj(d) / abs(d) ** 2
            k += step
            if abs(step) < 1e-14 * (1 + abs(k)):
                break
        return k


def in_D_plus(R, k):
    """True iff Im k > 0 and min_j Re Omega_j(k) < 0."""
    return R.contains(k)


def _radius_cut(arm, r):
    """Point on an outward polyline where |z| first reaches r (linear interpolation)."""
    rad = np.abs(arm)
    idx = np.nonzero(rad >= r)[0]
    if idx.size == 0:
        return None, None
    i = idx[0]
    if i == 0:
        return 0, arm[0]
    r0, r1 = rad[i - 1], rad[i]
    s = (r - r0) / (r1 - r0) if r1 != r0 else 1.0
    return i, arm[i - 1] + s * (arm[i] - arm[i - 1])


class ContourPath:
    """Polyline path in C with optional extendable arms.

    Parameters
    ----------
    vertices : array_like
        Core polyline, in the direction of integration.
    core_radius : float, optional
        Radius at which the arms begin; None for a finite path.
    arms : pair of callables, optional
        ``arms[end](r)`` returns an outward polyline from the core end
        (end 0 = start, end 1 = finish) reaching at least radius r.
    singularities : sequence
        Points the path was built to avoid, or removable points on it.
    """

    def __init__(self, vertices, core_radius=None, arms=None, K_max=DEFAULT_KMAX,
                 singularities=(), kind="polyline"):
        self.vertices = np.asarray(vertices, dtype=complex)
        self.core_radius = core_radius
        self._arms = arms
        self._arm_cache = [None, None]
        self.K_max = K_max
        self.singularities = tuple(complex(s) for s in singularities)
        self.kind = kind

    @property
    def infinite(self):
        return self.core_radius is not None

    def arm(self, end, r):
        cached = self._arm_cache[end]
        if cached is None or np.abs(cached[-1]) < r:
            cached = np.asarray(self._arms[end](r), dtype=complex)
            self._arm_cache[end] = cached
        return cached

    def tail(self, end, r1, r2):
        """Arm piece between radii r1 < r2, oriented along the path."""
        arm = self.arm(end, r2)
        i1, p1 = _radius_cut(arm, r1)
        i2, p2 = _radius_cut(arm, r2)
        if i1 is None:
            return np.array([arm[-1], arm[-1]])
        if i2 is None:
            i2, p2 = len(arm), arm[-1]
        piece = np.concatenate([[p1], arm[i1:i2], [p2]])
        return piece[::-1] if end == 0 else piece

    def sample(self, radius=None, count=2000):
        """Points along the path out to ``radius`` (for plotting and tests)."""
        pts = [self.vertices]
        if self.infinite and radius is not None and radius > self.core_radius:
            pts = [self.tail(0, self.core_radius, radius)[:-1], self.vertices, self.tail(1, self.core_radius, radius)[1:]]
        poly = np.concatenate(pts)
        seg = np.abs(np.diff(poly))
        s = np.concatenate([[0], np.cumsum(seg)])
        u = np.linspace(0, s[-1], count)
        return np.interp(u, s, poly.real) + 1j * np.interp(u, s, poly.imag)

    def __repr__(self):
        return f"ContourPath(kind={self.kind!r}, vertices={len(self.vertices)}, core_radius={self.core_radius})"


def real_line(core_radius=16.0, K_max=DEFAULT_KMAX, breakpoints=()):
    """The real axis, left to right."""
    pts = sorted({-core_radius, core_radius, *[float(b) for b in breakpoints if abs(b) < core_radius]})
    arms = (lambda r: np.array([-core_radius, -r], dtype=complex),
            lambda r: np.array([core_radius, r], dtype=complex))
    return ContourPath(np.array(pts, dtype=complex), core_radius, arms, K_max, kind="real-line")


def _trace_arm(R, start, direction_hint, r_target, hmax_rel=0.05):
    """Follow Re Omega = 0 outward from ``start`` until |k| >= r_target."""
    pts = [complex(start)]
    k = complex(start)
    prev_dir = complex(direction_hint)
    while abs(k) < r_target:
        _, d = R._level(k)
        tan = 1j * np.conj(d)
        tan /= abs(tan)
        if (tan * np.conj(prev_dir)).real < 0:
            tan = -tan
        h = hmax_rel * max(abs(k), 1.0)
        for _ in range(30):
            cand = R.refine(k + h * tan)
            if abs(cand) > abs(k) and abs(cand - (k + h * tan)) < 0.2 * h:
                break
            h /= 2
        else:
            raise TopologyError(f"could not continue the D+ boundary beyond k={k:.6g}")
        prev_dir = (cand - k) / abs(cand - k)
        k = cand
        pts.append(k)
    return np.array(pts)


def boundary_path(R, K_max=DEFAULT_KMAX, box=None, resolution=241):
    """The boundary of D+ traversed with D+ on the left, truncated at K_max.

    Returns the real line when D+ is the whole upper half plane or empty.
    The boundary is located by marching squares on a sign grid of
    min_j Re Omega_j, Newton-refined, and extended outward by level-set
    continuation.
    """
    if not isinstance(R, Region):
        R = Region(R)
    bmax = max((abs(b.k) for b in R.branches.branch_points), default=0.0)
    if box is None:
        box = max(8.0, 4.0 * (1.0 + bmax))
    h = 2 * box / (resolution - 1)
    xs = np.linspace(-box, box, resolution)
    ys = np.concatenate([[-h], np.arange(1, resolution) * h])
    ys = ys[ys <= box + 1e-12]
    K = xs[None, :] + 1j * ys[:, None]
    F = R.min_real(K)
    zero_tol = 1e-9 * (1 + np.abs(K))
    F = np.where(np.abs(F) <= zero_tol, -zero_tol, F)
    F[0, :] = 1.0
    upper = F[1:, :]
    if np.all(upper < 0):
        return real_line(K_max=K_max)._with_kind("real-line (D+ is the upper half plane)")
    if np.all(upper > 0):
        return real_line(K_max=K_max)._with_kind("real-line (D+ is empty)")
    contours = measure.find_contours(F, 0.0)
    curves = []
    for c in contours:
        z = np.interp(c[:, 1], np.arange(xs.size), xs) + 1j * np.interp(c[:, 0], np.arange(ys.size), ys)
        if len(z) < 4:
            continue
        closed = abs(z[0] - z[-1]) < 1e-9
        if closed:
            raise TopologyError("D+ has a bounded component; only boundaries reaching infinity are supported")
        curves.append(z)
    if len(curves) != 1:
        raise TopologyError(f"expected one boundary curve of D+, found {len(curves)}")
    z = curves[0]
    z = np.array([complex(p.real, 0.0) if p.imag <= 0 else R.refine(p) for p in z])
    # orient with D+ on the left
    mid = len(z) // 2
    t = z[min(mid + 1, len(z) - 1)] - z[max(mid - 1, 0)]
    probe = z[mid] + 1e-3 * 1j * t / abs(t)
    if not R.contains(probe):
        z = z[::-1]
    for end in (0, -1):
        p = z[end]
        if abs(p.real) < box - 2 * h and p.imag < box - 2 * h:
            raise TopologyError("boundary of D+ ends inside the scan box")
    core_r = 0.9 * box
    inside = np.abs(z) <= core_r
    idx = np.nonzero(inside)[0]
    if idx.size == 0:
        raise TopologyError("boundary of D+ does not enter the core disk")
    i0, i1 = idx[0], idx[-1]
    if not np.all(inside[i0 : i1 + 1]):
        raise TopologyError("boundary of D+ re-enters the core disk")

    def cut(a, b):
        ra, rb = abs(a), abs(b)
        s = (core_r - ra) / (rb - ra)
        return R.refine(a + s * (b - a))

    p_start = cut(z[i0], z[i0 - 1]) if i0 > 0 else z[0]
    p_end = cut(z[i1], z[i1 + 1]) if i1 < len(z) - 1 else z[-1]
    core = np.concatenate([[p_start], z[i0 : i1 + 1], [p_end]])
    pre = np.concatenate([[p_start], z[:i0][::-1]]) if i0 > 0 else np.array([p_start])
    post = np.concatenate([[p_end], z[i1 + 1 :]]) if i1 < len(z) - 1 else np.array([p_end])

    def make_arm(seed):
        cache = {"pts": seed}

        def arm(r):
            pts = cache["pts"]
            if abs(pts[-1]) < r:
                hint = pts[-1] - pts[-2] if len(pts) > 1 else pts[-1]
                more = _trace_arm(R, pts[-1], hint, r)
                pts = np.concatenate([pts, more[1:]])
                cache["pts"] = pts
            return pts

        return arm

    return ContourPath(core, core_r, (make_arm(pre), make_arm(post)), K_max, kind="boundary of D+")


def _with_kind(self, kind):
    self.kind = kind
    return self


ContourPath._with_kind = _with_kind


def shifted_path(base, avoid, side="above", reach=2.0):
    """Insert a detour so the path passes ``side`` of the point ``avoid``.

    Only real-line bases are supported.  The detour rises vertically at
    Re avoid -/+ r, goes round ``avoid`` on a semicircle of radius
    r = min(0.1, |Im avoid|/2) and comes back down.  Points already on the
    requested side, or further than ``reach`` from the base, leave it unchanged.
    """
    if not base.kind.startswith("real-line"):
        raise ValueError("shifted_path supports real-line bases")
    avoid = complex(avoid)
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    height = avoid.imag
    needs = height > 0 if side == "above" else height < 0
    if not needs or abs(height) > reach:
        return base
    r = min(0.1, abs(height) / 2)
    if r <= 0:
        raise ValueError("detour radius must be positive")
    x0 = avoid.real
    sgn = 1.0 if side == "above" else -1.0
    th = np.linspace(np.pi, 0.0, 25) if side == "above" else np.linspace(-np.pi, 0.0, 25)
    arc = avoid + r * np.exp(1j * th)
    bump = np.concatenate([[x0 - r], arc, [x0 + r]])
    v = base.vertices
    left = v[v.real < x0 - r]
    right = v[v.real > x0 + r]
    verts = np.concatenate([left, bump, right])
    arms = base._arms
    path = ContourPath(verts, base.core_radius, arms, base.K_max,
                       singularities=base.singularities + (avoid,), kind="real-line shifted " + side)
    return path


def damped_path(R, base, ratio=0.5, check_radius=64.0):
    """``base`` with its imaginary parts scaled by ``ratio``.

    For base = boundary of D+, the scaled path runs through the upper half
    plane outside D+, where every Re Omega_j >= 0: an integrand analytic and
    bounded there may be moved onto it, and its exp(-Omega_j t) factors
    decay rather than oscillate.  Returns ``base`` when it is the real line
    or when the scaled path would cut into D+.
    """
    if np.all(base.vertices.imag == 0):
        return base

    def scale(p):
        p = np.asarray(p, dtype=complex)
        return p.real + 1j * ratio * p.imag

    verts = scale(base.vertices)
    core = max(abs(verts[0]), abs(verts[-1])) if base.infinite else None
    arms = None
    if base.infinite:
        arms = tuple((lambda r, e=e: scale(base.arm(e, r / ratio))) for e in (0, 1))
    path = ContourPath(verts, core, arms, base.K_max, base.singularities, kind=base.kind + ", damped")
    pts = path.sample(radius=check_radius if path.infinite else None)
    if np.any(R.min_real(pts[pts.imag > 0]) < -1e-12):
        return base
    return path


@dataclass
class DecayReport:
    passed: bool
    radii: np.ndarray
    magnitudes: np.ndarray
    tol: float

    def __bool__(self):
        return self.passed


def decay_certificate(F, sector=(0.0, np.pi), samples=8, tol=1e-3, r0=4.0, angles=17):
    """Check that max |F| on arcs R e^{i theta} decreases monotonically below tol."""
    th = np.linspace(sector[0], sector[1], angles)
    radii = r0 * 2.0 ** np.arange(samples)
    mags = np.array([np.max(np.abs(F(R * np.exp(1j * th)))) for R in radii])
    ok = bool(np.all(np.isfinite(mags)) and np.all(np.diff(mags) < 0) and mags[-1] < tol)
    return DecayReport(ok, radii, mags, tol)
