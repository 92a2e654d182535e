"""Generic pipeline: global relations, symmetry elimination and the solution integrals.

For Q_t + Lambda(-i d/dx) Q = 0 on x > 0 the half-line transform obeys

    Q-hat_t = -Lambda(k) Q-hat - sum_s c_s(k) d^s Q/dx^s (0, t),

with c_s the coefficients of the divided-difference operator X.  Projecting
on a left eigenvector w_j of Lambda(k) gives one global relation per branch,

    w_j Q0-hat(k) - sum_(c,s) w_j c_s(k)[:, c] g[c,s,j] = exp(Omega_j t) w_j Q-hat(k, t),

where g[c,s,j] = int_0^t exp(Omega_j s) d^s Q_c/dx^s (0, s) ds.  A symmetry
nu with Omega_n(nu(k)) = Omega_j(k) turns the relation at nu(k) on branch n
into a second equation for the same g[., ., j]; it is usable where
Im nu(k) <= 0.  In the solution formula the unknown g are replaced by their
solution of these equations, and the remaining Q-hat(nu(k), t) terms
integrate to zero.
"""

from dataclasses import dataclass, field

import numpy as np

from ..contour import Region, boundary_path, damped_path, decay_certificate, real_line
from ..dispersion import BranchSet, find_symmetries
from ..errors import SingularSystemError, UnsupportedCaseError
from ..symbol import left_null_vectors, x_operator
from ..transforms import half_line_ft
from ..quadrature import exp_convolve
from .integrands import FieldEvaluator, PairAlgebra, Term, static_pair
from .problem import SolutionField, as_grid


def function_name(names, c, s):
    return names[c] + ("_" + "x" * s if s else "")


def boundary_functions(M):
    """(component, derivative order) pairs of boundary values entering the global relation."""
    return x_operator(M).columns_used()


def slaved_components(M):
    """{c: (r, lam)} when row r of Lambda is constant with a single nonzero entry lam in column c.

    Then Q_c = -(1/lam) d/dt Q_r, so the boundary values of Q_c follow from
    those of Q_r.
    """
    C = M.coefficients
    out = {}
    for r in range(M.size):
        if np.any(C[r, :, 1:] != 0):
            continue
        nz = np.nonzero(C[r, :, 0])[0]
        if len(nz) == 1 and nz[0] != r:
            out.setdefault(int(nz[0]), (r, complex(C[r, nz[0], 0])))
    return out


def independent_functions(M):
    F = boundary_functions(M)
    sl = slaved_components(M)
    return [(c, s) for c, s in F if not (c in sl and (sl[c][0], s) in F)]


def evaluation_contour(B):
    return boundary_path(Region(B))


def _contour_samples(path):
    pts = [path.vertices]
    if path.infinite:
        for end in (0, 1):
            pts.append(path.tail(end, path.core_radius, 4 * path.core_radius))
    return np.concatenate(pts)


def usable_symmetries(S, samples):
    """Indices of non-identity symmetries mapping every sample into Im <= 0."""
    samples = np.asarray(samples, dtype=complex)
    scale = 1e-9 * (1 + np.abs(samples).max())
    out = []
    for l, sym in enumerate(S.symmetries):
        if sym.is_identity:
            continue
        r = sym.ratio
        if r is not None:
            im = (r * samples).imag
        else:
            sub = samples[:: max(1, samples.size // 16)]
            im = np.array([S.evaluate(l, k).imag for k in sub])
        if np.all(im <= scale):
            out.append(l)
    return out


def relations_per_branch(S, usable):
    """For each branch label j, the (l, n) with perm[l][n] == j, i.e. Omega_n(nu_l(k)) = Omega_j(k)."""
    N = S.branches.size
    rel = [[] for _ in range(N)]
    for l in usable:
        for n, j in enumerate(S.permutation[l]):
            if j is not None:
                rel[j].append((l, n))
    return rel


def count_required_bcs(M, S, path=None):
    """Number of boundary conditions to prescribe, and a report of where they go.

    Counts the independent boundary functions per branch (values of slaved
    components are derivatives of others and do not count), minus the
    number of new global relations usable on the evaluation contour.
    """
    B = S.branches
    if path is None:
        path = evaluation_contour(B)
    F = boundary_functions(M)
    ind = independent_functions(M)
    usable = usable_symmetries(S, _contour_samples(path))
    rel = relations_per_branch(S, usable)
    r = min(len(x) for x in rel)
    required = max(len(ind) - r, 0)
    names = M.names
    comps = sorted({c for c, _ in ind}) if required else []
    report = {
        "functions": [function_name(names, c, s) for c, s in F],
        "independent": [function_name(names, c, s) for c, s in ind],
        "relations_per_branch": [len(x) for x in rel],
        "usable_symmetries": [S.symmetries[l].describe() for l in usable],
        "data_components": [names[c] for c in comps],
        "contour": path.kind,
    }
    return required, report


# -- boundary data --------------------------------------------------------------

def prescribed_functions(M, boundary):
    """{(c, s): (signal, derivative, factor)} for the boundary values known from the data.

    A value of a slaved component whose master value is prescribed is known
    too: it is ``factor`` times the time derivative of the master's data.
    """
    known = {}
    for bc in boundary:
        bc = bc.normalized()
        if bc.kind == "robin":
            raise UnsupportedCaseError("the generic pipeline handles Dirichlet and Neumann data only")
        s = 0 if bc.kind == "dirichlet" else 1
        known[(bc.component, s)] = (bc.data, False, 1.0)
    for c, (r, lam) in slaved_components(M).items():
        for (cc, s), (sig, deriv, fac) in list(known.items()):
            if cc == r and not deriv:
                known.setdefault((c, s), (sig, True, -fac / lam))
    return known


def _known_time_transform(entry, om, t, static=False):
    """int_0^t exp(-om (t - s)) h(s) ds for a prescribed boundary value, or its static part."""
    sig, deriv, fac = entry
    if sig is None or sig.is_zero:
        return None
    if static:
        return fac * static_pair(sig, om, t, deriv)
    return fac * exp_convolve(sig, om, [t], derivative=deriv)[0]


# -- the relation system at one point ------------------------------------------

@dataclass
class GlobalRelationSystem:
    """Global relations at one k, as linear equations for the unknown time transforms.

    Row i reads ``matrix[i] @ g = rhs[i] + solution_rows[i] @ Q-hat(points[i], t)``
    with g ordered as ``unknowns`` (component, derivative order, branch).
    Original rows (one per branch) hold for Im k <= 0, symmetry rows where
    Im nu(k) <= 0; ``valid`` records which hold at this k.
    """

    k: complex
    t: float
    unknowns: list
    matrix: np.ndarray
    rhs: np.ndarray
    points: np.ndarray
    solution_rows: np.ndarray
    valid: np.ndarray
    labels: list = field(default_factory=list)

    def symmetry_rows(self):
        return [i for i, lab in enumerate(self.labels) if lab[0] != "original" and self.valid[i]]

    def solve(self):
        """Unknowns from the valid symmetry rows, with the solution terms dropped."""
        rows = self.symmetry_rows()
        A = self.matrix[rows]
        b = self.rhs[rows]
        keep = np.any(A != 0, axis=0)
        if A.shape[0] < np.count_nonzero(keep):
            raise SingularSystemError(f"{A.shape[0]} usable rows for {np.count_nonzero(keep)} unknowns at k={self.k}")
        sol, _, rank, sv = np.linalg.lstsq(A[:, keep], b, rcond=None)
        if rank < np.count_nonzero(keep) or sv[-1] < 1e-12 * max(1.0, sv[0]):
            raise SingularSystemError(f"elimination matrix is singular at k={self.k}")
        g = np.zeros(len(self.unknowns), dtype=complex)
        g[keep] = sol
        return g


def _hat_values(functions, k):
    k = np.asarray(k, dtype=complex)
    out = np.zeros(k.shape + (len(functions),), dtype=complex)
    for c, f in enumerate(functions):
        if not f.is_zero:
            out[..., c] = half_line_ft(f, k)
    return out


def build_global_relations(P, B, S, k, t):
    """Original and symmetry-mapped global relations at k (labeled branches)."""
    M = P.system
    X = x_operator(M)
    k = complex(k)
    om = np.asarray(B.branches_at(k), dtype=complex)
    N = M.size
    F = boundary_functions(M)
    known = prescribed_functions(M, P.boundary)
    unknown_fns = [f for f in F if f not in known]
    unknowns = [(c, s, j) for c, s in unknown_fns for j in range(N)]
    gk = {}
    for f, entry in known.items():
        if f in F:
            H = _known_time_transform(entry, om, t)
            gk[f] = np.zeros(N, dtype=complex) if H is None else np.exp(om * t) * H

    rows, rhs, pts, sol, valid, labels = [], [], [], [], [], []

    def add_row(kappa, w, j, ok, label):
        a = np.zeros(len(unknowns), dtype=complex)
        for i, (c, s, jj) in enumerate(unknowns):
            if jj == j:
                a[i] = -w @ X.c(s, kappa)[:, c]
        r = -w @ _hat_values(P.initial, kappa)
        for (c, s), g in gk.items():
            r += (w @ X.c(s, kappa)[:, c]) * g[j]
        rows.append(a)
        rhs.append(r)
        pts.append(kappa)
        sol.append(np.exp(om[j] * t) * w)
        valid.append(ok)
        labels.append(label)

    for j in range(N):
        add_row(k, left_null_vectors(M, k, om[j]), j, k.imag <= 0, ("original", j))
    for l, sym in enumerate(S.symmetries):
        if sym.is_identity:
            continue
        kappa = complex(sym.ratio * k) if sym.ratio is not None else complex(S.evaluate(l, k))
        roots = B.roots(kappa)
        for j in range(N):
            if np.min(np.abs(roots - om[j])) <= 1e-7 * (1 + abs(om[j])):
                w = left_null_vectors(M, kappa, om[j])
                add_row(kappa, w, j, kappa.imag <= 1e-12 * (1 + abs(k)), (sym.describe(), j))
    return GlobalRelationSystem(k, float(t), unknowns, np.array(rows), np.array(rhs), np.array(pts),
                                np.array(sol), np.array(valid), labels)


# -- vectorized integrands ------------------------------------------------------

def branch_sum(Lk, om, Y):
    """sum_j P_j(k) Y_j with P_j the spectral projectors of Lambda(k).

    Lk is (P, N, N), om (P, N) and Y (P, N, N) with Y[:, j] the vector of
    branch j.  For two branches this is (Lambda - m) DD[Y] + SA[Y], which
    has no cancellation problem in the projectors themselves.
    """
    N = om.shape[-1]
    if N == 2:
        d = om[:, 0] - om[:, 1]
        m = (om[:, 0] + om[:, 1]) / 2
        DD = (Y[:, 0] - Y[:, 1]) / d[:, None]
        SA = (Y[:, 0] + Y[:, 1]) / 2
        return np.einsum("pab,pb->pa", Lk, DD) - m[:, None] * DD + SA
    out = np.zeros(Y.shape[:1] + Y.shape[2:], dtype=complex)
    for j in range(N):
        v = Y[:, j]
        for i in range(N):
            if i != j:
                v = (np.einsum("pab,pb->pa", Lk, v) - om[:, i, None] * v) / (om[:, j] - om[:, i])[:, None]
        out += v
    return out


def _proxy_hat(kappa, ncomp):
    """Transform of x exp(-x) in every component, standing in for Q-hat(kappa, t).

    The boundary values inside Q-hat(kappa, t) only add polynomials in k,
    whose integrals against exp(i k x) vanish for x > 0, so the proxy is a
    function vanishing at x = 0.
    """
    return np.repeat((1.0 / (1.0 + 1j * kappa) ** 2)[..., None], ncomp, axis=-1)


class GenericIntegrands:
    """Integrands of the generic solution formula for one problem."""

    def __init__(self, P, B, S, usable):
        M = P.system
        self.M, self.B, self.S = M, B, S
        self.N = M.size
        self.X = x_operator(M)
        F = boundary_functions(M)
        self.known = {f: e for f, e in prescribed_functions(M, P.boundary).items() if f in F}
        self.unknown = [f for f in F if f not in self.known]
        sl = slaved_components(M)
        for c, s in self.unknown:
            if c in sl and (sl[c][0], s) in F:
                raise UnsupportedCaseError(
                    f"boundary value {function_name(M.names, c, s)} is slaved to an unprescribed value"
                )
        self.ratios = []
        for l in usable:
            r = S.symmetries[l].ratio
            if r is None:
                raise UnsupportedCaseError("the generic pipeline needs symmetries of the form nu(k) = c k")
            self.ratios.append(r)
        if self.unknown and not self.ratios:
            raise UnsupportedCaseError("no usable symmetry to eliminate the unknown boundary values")
        self.initial = P.initial

    def _direct(self, k, om, t):
        """exp(-Lambda(k) t) Q0-hat(k), shape (P, N)."""
        Lk = self.M(k)
        q0 = _hat_values(self.initial, k)
        if self.N == 2:
            A = PairAlgebra(om, t)
            return np.einsum("pab,pb->pa", Lk, q0) * A.D[:, None] + (A.S0 - A.m * A.D)[:, None] * q0
        e = np.exp(-om * t)
        return branch_sum(Lk, om, e[:, :, None] * q0[:, None, :])

    def _eliminate(self, k, om, t, mode, known_H, hat=None):
        """Per-branch unknown time transforms h[p, j, u] from the symmetry rows.

        ``mode`` selects the right-hand side: the initial-data part, the
        prescribed-boundary part, or a proxy for the dropped Q-hat(nu(k), t).
        """
        nu = len(self.unknown)
        P, N = om.shape
        L = len(self.ratios)
        A = np.zeros((L, P, N, nu), dtype=complex)
        b = np.zeros((L, P, N), dtype=complex)
        ok = np.zeros((L, P, N), dtype=bool)
        for i, r in enumerate(self.ratios):
            kap = r * k
            roots = self.B.roots(kap)
            dist = np.abs(roots[:, None, :] - om[:, :, None]).min(axis=-1)
            ok[i] = dist <= 1e-7 * (1 + np.abs(om))
            kapb = np.broadcast_to(kap[:, None], om.shape)
            w = left_null_vectors(self.M, kapb, om)
            cs = [self.X.c(s, kap) for s in range(len(self.X.coefficients))]
            for u, (c, s) in enumerate(self.unknown):
                A[i, :, :, u] = -np.einsum("pja,pa->pj", w, cs[s][:, :, c])
            if mode == "proxy":
                qh = _proxy_hat(kapb, self.N) if hat is None else hat(kapb)
                b[i] = np.einsum("pja,pja->pj", w, qh)
            elif mode == "data":
                b[i] = -np.exp(-om * t) * np.einsum("pja,pa->pj", w, _hat_values(self.initial, kap))
            else:
                for (c, s), H in known_H.items():
                    b[i] += np.einsum("pja,pa->pj", w, cs[s][:, :, c]) * H
        # the first `nu` matching symmetries for every (node, branch)
        order = np.argsort(~ok, axis=0, kind="stable")[:nu]
        if not np.all(np.take_along_axis(ok, order, axis=0)):
            raise SingularSystemError("a branch has too few symmetry relations at some node")
        Asel = np.moveaxis(np.take_along_axis(A, order[..., None], axis=0), 0, 2)  # (P, N, rows, nu)
        bsel = np.moveaxis(np.take_along_axis(b, order, axis=0), 0, 2)
        det = np.linalg.det(Asel)
        scale = np.abs(Asel).max(axis=(-1, -2)) ** nu
        bad = ~(np.abs(det) > 1e-13 * scale)
        Asel[bad] = np.eye(nu)
        h = np.linalg.solve(Asel, bsel[..., None])[..., 0]
        return h, bad.any(axis=-1)

    def _terms(self, k, om, t, mode, hat=None, static=False):
        P, N = om.shape
        cs = [self.X.c(s, k) for s in range(len(self.X.coefficients))]
        Y = np.zeros((P, N, self.N), dtype=complex)
        known_H = {}
        if mode == "bc":
            for f, entry in self.known.items():
                H = _known_time_transform(entry, om, t, static)
                if H is not None:
                    known_H[f] = H
                    c, s = f
                    Y -= cs[s][:, None, :, c] * H[:, :, None]
            if not known_H:
                return np.zeros((P, self.N), dtype=complex), np.zeros(P, dtype=bool)
        bad = np.zeros(P, dtype=bool)
        if self.unknown:
            h, bad = self._eliminate(k, om, t, mode, known_H, hat)
            for u, (c, s) in enumerate(self.unknown):
                Y -= cs[s][:, None, :, c] * h[:, :, u, None]
        out = branch_sum(self.M(k), om, Y)
        if mode == "data":
            out = out + self._direct(k, om, t)
        return out, bad

    def evaluate(self, k, om, t, mode, shift=1e-5, hat=None, static=False):
        """One part of the transformed solution at the nodes k, shape (N, P).

        Nodes where the elimination matrix is singular are replaced by the
        average over the neighbours k +- shift.
        """
        out, bad = self._terms(k, om, t, mode, hat, static)
        if bad.any():
            kb = k[bad]
            vals = 0
            for sgn in (1, -1):
                kk = kb + sgn * shift
                vals = vals + self._terms(kk, self.B.roots(kk), t, mode, hat, static)[0]
            out[bad] = vals / 2
        return out.T

    def data(self, k, om, t):
        """Initial-data part: exp(-Lambda t) Q0-hat(k) plus the eliminated Q0-hat(nu(k)) terms."""
        return self.evaluate(k, om, t, "data")

    def boundary(self, k, om, t, static=False):
        """Prescribed boundary data, directly and through the eliminated unknowns."""
        return self.evaluate(k, om, t, "bc", static=static)

    def dropped(self, k, hat=None):
        """The Q-hat(nu(k), t) terms, with a decaying proxy transform unless ``hat`` is given.

        ``hat(kappa)`` returns the solution transform at kappa with the
        components on the last axis.
        """
        k = np.asarray(k, dtype=complex).ravel()
        return self.evaluate(k, self.B.roots(k), 0.0, "proxy", hat=hat)


def strip_constant(B, fn, far=1e7):
    """Wrap an integrand so its limit as |k| -> infinity along the real axis is removed.

    Dropping the Q-hat(nu(k), t) terms leaves k-independent remainders of
    their boundary values; exp(i k x) times a constant integrates to zero
    for x > 0, and removing it restores decay of the integrand.  The limit
    is only subtracted where both ends agree.
    """
    cache = {}

    def limit(t):
        if t not in cache:
            kk = np.array([far, -far, 2 * far, -2 * far], dtype=complex)
            v = fn(kk, B.roots(kk), t)
            c = v[:, :2].mean(axis=1)
            spread = np.abs(v - c[:, None]).max(axis=1)
            cache[t] = np.where(spread <= 1e-6 * (1 + np.abs(c)), c, 0)
        return cache[t]

    def wrapped(k, om, t, **kw):
        return fn(k, om, t, **kw) - limit(t)[:, None]

    return wrapped


def generic_solve(P, x, t, workers=1, K_max=None, certificate=True):
    """Solve a BVProblem through global relations and symmetry elimination.

    The initial-data part exp(-Lambda t) Q0-hat is integrated over the real
    line and the boundary part over the boundary of D+.  The terms carrying
    Q-hat(nu(k), t) are dropped once their coefficient passes a decay
    certificate in the upper half plane.
    """
    x, t = as_grid(x, t)
    M = P.system
    B = BranchSet(M)
    S = find_symmetries(M, B)
    path = evaluation_contour(B)
    required, report = count_required_bcs(M, S, path)
    if len(P.boundary) != required:
        raise UnsupportedCaseError(f"problem needs {required} boundary condition(s), got {len(P.boundary)}")
    usable = usable_symmetries(S, _contour_samples(path))
    G = GenericIntegrands(P, B, S, usable)
    diag = {"bc_report": report, "contour": path.kind}
    if G.unknown and certificate:
        # the proxied terms may decay only like 1/|k|, so look out to |k| = 2048
        cert = decay_certificate(G.dropped, samples=10)
        diag["decay_certificate"] = cert
        if not cert:
            raise UnsupportedCaseError("the terms carrying the unknown solution transform fail the decay certificate")
    real_bps = sorted(b.k.real for b in B.branch_points if abs(b.k.imag) < 1e-12)
    line = real_line(breakpoints=[0.0] + real_bps)
    removable = tuple(real_bps)
    has_bc = any(e[0] is not None and not e[0].is_zero for e in G.known.values())
    if not has_bc:
        terms = [Term(line, G.data, removable, "real line")]
    elif path.kind.startswith("real-line"):
        def combined(k, om, tt, static=False):
            if static:
                return G.boundary(k, om, tt, static=True)
            return G.data(k, om, tt) + G.boundary(k, om, tt)

        terms = [Term(line, strip_constant(B, combined), removable, "real line", tail=True)]
    else:
        terms = [Term(line, G.data, removable, "real line"),
                 Term(damped_path(Region(B), path), strip_constant(B, G.boundary), (), "boundary of D+")]
    ev = FieldEvaluator(B, terms, M.names, P.tol, K_max, diagnostics=diag)
    # at t = 0 the real-line data integral is only conditionally convergent;
    # the answer there is the initial data itself
    later = t > 0
    out = ev.evaluate(x, t[later], workers) if later.any() else None
    values = np.zeros((t.size, x.size, M.size), dtype=complex)
    errors = np.zeros((t.size, x.size))
    values[~later] = np.stack([np.asarray(f(x), dtype=complex) for f in P.initial], axis=-1)
    if out is not None:
        values[later] = out.values
        errors[later] = out.errors
        diag = out.diagnostics
    return SolutionField(x, t, values, errors, M.names, diag)
