"""Polynomial operator symbols Lambda(k) and the objects derived from them.

A system ``Q_t + Lambda(-i d/dx) Q = 0`` is described by its symbol, an
``N x N`` matrix whose entries are polynomials in ``k``.  Coefficients are
stored in ascending powers of ``k`` throughout the package, matching
``numpy.polynomial.polynomial``.

Bivariate polynomials P(k, w) are plain 2-d arrays ``C`` with
``P = sum C[a, b] k**a w**b``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBranchesError

COLLISION_RTOL = 1e-8


def _trim(c, tol=0.0):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.nonzero(np.abs(c) > tol)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1].copy()


@dataclass(frozen=True)
class PolynomialScalar:
    """A polynomial in k with complex coefficients in ascending order."""

    coefficients: tuple

    def __post_init__(self):
        c = _trim(self.coefficients)
        object.__setattr__(self, "coefficients", tuple(complex(v) for v in c))

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coefficients[0] == 0

    def __call__(self, k):
        return np.polynomial.polynomial.polyval(k, np.array(self.coefficients))


# -- bivariate helpers -------------------------------------------------------

def bimul(a, b):
    """Product of two bivariate coefficient arrays."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=complex)
    for i, j in zip(*np.nonzero(a)):
        out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def biadd(a, b):
    shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
    out = np.zeros(shape, dtype=complex)
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


def bitrim(c, tol=0.0):
    c = np.asarray(c, dtype=complex)
    rows = np.nonzero(np.any(np.abs(c) > tol, axis=1))[0]
    cols = np.nonzero(np.any(np.abs(c) > tol, axis=0))[0]
    if rows.size == 0:
        return np.zeros((1, 1), dtype=complex)
    return c[: rows[-1] + 1, : cols[-1] + 1].copy()


def bieval(c, k, w):
    """Evaluate P(k, w) elementwise (broadcasting k against w)."""
    k, w = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(w, dtype=complex))
    out = np.zeros(k.shape, dtype=complex)
    # Horner in w with coefficients that are polynomials in k.
    for b in range(c.shape[1] - 1, -1, -1):
        out = out * w + np.polynomial.polynomial.polyval(k, c[:, b])
    return out


def bideriv_w(c):
    """Partial derivative with respect to w."""
    if c.shape[1] == 1:
        return np.zeros((c.shape[0], 1), dtype=complex)
    return c[:, 1:] * np.arange(1, c.shape[1])[None, :]


def bideriv_k(c):
    if c.shape[0] == 1:
        return np.zeros((1, c.shape[1]), dtype=complex)
    return c[1:, :] * np.arange(1, c.shape[0])[:, None]


def _bidet(entries):
    n = len(entries)
    if n == 1:
        return entries[0][0]
    total = np.zeros((1, 1), dtype=complex)
    for j in range(n):
        if not np.any(entries[0][j]):
            continue
        minor = [row[:j] + row[j + 1 :] for row in entries[1:]]
        term = bimul(entries[0][j], _bidet(minor))
        total = biadd(total, term if j % 2 == 0 else -term)
    return total


class PolynomialMatrix:
    """Square matrix of polynomials in k: the symbol Lambda(k).

    Parameters
    ----------
    coefficients : array_like, shape (N, N, n + 1)
        ``coefficients[i, j, p]`` multiplies ``k**p`` in entry (i, j).
    names : sequence of str, optional
        Component names used in reports (defaults to ``Q1 .. QN``).
    """

    def __init__(self, coefficients, names=None):
        c = np.asarray(coefficients, dtype=complex)
        if c.ndim != 3 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficients must have shape (N, N, n+1)")
        nz = np.nonzero(np.any(c != 0, axis=(0, 1)))[0]
        deg = int(nz[-1]) if nz.size else 0
        if deg < 1:
            raise ValueError("the symbol must have order n >= 1")
        self._c = c[:, :, : deg + 1].copy()
        self._c.setflags(write=False)
        self.names = tuple(names) if names is not None else tuple(f"Q{i + 1}" for i in range(self.size))
        if len(self.names) != self.size:
            raise ValueError("need one name per component")
        self._bivariate = None

    @classmethod
    def from_entries(cls, entries, names=None):
        """Build from a nested list: ``entries[i][j]`` is an ascending coefficient list."""
        n = len(entries)
        deg = max(len(np.atleast_1d(e)) for row in entries for e in row) - 1
        c = np.zeros((n, n, deg + 1), dtype=complex)
        for i, row in enumerate(entries):
            if len(row) != n:
                raise ValueError("symbol must be square")
            for j, e in enumerate(row):
                e = np.atleast_1d(np.asarray(e, dtype=complex))
                c[i, j, : len(e)] = e
        return cls(c, names)

    @property
    def coefficients(self):
        return self._c

    @property
    def size(self):
        return self._c.shape[0]

    @property
    def order(self):
        return self._c.shape[2] - 1

    def entry(self, i, j):
        return PolynomialScalar(tuple(self._c[i, j]))

    def column_degrees(self):
        """Maximal k-degree per column (-1 for an identically zero column)."""
        out = []
        for j in range(self.size):
            nz = np.nonzero(np.any(self._c[:, j, :] != 0, axis=0))[0]
            out.append(int(nz[-1]) if nz.size else -1)
        return out

    def __call__(self, k):
        """Evaluate Lambda at k; returns shape ``k.shape + (N, N)``."""
        k = np.asarray(k, dtype=complex)
        out = np.zeros(k.shape + (self.size, self.size), dtype=complex)
        for p in range(self.order, -1, -1):
            out = out * k[..., None, None] + self._c[:, :, p]
        return out

    def derivative(self, k):
        k = np.asarray(k, dtype=complex)
        out = np.zeros(k.shape + (self.size, self.size), dtype=complex)
        for p in range(self.order, 0, -1):
            out = out * k[..., None, None] + p * self._c[:, :, p]
        return out

    def bivariate_char_poly(self):
        """Coefficients C[a, b] of det(w I - Lambda(k)) in k**a w**b."""
        if self._bivariate is None:
            n = self.size
            entries = []
            for i in range(n):
                row = []
                for j in range(n):
                    e = np.zeros((self.order + 1, 2), dtype=complex)
                    e[:, 0] = -self._c[i, j]
                    if i == j:
                        e[0, 1] = 1.0
                    row.append(bitrim(e))
                entries.append(row)
            self._bivariate = bitrim(_bidet(entries))
            self._bivariate.setflags(write=False)
        return self._bivariate

    def __repr__(self):
        return f"PolynomialMatrix(N={self.size}, n={self.order}, names={self.names})"


def eval_symbol(M, k):
    """Lambda(k) as a complex matrix (vectorized over k)."""
    return M(k)


def char_poly(M, k):
    """Coefficients of det(w I - Lambda(k)) in ascending powers of w.

    The polynomial is monic of degree N, and its roots are the branches
    Omega_j(k).  For array ``k`` the result has shape ``k.shape + (N + 1,)``.
    """
    c = M.bivariate_char_poly()
    k = np.asarray(k, dtype=complex)
    out = np.stack([np.polynomial.polynomial.polyval(k, c[:, b]) for b in range(c.shape[1])], axis=-1)
    return out


@dataclass(frozen=True)
class XOperator:
    """Divergence-form operator ``X = sum_j c_j(k) d^j/dx^j``.

    ``coefficients[j]`` is an (N, N, deg+1) array of polynomials in k for the
    j-th x-derivative.
    """

    coefficients: tuple
    size: int = field(default=0)

    @property
    def derivative_order(self):
        return len(self.coefficients) - 1

    def c(self, j, k):
        """Matrix c_j(k), vectorized over k."""
        k = np.asarray(k, dtype=complex)
        cj = self.coefficients[j]
        out = np.zeros(k.shape + cj.shape[:2], dtype=complex)
        for p in range(cj.shape[2] - 1, -1, -1):
            out = out * k[..., None, None] + cj[:, :, p]
        return out

    def symbol(self, k, l):
        """Sum of c_j(k) (i l)**j, i.e. X with d/dx replaced by i l."""
        k = np.asarray(k, dtype=complex)
        l = np.asarray(l, dtype=complex)
        out = 0
        for j in range(len(self.coefficients)):
            out = out + self.c(j, k) * ((1j * l) ** j)[..., None, None]
        return out

    def columns_used(self):
        """Pairs (component, derivative order) with a nonzero coefficient column."""
        used = []
        for j, cj in enumerate(self.coefficients):
            for comp in range(cj.shape[1]):
                if np.any(cj[:, comp, :] != 0):
                    used.append((comp, j))
        return sorted(used)


def x_operator(M):
    """Divided-difference operator i(Lambda(k) - Lambda(l))/(k - l) at l = -i d/dx.

    Computed exactly from the coefficients: the k**p term contributes
    ``i k**(p-1-r) l**r`` for r < p, and ``l**r = (-i)**r d^r/dx^r``.
    """
    c = M.coefficients
    n = M.order
    coeffs = []
    for r in range(n):
        cr = np.zeros((M.size, M.size, max(n - r, 1)), dtype=complex)
        for p in range(r + 1, n + 1):
            cr[:, :, p - 1 - r] += 1j * c[:, :, p]
        cr *= (-1j) ** r
        coeffs.append(cr)
    return XOperator(tuple(coeffs), M.size)


def _normalize_rows(A):
    idx = np.argmax(np.abs(A), axis=-1)
    piv = np.take_along_axis(A, idx[..., None], axis=-1)
    return A / piv


def left_null_vectors(M, k, w):
    """Row vectors v with v (Lambda(k) - w I) = 0, largest entry scaled to 1.

    Vectorized: ``k`` and ``w`` broadcast together; the result has shape
    ``broadcast_shape + (N,)``.  Uses the smallest singular vector, so it is
    well defined whenever w is a simple eigenvalue of Lambda(k).
    """
    k, w = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(w, dtype=complex))
    L = M(k) - w[..., None, None] * np.eye(M.size)
    if M.size == 2:
        # rows of the adjugate annihilate L from the left; take the larger one
        r0 = np.stack([L[..., 1, 1], -L[..., 0, 1]], axis=-1)
        r1 = np.stack([-L[..., 1, 0], L[..., 0, 0]], axis=-1)
        pick = np.linalg.norm(r0, axis=-1) >= np.linalg.norm(r1, axis=-1)
        v = np.where(pick[..., None], r0, r1)
        if np.all(np.abs(v).max(axis=-1) > 0):
            return _normalize_rows(v)
    # v L = 0  <=>  L^H v^H = 0 ; right singular vector of L^T.
    _, _, vh = np.linalg.svd(np.swapaxes(L, -1, -2))
    v = vh[..., -1, :].conj()
    return _normalize_rows(v)


class Diagonalizer:
    """Evaluation rule for A(k), whose rows are left eigenvectors of Lambda(k).

    Row j belongs to the branch value in position j of ``branch_values(k)``,
    so ``A Lambda = diag(Omega) A``.
    """

    def __init__(self, M, branch_values):
        self.M = M
        self._branches = branch_values

    def __call__(self, k, omegas=None):
        k = np.asarray(k, dtype=complex)
        if omegas is None:
            omegas = self._branches(k)
        omegas = np.asarray(omegas, dtype=complex)
        check_distinct(omegas)
        return left_null_vectors(self.M, k[..., None], omegas)

    def inverse(self, k, omegas=None):
        return np.linalg.inv(self(k, omegas))


def check_distinct(omegas, rtol=COLLISION_RTOL):
    """Raise DegenerateBranchesError when two branch values (last axis) collide."""
    om = np.asarray(omegas)
    n = om.shape[-1]
    for i in range(n):
        for j in range(i + 1, n):
            gap = np.abs(om[..., i] - om[..., j])
            scale = 1 + np.abs(om[..., i]) + np.abs(om[..., j])
            if np.any(gap < rtol * scale):
                raise DegenerateBranchesError(
                    f"branches {i + 1} and {j + 1} coincide (|gap| < {rtol:g} * scale)"
                )


def diagonalizer(M, branches):
    """Diagonalizer of M whose row order follows the labels of ``branches``.

    ``branches`` is a BranchSet (anything with ``branches_at``) or a callable
    returning ordered branch values.
    """
    evaluate = getattr(branches, "branches_at", branches)
    return Diagonalizer(M, evaluate)
