import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utmsys.errors import DegenerateBranchesError
from utmsys.symbol import (
    PolynomialMatrix,
    bieval,
    char_poly,
    diagonalizer,
    left_null_vectors,
    x_operator,
)
from utmsys.systems import fitzhugh_nagumo, klein_gordon, wave_like
from utmsys.dispersion import BranchSet

cplx = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def poly_matrices(draw):
    n = draw(st.integers(2, 3))
    deg = draw(st.integers(1, 3))
    entries = [[[draw(cplx) for _ in range(draw(st.integers(1, deg + 1)))] for _ in range(n)] for _ in range(n)]
    entries[0][0] = [draw(cplx) for _ in range(deg)] + [1.0]
    return PolynomialMatrix.from_entries(entries)


def test_klein_gordon_symbol():
    M = klein_gordon(2.0)
    k = np.array([0.5, 1.5j])
    L = M(k)
    expect = np.array([[[0, -1], [2 + kk**2, 0]] for kk in k])
    assert np.allclose(L, expect)
    assert list(M.column_degrees()) == [2, 0]
    assert M.names == ("q", "p")


@settings(max_examples=40, deadline=None)
@given(poly_matrices(), cplx)
def test_char_poly_roots_are_eigenvalues(M, k):
    c = char_poly(M, k)
    if abs(c[-1]) < 1e-12:
        return
    roots = np.sort_complex(np.roots(c[::-1]))
    eig = np.sort_complex(np.linalg.eigvals(M(np.array(k))))
    scale = 1 + np.abs(eig).max()
    # match as multisets; sorting alone can pair near-ties differently
    for r in roots:
        assert np.abs(eig - r).min() <= 1e-6 * scale


@settings(max_examples=40, deadline=None)
@given(poly_matrices(), cplx, cplx)
def test_bivariate_polynomial_is_determinant(M, k, w):
    C = M.bivariate_char_poly()
    L = M(np.array(k))
    det = np.linalg.det(w * np.eye(M.size) - L)
    assert abs(bieval(C, k, w) - det) <= 1e-9 * (1 + abs(det))


@settings(max_examples=40, deadline=None)
@given(poly_matrices(), cplx, cplx)
def test_x_operator_is_divided_difference(M, k, l):
    if abs(k - l) < 1e-3:
        return
    X = x_operator(M)
    lhs = X.symbol(np.array(k), np.array(l))
    rhs = 1j * (M(np.array(k)) - M(np.array(l))) / (k - l)
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


@pytest.mark.parametrize("M", [klein_gordon(1.0), fitzhugh_nagumo(0.5), wave_like(1.0)])
def test_left_null_vectors(M):
    k = np.array([0.7 - 0.2j, 2.0, -3.0 + 1j])
    om = BranchSet(M).roots(k)
    v = left_null_vectors(M, k[:, None], om)
    L = M(k)
    for j in range(M.size):
        res = np.einsum("pa,pab->pb", v[:, j], L) - om[:, j, None] * v[:, j]
        assert np.abs(res).max() < 1e-12 * (1 + np.abs(L).max())
    assert np.allclose(np.abs(v).max(axis=-1), 1.0)


def test_diagonalizer_rejects_coincident_branches():
    M = klein_gordon(1.0)
    D = diagonalizer(M, BranchSet(M))
    # Omega = +-i sqrt(1 + k^2) coincide at k = i
    with pytest.raises(DegenerateBranchesError):
        D(np.array([1j]), np.array([[0.0, 0.0]]))
