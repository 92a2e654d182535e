import numpy as np
import pytest

from utmsys.dispersion import BranchSet
from utmsys.errors import GridTooCoarseError, InstabilityError, UnsupportedCaseError
from utmsys.oracle import FDConfig, fd_reference, images_reference, pde_residual
from utmsys.solvers import BoundarySpec, BVProblem, SolutionField, dalembert_eval
from utmsys.systems import fitzhugh_nagumo, klein_gordon, wave_like
from utmsys.transforms import HalfLineFunction, gaussian_truncated, make_signal, poly_exp, zero_function

X = np.array([0.0, 0.5, 1.0, 2.0])
T = np.array([0.4, 1.0])
COARSE = FDConfig(h=0.04, L=20.0)

# odd about x = 0 with vanishing second derivative, so the odd extension is smooth
ODD = HalfLineFunction(lambda x: x * np.exp(-x * x), C=1.0, gamma_d=1.0)
EVEN = gaussian_truncated(1.0, 0.0, 1.0)


def test_zero_data_gives_zero():
    for P in (BVProblem(klein_gordon(1.0), [], [BoundarySpec.dirichlet()]),
              BVProblem(fitzhugh_nagumo(0.5), [], [BoundarySpec.neumann()])):
        assert np.abs(fd_reference(P, COARSE, X, T).values).max() == 0
        assert np.abs(images_reference(P, X, T, points=2**12).values).max() == 0


def test_fd_wave_matches_dalembert_to_second_order():
    u0, g = poly_exp(1.0, 2, 1.0), make_signal("poly-exp", n=2)
    P = BVProblem(wave_like(0.0), [u0], [BoundarySpec.dirichlet(g)])
    x, t = np.array([0.3, 0.8, 1.6]), np.array([0.5, 1.2])
    ref = dalembert_eval("dirichlet", u0, zero_function(), g, x[None, :], t[:, None])
    errs = []
    for h in (0.04, 0.02):
        F = fd_reference(P, FDConfig(h=h, L=20.0), x, t)
        errs.append(np.abs(F.values[:, :, 0] - ref).max())
    assert errs[1] <= 10 * 0.01**2
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_richardson_ratio_on_smooth_data():
    P = BVProblem(fitzhugh_nagumo(0.5), [EVEN], [BoundarySpec.neumann()])
    F = fd_reference(P, FDConfig(h=0.04, L=20.0, levels=3), X, T)
    assert 3.5 <= F.diagnostics["richardson_ratio"] <= 4.5


@pytest.mark.parametrize("P", [
    BVProblem(klein_gordon(1.0), [ODD], [BoundarySpec.dirichlet()]),
    BVProblem(fitzhugh_nagumo(0.5), [EVEN], [BoundarySpec.neumann()]),
], ids=["kg", "fn"])
def test_finite_differences_agree_with_images(P):
    F = fd_reference(P, COARSE, X, T)
    G = images_reference(P, X, T, points=2**14)
    assert np.all(np.abs(F.values - G.values).max(axis=-1) <= 2 * F.errors + 1e-12)


@pytest.mark.parametrize("P", [
    BVProblem(klein_gordon(1.0), [ODD], [BoundarySpec.dirichlet(make_signal("sin"))]),
    BVProblem(wave_like(0.0), [ODD], [BoundarySpec.robin(1.0, 1.0)]),
    BVProblem(wave_like(1.0), [ODD], [BoundarySpec.dirichlet()]),
], ids=["nonhomogeneous", "robin", "odd-symbol"])
def test_images_rejects_unsupported_problems(P):
    with pytest.raises(UnsupportedCaseError):
        images_reference(P, X, T)


def test_fd_detects_growth():
    P = BVProblem(klein_gordon(-1.0), [ODD], [BoundarySpec.dirichlet()])
    with pytest.raises(InstabilityError):
        fd_reference(P, FDConfig(h=0.04, L=20.0, growth_limit=2.0), X, [8.0])


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FDConfig(h=-0.1)
    with pytest.raises(ValueError):
        FDConfig(levels=1)
    P = BVProblem(klein_gordon(1.0), [ODD], [BoundarySpec.dirichlet()])
    with pytest.raises(ValueError):
        fd_reference(P, FDConfig(L=4.0), [3.0], T)


def plane_wave(M, k, h):
    om = BranchSet(M).branches_at(k)[0]
    # right eigenvector of Lambda(k) for om
    L = M(np.array([k]))[0]
    w, V = np.linalg.eig(L)
    eta = V[:, np.argmin(np.abs(w - om))]
    x = 1.0 + h * np.arange(-4, 5)
    t = 0.5 + h * np.arange(-2, 3)
    phase = np.exp(1j * k * x[None, :] - om * t[:, None])
    return SolutionField(x, t, phase[:, :, None] * eta, np.zeros_like(phase.real), M.names)


@pytest.mark.parametrize("M", [klein_gordon(1.0), fitzhugh_nagumo(0.5)], ids=["kg", "fn"])
def test_residual_of_a_plane_wave_is_second_order(M):
    r1 = pde_residual(plane_wave(M, 1.3, 0.02), M)
    r2 = pde_residual(plane_wave(M, 1.3, 0.01), M)
    assert r2 <= 1e-3
    assert 3.0 <= r1 / r2 <= 5.0


def test_residual_of_zero_field_and_coarse_grids():
    M = klein_gordon(1.0)
    F = SolutionField(np.linspace(0, 1, 5), np.linspace(0, 1, 3), np.zeros((3, 5, 2)), np.zeros((3, 5)), M.names)
    assert pde_residual(F, M) == 0
    G = SolutionField(np.linspace(0, 1, 5), [0.0, 1.0], np.zeros((2, 5, 2)), np.zeros((2, 5)), M.names)
    with pytest.raises(GridTooCoarseError):
        pde_residual(G, M)
