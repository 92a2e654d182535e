"""Symbols of the example systems used throughout the package."""

import numpy as np

from .symbol import PolynomialMatrix


def klein_gordon(alpha=1.0):
    """q_t = p, p_t = q_xx - alpha q, as Q = (q, p)."""
    return PolynomialMatrix.from_entries(
        [[[0], [-1]], [[alpha, 0, 1], [0]]], names=("q", "p")
    )


def fitzhugh_nagumo(beta=0.5):
    """Linearized FitzHugh-Nagumo: v_t = v_xx - v - w, w_t = beta v."""
    return PolynomialMatrix.from_entries(
        [[[1, 0, 1], [1]], [[-beta], [0]]], names=("v", "w")
    )


def wave_like(a=0.0):
    """u_tt = u_xx + a u_xt written for Q = (u, v) with v = u_t."""
    return PolynomialMatrix.from_entries(
        [[[0], [-1]], [[0, 0, 1], [0, -1j * a]]], names=("u", "v")
    )


def wave_alphas(a):
    """Roots alpha_1 > alpha_2 of alpha**2 + a alpha - 1 = 0; Omega_j = i k alpha_j."""
    r = np.sqrt(4.0 + a * a)
    return (-a + r) / 2.0, (-a - r) / 2.0
