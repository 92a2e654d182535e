import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from utmsys.contour import real_line
from utmsys.errors import DivergenceError
from utmsys.transforms import (
    HalfLineFunction,
    exp_decay,
    gaussian_truncated,
    half_line_ft,
    inverse_contour,
    make_function,
    make_signal,
    poly_exp,
    tabulated,
    time_transform,
)


def numeric_ft(f, k, xmax=60.0, points=None):
    opts = dict(limit=400, epsabs=1e-13, points=points)
    re = quad(lambda x: (np.exp(-1j * k * x) * f(x)).real, 0, xmax, **opts)[0]
    im = quad(lambda x: (np.exp(-1j * k * x) * f(x)).imag, 0, xmax, **opts)[0]
    return re + 1j * im


@pytest.mark.parametrize("f", [exp_decay(2.0, 1.5), poly_exp(1.0, 2, 1.0), gaussian_truncated(1.0, 1.0, 0.7)],
                         ids=["exp", "poly-exp", "gaussian"])
@pytest.mark.parametrize("k", [0.0, 1.3, -2.5 - 0.2j, 4.0 - 1.0j])
def test_closed_form_transforms(f, k):
    assert half_line_ft(f, k) == pytest.approx(numeric_ft(f, k), abs=1e-10)


def test_quadrature_transform_without_closed_form():
    g = poly_exp(1.0, 1, 1.0)
    bare = HalfLineFunction(lambda x: x * np.exp(-x), C=g.C, gamma_d=g.gamma_d)
    k = np.array([0.5, 3.0 - 0.1j, -7.0])
    assert np.allclose(half_line_ft(bare, k), half_line_ft(g, k), atol=1e-9)


def test_tabulated_transform_matches_quadrature():
    xs = np.linspace(0, 3, 31)
    f = tabulated(xs, np.sin(np.pi * xs / 3))
    for k in (0.0, 2.0, -5.0 + 0.3j):
        assert half_line_ft(f, k) == pytest.approx(numeric_ft(lambda x: f(np.array([x]))[0], k, 3.0, xs[1:-1]), abs=1e-9)


def test_transform_diverges_above_decay_rate():
    with pytest.raises(DivergenceError):
        half_line_ft(exp_decay(1.0, 1.0), 2.0j)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-3.0, 3.0), st.floats(0.1, 2.0))
def test_time_transform(lam, w_re, t):
    g = make_signal("exp", lam=lam)
    omega = complex(w_re, 1.0)
    exact = (np.exp((omega - lam) * t) - 1) / (omega - lam)
    assert time_transform(g, omega, t) == pytest.approx(exact, rel=1e-9, abs=1e-12)


def test_time_transform_at_zero_and_beyond_horizon():
    g = make_signal("sin", horizon=1.0)
    assert time_transform(g, 1.0, 0.0) == 0
    with pytest.raises(ValueError):
        time_transform(g, 1.0, 2.0)


def test_inverse_transform_recovers_the_function():
    f = poly_exp(1.0, 2, 1.0)
    x = np.array([0.5, 1.0, 2.5])
    val = inverse_contour(lambda k: half_line_ft(f, k), real_line(), x, tol=1e-9)
    assert np.allclose(val, f(x), atol=1e-7)


def test_registry():
    assert make_function("poly-exp", n=1)(np.array([1.0]))[0] == pytest.approx(np.exp(-1))
    assert make_function("zero").is_zero
    with pytest.raises(ValueError):
        make_function("bessel")
    with pytest.raises(ValueError):
        make_signal("square-wave")
    s = make_signal("constant", c=2.0).scaled(0.5)
    assert s(np.array([3.0]))[0] == pytest.approx(1.0)
    assert make_signal("zero").scaled(3.0).is_zero


def test_decay_bounds_hold():
    for f in (exp_decay(2.0, 0.5), poly_exp(3.0, 3, 2.0), gaussian_truncated(1.0, 2.0, 0.5)):
        assert f.verify_decay()
