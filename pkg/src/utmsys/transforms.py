"""Half-line Fourier transforms of initial data and time transforms of boundary data.

Conventions: ``f_hat(k) = int_0^inf exp(-i k x) f(x) dx`` and, for boundary
data, ``int_0^t exp(omega s) g(s) ds``.  Closed-form transforms are used for
the registry functions; anything else goes through adaptive quadrature.
"""

import math
import warnings

import numpy as np
from scipy.special import wofz

from .errors import DivergenceError, ToleranceWarning
from .quadrature import integrate_contour, integrate_polyline, phi_functions, time_integral

__all__ = [
    "HalfLineFunction",
    "SpectralFunction",
    "TimeSignal",
    "half_line_ft",
    "inverse_contour",
    "make_function",
    "make_signal",
    "time_transform",
]


class HalfLineFunction:
    """A function on x >= 0 with a decay bound |f(x)| <= C exp(-gamma_d x).

    Parameters
    ----------
    evaluator : callable
        Vectorized in x.
    C, gamma_d : float
        Decay bound.  ``gamma_d = inf`` marks super-exponential decay, in which
        case ``support`` must bound where f is non-negligible.
    transform : callable, optional
        Exact half-line transform, vectorized in k.
    support : float, optional
        f vanishes (to double precision) beyond this point.
    """

    def __init__(self, evaluator, C=1.0, gamma_d=1.0, transform=None, support=None,
                 algebraic=False, smoothness="continuous", name="f"):
        self._f = evaluator
        self.C = float(C)
        self.gamma_d = float(gamma_d)
        self.transform = transform
        self.support = support
        self.algebraic = algebraic
        self.smoothness = smoothness
        self.name = name

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    @property
    def is_zero(self):
        return self.C == 0.0

    def verify_decay(self, x_max=40.0, count=2001):
        """True when no sample exceeds 1.05 C exp(-gamma_d x)."""
        x = np.linspace(0.0, x_max, count)
        g = 0.0 if np.isinf(self.gamma_d) else self.gamma_d
        bound = 1.05 * self.C * np.exp(-g * x) + 1e-300
        return bool(np.all(np.abs(self(x)) <= bound))

    def cutoff(self, k_imag, tol):
        """X_max with C exp(-(gamma_d - Im k) X_max) < tol/4."""
        if self.support is not None:
            return float(self.support)
        rate = self.gamma_d - k_imag
        return max(math.log(max(self.C, 1e-300) / (tol / 4)) / rate, 1.0)

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def scaled(self, c):
        return combine([(c, self)])


def combine(terms):
    """Linear combination sum c_i f_i, keeping exact transforms when all have them."""
    terms = [(complex(c), f) for c, f in terms]

    def ev(x):
        return sum(c * f(x) for c, f in terms)

    exact = None
    if all(f.transform is not None for _, f in terms):
        def exact(k):
            return sum(c * f.transform(k) for c, f in terms)

    gam = min(f.gamma_d for _, f in terms)
    C = sum(abs(c) * f.C for c, f in terms)
    sup = None
    if all(f.support is not None for _, f in terms):
        sup = max(f.support for _, f in terms)
    real = all(c.imag == 0 for c, _ in terms)
    out = HalfLineFunction(lambda x: ev(x).real if real else ev(x), C, gam, exact, sup, name="combination")
    return out


def zero_function():
    return HalfLineFunction(lambda x: np.zeros_like(np.asarray(x, dtype=float)), 0.0, 1.0,
                            lambda k: np.zeros_like(np.asarray(k, dtype=complex)), 0.0, name="zero")


def exp_decay(c=1.0, lam=1.0):
    """c exp(-lam x)."""
    return HalfLineFunction(
        lambda x: c * np.exp(-lam * x), abs(c), lam,
        lambda k: c / (lam + 1j * np.asarray(k, dtype=complex)), name="exp-decay",
    )


def poly_exp(c=1.0, n=1, lam=1.0):
    """c x**n exp(-lam x); transform c n!/(lam + i k)**(n+1)."""
    n = int(n)
    # |x^n e^{-lam x}| <= (n/(lam e/2))^n e^{-lam x/2}
    amp = abs(c) * (n / (lam * math.e / 2)) ** n if n else abs(c)
    return HalfLineFunction(
        lambda x: c * x**n * np.exp(-lam * x), amp, lam / 2,
        lambda k: c * math.factorial(n) / (lam + 1j * np.asarray(k, dtype=complex)) ** (n + 1),
        name="poly-exp",
    )


def gaussian_truncated(c=1.0, x0=0.0, sigma=1.0):
    """c exp(-((x - x0)/sigma)**2) restricted to x >= 0."""

    def ft(k):
        k = np.asarray(k, dtype=complex)
        z = -x0 / sigma + 0.5j * k * sigma
        return c * sigma * math.sqrt(math.pi) / 2 * np.exp(-(x0 / sigma) ** 2) * wofz(1j * z)

    support = max(x0, 0.0) + 8.6 * sigma
    return HalfLineFunction(
        lambda x: c * np.exp(-(((x - x0) / sigma) ** 2)), abs(c), np.inf, ft, support,
        name="gaussian-truncated",
    )


def tabulated(xs, values):
    """Piecewise-linear interpolant of samples on [xs[0]=0, xs[-1]], zero beyond."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(values, dtype=float)
    if xs[0] != 0 or np.any(np.diff(xs) <= 0):
        raise ValueError("tabulated samples must start at 0 and increase")
    if vals[-1] != 0:
        warnings.warn("tabulated data does not vanish at its last sample", ToleranceWarning, stacklevel=2)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= xs[-1], np.interp(x, xs, vals), 0.0)

    def ft(k):
        k = np.asarray(k, dtype=complex)
        out = np.zeros(k.shape, dtype=complex)
        for xa, xb, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
            d = xb - xa
            z = -1j * k * d
            ph = phi_functions(z, 2)
            # int_0^1 e^{zs} ds = phi_1(z), int_0^1 s e^{zs} ds = phi_1(z) - phi_2(z)
            out += np.exp(-1j * k * xa) * d * (fa * ph[0] + (fb - fa) * (ph[0] - ph[1]))
        return out

    return HalfLineFunction(ev, float(np.abs(vals).max()), np.inf, ft, float(xs[-1]), smoothness="piecewise",
                            name="tabulated")


FUNCTIONS = {
    "zero": lambda: zero_function(),
    "exp-decay": exp_decay,
    "poly-exp": poly_exp,
    "gaussian-truncated": gaussian_truncated,
    "tabulated": tabulated,
}


def make_function(kind, **params):
    """Build a registry HalfLineFunction by name."""
    try:
        factory = FUNCTIONS[kind]
    except KeyError:
        raise ValueError(f"unknown initial-data kind {kind!r}; choose from {sorted(FUNCTIONS)}") from None
    return factory(**params)


def half_line_ft(f, k, tol=1e-10, full_output=False):
    """int_0^inf exp(-i k x) f(x) dx, vectorized over k.

    Exact when f carries a closed-form transform; otherwise adaptive
    quadrature on [0, X_max] with the truncation tail bounded by tol/4.
    Raises DivergenceError when Im k > gamma_d.
    """
    k = np.asarray(k, dtype=complex)
    if np.any(k.imag > f.gamma_d):
        raise DivergenceError(f"half-line transform diverges: Im k exceeds decay rate {f.gamma_d:g}")
    if f.transform is not None:
        val = np.asarray(f.transform(k), dtype=complex)
        err = np.zeros(k.shape)
        return (val, err) if full_output else val
    flat = k.ravel()
    xmax = max(f.cutoff(float(flat.imag.max()), tol), 1e-12)
    scale = max(f.C, 1e-300) / (f.gamma_d if np.isfinite(f.gamma_d) and f.gamma_d > 0 else 1.0)

    def integrand(x):
        x = x.real
        return np.exp(-1j * np.outer(flat, x)) * np.asarray(f(x), dtype=complex)[None, :]

    res = integrate_polyline(integrand, np.linspace(0.0, xmax, 9), tol * scale / 2)
    if not res.converged or res.error.max() > tol * scale:
        warnings.warn("half-line transform missed its tolerance", ToleranceWarning, stacklevel=2)
    tail = f.C * np.exp(-(f.gamma_d - flat.imag) * xmax) / max(f.gamma_d - flat.imag.max(), 1e-12) \
        if np.isfinite(f.gamma_d) and f.support is None else np.zeros(flat.shape)
    val = res.value.reshape(k.shape)
    err = (res.error + tail).reshape(k.shape)
    return (val, err) if full_output else val


class TimeSignal:
    """Boundary data g(t) on [0, T]."""

    def __init__(self, evaluator, horizon=np.inf, name="g"):
        self._g = evaluator
        self.horizon = float(horizon)
        self.name = name

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self._g(t)

    @property
    def is_zero(self):
        return self.name == "zero"

    def scaled(self, c):
        return TimeSignal(lambda t: c * self._g(t), self.horizon, name="zero" if c == 0 or self.is_zero else self.name)


def _tab_signal(times, values):
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    return lambda t: np.interp(t, ts, vs)


SIGNALS = {
    "zero": lambda: (lambda t: np.zeros_like(t)),
    "constant": lambda c=1.0: (lambda t: c + 0.0 * t),
    "exp": lambda c=1.0, lam=1.0: (lambda t: c * np.exp(-lam * t)),
    "poly-exp": lambda c=1.0, n=1, lam=1.0: (lambda t: c * t ** int(n) * np.exp(-lam * t)),
    "sin": lambda c=1.0, w=1.0: (lambda t: c * np.sin(w * t)),
    "tabulated": _tab_signal,
}


def make_signal(kind, horizon=np.inf, **params):
    try:
        factory = SIGNALS[kind]
    except KeyError:
        raise ValueError(f"unknown boundary-data kind {kind!r}; choose from {sorted(SIGNALS)}") from None
    return TimeSignal(factory(**params), horizon, name=kind)


def time_transform(g, omega, t, tol=1e-12, full_output=False):
    """int_0^t exp(omega s) g(s) ds for scalar omega (proper integral, any omega)."""
    if t < 0 or t > g.horizon:
        raise ValueError(f"t={t} outside [0, {g.horizon}]")
    if t == 0:
        return (0j, 0.0) if full_output else 0j
    val, err, ok = time_integral(g, omega, t, tol * max(1.0, abs(np.exp(complex(omega) * t))))
    if not ok:
        warnings.warn("time transform missed its tolerance", ToleranceWarning, stacklevel=2)
    return (val, err) if full_output else val


class SpectralFunction:
    """F(k) with a domain tag in {'lower-half', 'upper-half', 'entire', 'contour-only'}."""

    DOMAINS = ("lower-half", "upper-half", "entire", "contour-only")

    def __init__(self, evaluator, domain="entire"):
        if domain not in self.DOMAINS:
            raise ValueError(f"domain must be one of {self.DOMAINS}")
        self._F = evaluator
        self.domain = domain

    def __call__(self, k):
        return self._F(np.asarray(k, dtype=complex))


def inverse_contour(F, path, x, t=0.0, tol=1e-8, K_max=None, full_output=False):
    """(1/2 pi) int_path exp(i k x) F(k) dk, vectorized over x.

    ``F`` may take (k) or, with attribute ``time_dependent``, (k, t).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if getattr(F, "time_dependent", False):
        def Fk(k):
            return F(k, t)
    else:
        Fk = F

    def integrand(k):
        return np.exp(1j * np.outer(x, k)) * np.asarray(Fk(k), dtype=complex)[None, :] / (2 * np.pi)

    res = integrate_contour(integrand, path, tol, K_max)
    val = res.value if x.size > 1 else res.value[0]
    if full_output:
        return val, res
    return val
