"""Problem descriptions and the solution container."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import UnsupportedCaseError
from ..transforms import TimeSignal, zero_function


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data at x = 0 for one solution component.

    kind is 'dirichlet' (Q_c(0,t) = data), 'neumann' (d/dx Q_c(0,t) = data)
    or 'robin' (a Q_c + b d/dx Q_c = data).
    """

    kind: str
    component: int = 0
    data: TimeSignal = None
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.data is None:
            object.__setattr__(self, "data", TimeSignal(lambda t: np.zeros_like(t), name="zero"))
        if kind == "robin" and self.a == 0 and self.b == 0:
            raise ValueError("Robin condition needs (a, b) != (0, 0)")

    @classmethod
    def dirichlet(cls, data=None, component=0):
        return cls("dirichlet", component, data)

    @classmethod
    def neumann(cls, data=None, component=0):
        return cls("neumann", component, data)

    @classmethod
    def robin(cls, a, b, data=None, component=0):
        return cls("robin", component, data, float(a), float(b))

    def normalized(self):
        """Robin with b = 0 is Dirichlet with data/a; Robin with a = 0 is Neumann with data/b."""
        if self.kind != "robin":
            return self
        if self.b == 0:
            return BoundarySpec("dirichlet", self.component, self.data.scaled(1.0 / self.a))
        if self.a == 0:
            return BoundarySpec("neumann", self.component, self.data.scaled(1.0 / self.b))
        return self

    @property
    def gamma(self):
        """gamma = a/b for a Robin condition."""
        if self.kind != "robin" or self.b == 0:
            raise UnsupportedCaseError("gamma is only defined for Robin conditions with b != 0")
        return self.a / self.b


@dataclass
class BVProblem:
    """A half-line problem Q_t + Lambda(-i d/dx) Q = 0 with data."""

    system: object
    initial: list
    boundary: list
    tol: float = 1e-8
    horizon: float = np.inf
    parameters: dict = field(default_factory=dict)
    family: str = "generic"

    def __post_init__(self):
        n = self.system.size
        init = list(self.initial)
        if len(init) > n:
            raise ValueError(f"expected at most {n} initial functions, got {len(init)}")
        init += [zero_function() for _ in range(n - len(init))]
        self.initial = init
        self.boundary = list(self.boundary)


class SolutionField:
    """Solution values on an (x, t) lattice.

    ``values`` has shape (nt, nx, N); ``errors`` has shape (nt, nx).
    """

    def __init__(self, x, t, values, errors, names, diagnostics=None):
        self.x = np.asarray(x, dtype=float)
        self.t = np.asarray(t, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        self.errors = np.asarray(errors, dtype=float)
        self.names = tuple(names)
        self.diagnostics = dict(diagnostics or {})

    def component(self, c):
        if isinstance(c, str):
            c = self.names.index(c)
        return self.values[:, :, c]

    def __getitem__(self, name):
        return self.component(name)

    @property
    def shape(self):
        return self.values.shape

    def max_imag(self):
        return float(np.abs(self.values.imag).max(initial=0.0))

    def __repr__(self):
        return f"SolutionField(nt={len(self.t)}, nx={len(self.x)}, components={self.names})"


def as_grid(x, t):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(x < 0) or np.any(t < 0):
        raise ValueError("grid must lie in the quarter plane x >= 0, t >= 0")
    return x, t
