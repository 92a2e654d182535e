"""JSON problem configurations.

A configuration looks like::

    {
      "schema_version": 1,
      "system": {"id": "klein-gordon", "parameters": {"alpha": 1.0}},
      "initial": {"q": {"kind": "poly-exp", "n": 1}},
      "boundary": [{"kind": "dirichlet", "component": "q", "data": {"kind": "zero"}}],
      "grid": {"x": {"range": [0.1, 1.0], "count": 10}, "t": {"values": [0.5, 1.0]}},
      "tolerance": 1e-8
    }

An explicit symbol replaces ``id`` by ``"symbol"``: a matrix of k-polynomials
given as nested lists of ascending coefficients, each coefficient a real
number or an ``[re, im]`` pair, plus optional ``"names"``.
Errors are raised as ConfigError naming the offending field.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .solvers.problem import BoundarySpec, BVProblem
from .symbol import PolynomialMatrix
from .systems import fitzhugh_nagumo, klein_gordon, wave_like
from .transforms import FUNCTIONS, SIGNALS, make_function, make_signal

SCHEMA_VERSION = 1

SYSTEMS = {
    "klein-gordon": (klein_gordon, {"alpha": 1.0}),
    "fitzhugh-nagumo": (fitzhugh_nagumo, {"beta": 0.5}),
    "wave": (wave_like, {"a": 0.0}),
}

_TOP_KEYS = {"schema_version", "mode", "system", "initial", "boundary", "grid", "tolerance", "horizon", "verify"}


@dataclass
class ProblemConfig:
    problem: BVProblem
    x: np.ndarray
    t: np.ndarray
    family: str
    parameters: dict
    mode: str = None
    verify: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)


def _fail(where, msg):
    raise ConfigError(f"{where}: {msg}")


def _get(d, key, where, kind=None, default=...):
    if key not in d:
        if default is ...:
            _fail(where, f"missing required field '{key}'")
        return default
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        _fail(f"{where}.{key}", f"expected {_kind_name(kind)}, got {type(v).__name__}")
    return v


def _kind_name(kind):
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, f"expected a number, got {v!r}")
    return float(v)


def _complex(v, where):
    """A real number or an [re, im] pair."""
    if isinstance(v, list):
        if len(v) != 2:
            _fail(where, "complex numbers are written as [re, im]")
        return complex(_number(v[0], where + "[0]"), _number(v[1], where + "[1]"))
    return complex(_number(v, where))


def _params(kwargs, where):
    out = {}
    for key, v in kwargs.items():
        if isinstance(v, list):
            out[key] = [_number(e, f"{where}.{key}[{i}]") for i, e in enumerate(v)]
        else:
            out[key] = _number(v, f"{where}.{key}")
    for key in ("n",):
        if key in out:
            out[key] = int(out[key])
    return out


def parse_system(d, where="system"):
    """Returns (PolynomialMatrix, family, parameters)."""
    if not isinstance(d, dict):
        _fail(where, "expected an object")
    if "id" in d and "symbol" in d:
        _fail(where, "give either 'id' or 'symbol', not both")
    if "id" in d:
        sid = _get(d, "id", where, str)
        if sid not in SYSTEMS:
            _fail(f"{where}.id", f"unknown system {sid!r}; choose from {sorted(SYSTEMS)}")
        factory, defaults = SYSTEMS[sid]
        given = _get(d, "parameters", where, dict, {})
        unknown = set(given) - set(defaults)
        if unknown:
            _fail(f"{where}.parameters", f"unknown parameter(s) {sorted(unknown)} for {sid}")
        params = dict(defaults)
        params.update({k: _number(v, f"{where}.parameters.{k}") for k, v in given.items()})
        return factory(**params), sid, params
    rows = _get(d, "symbol", where, list)
    if not rows or not all(isinstance(r, list) and len(r) == len(rows) for r in rows):
        _fail(f"{where}.symbol", "expected a square matrix of coefficient lists")
    entries = []
    for i, row in enumerate(rows):
        erow = []
        for j, coeffs in enumerate(row):
            w = f"{where}.symbol[{i}][{j}]"
            if not isinstance(coeffs, list) or not coeffs:
                _fail(w, "expected a non-empty list of ascending coefficients")
            erow.append([_complex(c, f"{w}[{p}]") for p, c in enumerate(coeffs)])
        entries.append(erow)
    names = _get(d, "names", where, list, None)
    if names is not None and (len(names) != len(rows) or not all(isinstance(n, str) for n in names)):
        _fail(f"{where}.names", f"expected {len(rows)} component names")
    try:
        M = PolynomialMatrix.from_entries(entries, names=tuple(names) if names else None)
    except (ValueError, TypeError) as exc:
        _fail(f"{where}.symbol", str(exc))
    return M, "generic", {}


def parse_function(d, where):
    if not isinstance(d, dict):
        _fail(where, "expected an object with a 'kind'")
    kind = _get(d, "kind", where, str)
    if kind not in FUNCTIONS:
        _fail(f"{where}.kind", f"unknown initial-data kind {kind!r}; choose from {sorted(FUNCTIONS)}")
    kwargs = _params({k: v for k, v in d.items() if k != "kind"}, where)
    try:
        return make_function(kind, **kwargs)
    except (TypeError, ValueError) as exc:
        _fail(where, str(exc))


def parse_signal(d, where, horizon=np.inf):
    if d is None:
        d = {"kind": "zero"}
    if not isinstance(d, dict):
        _fail(where, "expected an object with a 'kind'")
    kind = _get(d, "kind", where, str)
    if kind not in SIGNALS:
        _fail(f"{where}.kind", f"unknown boundary-data kind {kind!r}; choose from {sorted(SIGNALS)}")
    kwargs = _params({k: v for k, v in d.items() if k != "kind"}, where)
    try:
        sig = make_signal(kind, horizon=horizon, **kwargs)
        sig(np.array([0.0]))
    except (TypeError, ValueError) as exc:
        _fail(where, str(exc))
    return sig


def _component(v, names, where):
    if isinstance(v, str):
        if v not in names:
            _fail(where, f"unknown component {v!r}; components are {list(names)}")
        return names.index(v)
    if isinstance(v, int) and not isinstance(v, bool) and 0 <= v < len(names):
        return v
    _fail(where, f"expected a component name or index, got {v!r}")


def parse_initial(d, names, where="initial"):
    out = [None] * len(names)
    if isinstance(d, list):
        if len(d) > len(names):
            _fail(where, f"at most {len(names)} initial functions")
        for i, f in enumerate(d):
            out[i] = parse_function(f, f"{where}[{i}]")
    elif isinstance(d, dict):
        for key, f in d.items():
            out[_component(key, names, where)] = parse_function(f, f"{where}.{key}")
    else:
        _fail(where, "expected an object keyed by component or a list")
    return [f if f is not None else make_function("zero") for f in out]


def parse_boundary(items, names, horizon, where="boundary"):
    if isinstance(items, dict):
        items = [items]
    if not isinstance(items, list):
        _fail(where, "expected a list of boundary conditions")
    out = []
    for i, d in enumerate(items):
        w = f"{where}[{i}]"
        if not isinstance(d, dict):
            _fail(w, "expected an object")
        kind = _get(d, "kind", w, str).lower()
        comp = _component(d.get("component", 0), names, f"{w}.component")
        data = parse_signal(d.get("data"), f"{w}.data", horizon)
        if kind == "robin":
            if "gamma" in d:
                # u_x + gamma u = f
                a, b = _number(d["gamma"], f"{w}.gamma"), 1.0
            else:
                a = _number(_get(d, "a", w), f"{w}.a")
                b = _number(_get(d, "b", w), f"{w}.b")
            if a == 0 and b == 0:
                _fail(w, "Robin condition needs (a, b) != (0, 0)")
            out.append(BoundarySpec.robin(a, b, data, comp))
        elif kind in ("dirichlet", "neumann"):
            out.append(BoundarySpec(kind, comp, data))
        else:
            _fail(f"{w}.kind", f"unknown boundary kind {kind!r}; choose dirichlet, neumann or robin")
    return out


def parse_axis(d, where):
    if isinstance(d, list):
        d = {"values": d}
    if not isinstance(d, dict):
        _fail(where, "expected {'range': [lo, hi], 'count': n} or {'values': [...]}")
    if "values" in d:
        vals = np.array([_number(v, f"{where}.values[{i}]") for i, v in enumerate(_get(d, "values", where, list))])
    else:
        lo_hi = _get(d, "range", where, list)
        if len(lo_hi) != 2:
            _fail(f"{where}.range", "expected [lo, hi]")
        lo, hi = (_number(v, f"{where}.range[{i}]") for i, v in enumerate(lo_hi))
        n = _get(d, "count", where, int)
        if n < 1 or (n > 1 and hi < lo):
            _fail(where, "count must be positive and range increasing")
        vals = np.linspace(lo, hi, n)
    if vals.size == 0:
        _fail(where, "axis is empty")
    if np.any(vals < 0):
        _fail(where, "grid must lie in x >= 0, t >= 0")
    return vals


def parse_config(d, source="config"):
    if not isinstance(d, dict):
        _fail(source, "top level must be an object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        _fail(source, f"unknown field(s) {sorted(unknown)}")
    version = _get(d, "schema_version", source)
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version!r}; this build reads {SCHEMA_VERSION}")
    M, family, params = parse_system(_get(d, "system", source))
    horizon = _number(d.get("horizon", float("inf")), "horizon") if "horizon" in d else np.inf
    initial = parse_initial(d.get("initial", {}), M.names)
    boundary = parse_boundary(d.get("boundary", []), M.names, horizon)
    grid = _get(d, "grid", source, dict)
    x = parse_axis(_get(grid, "x", "grid"), "grid.x")
    t = parse_axis(_get(grid, "t", "grid"), "grid.t")
    if np.isfinite(horizon) and t.max() > horizon:
        _fail("grid.t", f"times exceed the data horizon {horizon:g}")
    tol = _number(d.get("tolerance", 1e-8), "tolerance")
    if tol <= 0:
        _fail("tolerance", "must be positive")
    mode = d.get("mode")
    if mode is not None and mode not in ("solve", "verify", "inspect"):
        _fail("mode", f"expected solve, verify or inspect, got {mode!r}")
    verify = _get(d, "verify", source, dict, {})
    problem = BVProblem(M, initial, boundary, tol=tol, horizon=horizon, parameters=params, family=family)
    return ProblemConfig(problem, x, t, family, params, mode, verify, d)


def load_config(path):
    """Read and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(d)
