import json

import numpy as np
import pytest

from utmsys.config import load_config, parse_config
from utmsys.errors import ConfigError


def base(**over):
    d = {
        "schema_version": 1,
        "system": {"id": "klein-gordon", "parameters": {"alpha": 2.0}},
        "initial": {"q": {"kind": "poly-exp", "n": 1}},
        "boundary": [{"kind": "dirichlet", "component": "q", "data": {"kind": "sin", "w": 2}}],
        "grid": {"x": {"range": [0.0, 1.0], "count": 5}, "t": [0.5, 1.0]},
    }
    d.update(over)
    return d


def error_of(d):
    with pytest.raises(ConfigError) as info:
        parse_config(d)
    return str(info.value)


def test_parses_a_named_system():
    cfg = parse_config(base())
    assert cfg.family == "klein-gordon" and cfg.parameters == {"alpha": 2.0}
    assert np.allclose(cfg.x, np.linspace(0, 1, 5)) and list(cfg.t) == [0.5, 1.0]
    P = cfg.problem
    assert P.tol == 1e-8 and P.initial[1].is_zero
    bc = P.boundary[0]
    assert bc.kind == "dirichlet" and bc.component == 0
    assert bc.data(np.array([np.pi / 4]))[0] == pytest.approx(1.0)


def test_explicit_symbol_with_complex_coefficients():
    d = base(system={"symbol": [[[0], [-1]], [[1, 0, 1], [[0, 0.5]]]], "names": ["a", "b"]},
             initial={"a": {"kind": "exp-decay"}}, boundary=[{"kind": "dirichlet", "component": "a"}])
    cfg = parse_config(d)
    assert cfg.family == "generic" and cfg.problem.system.names == ("a", "b")
    L = cfg.problem.system(np.array([2.0]))[0]
    assert np.allclose(L, [[0, -1], [5, 0.5j]])


def test_robin_forms():
    d = base(system={"id": "wave"}, initial={"u": {"kind": "zero"}},
             boundary=[{"kind": "robin", "gamma": 2.0, "data": {"kind": "exp"}}])
    bc = parse_config(d).problem.boundary[0]
    assert (bc.a, bc.b) == (2.0, 1.0)
    d["boundary"] = [{"kind": "robin", "a": 1.0, "b": 3.0}]
    assert parse_config(d).problem.boundary[0].gamma == pytest.approx(1 / 3)


@pytest.mark.parametrize("change, where", [
    ({"schema_version": 2}, "schema_version"),
    ({"extra": 1}, "unknown field"),
    ({"system": {"id": "heat"}}, "system.id"),
    ({"system": {"id": "wave", "parameters": {"c": 1}}}, "system.parameters"),
    ({"initial": {"r": {"kind": "zero"}}}, "initial"),
    ({"initial": {"q": {"kind": "bessel"}}}, "initial.q.kind"),
    ({"initial": {"q": {"kind": "poly-exp", "n": "two"}}}, "initial.q.n"),
    ({"boundary": [{"kind": "cauchy"}]}, "boundary[0].kind"),
    ({"boundary": [{"kind": "robin", "a": 0, "b": 0}]}, "boundary[0]"),
    ({"boundary": [{"kind": "dirichlet", "component": 5}]}, "boundary[0].component"),
    ({"boundary": [{"kind": "dirichlet", "data": {"kind": "square"}}]}, "boundary[0].data.kind"),
    ({"grid": {"x": [-1.0], "t": [1.0]}}, "grid.x"),
    ({"grid": {"x": [1.0]}}, "grid"),
    ({"tolerance": 0}, "tolerance"),
    ({"mode": "plot"}, "mode"),
    ({"horizon": 0.7}, "grid.t"),
    ({"system": {"symbol": [[[1], [0, 1]]]}}, "system.symbol"),
    ({"system": {"symbol": [[[[1, 2, 3]]]]}}, "system.symbol[0][0][0]"),
])
def test_errors_name_the_field(change, where):
    assert where in error_of(base(**change))


def test_load_reports_json_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema_version": 1,\n "system": }')
    with pytest.raises(ConfigError, match=r"line 2, column 12"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    good = tmp_path / "good.json"
    good.write_text(json.dumps(base()))
    assert load_config(good).family == "klein-gordon"
