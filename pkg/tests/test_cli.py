import json

import numpy as np
import pytest

from utmsys.cli import csv_header, main, poly_str


def write_config(tmp_path, **over):
    d = {
        "schema_version": 1,
        "system": {"id": "wave", "parameters": {"a": 0.0}},
        "initial": {"u": {"kind": "poly-exp", "n": 2}},
        "boundary": [{"kind": "dirichlet", "component": "u", "data": {"kind": "poly-exp", "n": 2}}],
        "grid": {"x": {"range": [0.2, 1.0], "count": 3}, "t": [0.5, 1.0]},
    }
    d.update(over)
    p = tmp_path / "problem.json"
    p.write_text(json.dumps(d))
    return p


def run(tmp_path, mode, cfg, out="out.csv", *extra):
    out = tmp_path / out
    code = main([mode, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    raw = path.read_bytes()
    lines = raw.decode().split("\n")
    return raw, lines[0], np.array([[float(v) for v in ln.split(",")] for ln in lines[1:-1]])


def test_klein_gordon_inspect(tmp_path, capsys):
    cfg = write_config(tmp_path, system={"id": "klein-gordon", "parameters": {"alpha": 1.0}},
                       initial={}, boundary=[{"kind": "dirichlet", "component": "q"}])
    code, out = run(tmp_path, "inspect", cfg, "report.json")
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["branches"] == "±i√(1 + k^2)"
    # each map is listed once per branch it relabels
    assert {s.split()[0] for s in rep["symmetries"]} == {"k", "-k"}
    assert rep["required_bcs"] == 1
    assert "required BCs: 1" in capsys.readouterr().out


def test_empty_data_solves_to_zero(tmp_path):
    cfg = write_config(tmp_path, initial={}, boundary=[{"kind": "dirichlet"}])
    code, out = run(tmp_path, "solve", cfg)
    assert code == 0
    raw, header, rows = read_csv(out)
    assert header == csv_header(["u", "v"]) == "x,t,re_u,im_u,re_v,im_v,error"
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert rows.shape == (6, 7)
    assert np.all(rows[:, 2:6] == 0)
    # grid order: time outer, space inner
    assert np.allclose(rows[:3, 0], [0.2, 0.6, 1.0]) and set(rows[:3, 1]) == {0.5}


def test_output_is_independent_of_worker_count(tmp_path):
    cfg = write_config(tmp_path)
    c1, a = run(tmp_path, "solve", cfg, "a.csv", "--workers", "1")
    c2, b = run(tmp_path, "solve", cfg, "b.csv", "--workers", "2")
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes()
    row = a.read_text().split("\n")[1].split(",")
    # full precision decimal
    assert float(row[2]) != 0 and len(row[2].replace("-", "").replace(".", "").split("e")[0]) >= 15


@pytest.mark.parametrize("text", [
    '{"schema_version": 1, "system": }',
    json.dumps({"schema_version": 1, "system": {"id": "wave"}, "initial": {},
                "boundary": [{"kind": "dirichlet", "component": "w"}], "grid": {"x": [0.0], "t": [1.0]}}),
], ids=["syntax", "component"])
def test_config_errors_exit_1(tmp_path, text, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(text)
    code, _ = run(tmp_path, "solve", cfg)
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_bad_flags_exit_1(tmp_path):
    cfg = write_config(tmp_path)
    assert run(tmp_path, "solve", cfg, "o.csv", "--tol", "-1")[0] == 1
    assert run(tmp_path, "solve", cfg, "o.csv", "--workers", "0")[0] == 1


def test_unsupported_case_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, system={"id": "wave", "parameters": {"a": 1.0}},
                       boundary=[{"kind": "robin", "a": 1.0, "b": 1.0}])
    code, _ = run(tmp_path, "solve", cfg)
    assert code == 2
    assert "unsupported case" in capsys.readouterr().err


def test_wave_dirichlet_verify(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code, out = run(tmp_path, "verify", cfg, "wave.csv")
    assert code == 0
    text = capsys.readouterr().out
    assert "oracle: dalembert" in text and "max error:" in text
    rep = json.loads((tmp_path / "wave_report.json").read_text())
    assert rep["oracle"] == "dalembert" and rep["failing_fraction"] == 0
    assert rep["max_abs_difference"] <= 1e-6
    _, header, rows = read_csv(tmp_path / "wave_oracle.csv")
    assert header == "x,t,re_u,im_u,error" and rows.shape == (6, 5)
    _, _, sol = read_csv(out)
    assert np.abs(sol[:, 2] - rows[:, 2]).max() <= 1e-6


def test_tight_error_limit_exits_3(tmp_path):
    cfg = write_config(tmp_path, verify={"error_limit": 1e-300, "threshold": 0.0})
    assert run(tmp_path, "solve", cfg)[0] == 3


def test_poly_str():
    assert poly_str([1, 0, 1]) == "1 + k^2"
    assert poly_str([0, -1, 2.5]) == "-k + 2.5 k^2"
    assert poly_str([0]) == "0"
