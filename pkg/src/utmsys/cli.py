"""Command-line front end: ``utmsys solve|verify|inspect --config FILE --out FILE``.

Exit codes: 0 success, 1 configuration error, 2 unsupported case,
3 too many points outside tolerance.
"""

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .config import load_config
from .contour import Region
from .dispersion import BranchSet, find_symmetries
from .errors import ConfigError, GridTooCoarseError, UTMError
from .oracle import FDConfig, fd_reference, images_reference, pde_residual
from .solvers import (
    SolutionField,
    count_required_bcs,
    dalembert_eval,
    generic_solve,
    solve_fn_neumann,
    solve_kg_dirichlet,
    solve_wave_family,
)
from .solvers.generic import evaluation_contour

WORKERS_ENV = "UTMSYS_WORKERS"


# -- report helpers ------------------------------------------------------------

def _num(c):
    c = complex(c)
    if abs(c.imag) < 1e-14:
        return f"{c.real:g}"
    if abs(c.real) < 1e-14:
        return f"{c.imag:g}i"
    return f"({c.real:g}{c.imag:+g}i)"


def poly_str(coeffs, var="k", tol=1e-14):
    """Ascending coefficients as text, e.g. [1, 0, 1] -> '1 + k^2'."""
    parts = []
    for p, c in enumerate(coeffs):
        if abs(c) <= tol:
            continue
        mono = "" if p == 0 else (var if p == 1 else f"{var}^{p}")
        if p and abs(c - 1) <= tol:
            parts.append(mono)
        elif p and abs(c + 1) <= tol:
            parts.append("-" + mono)
        else:
            parts.append(_num(c) + (" " + mono if mono else ""))
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def branch_formula(M):
    """Closed form of the dispersion branches of a 2 x 2 system as text."""
    C = M.bivariate_char_poly().T  # C[a, b] multiplies Omega**a k**b
    if C.shape[0] != 3:
        return f"roots in Omega of a degree-{C.shape[0] - 1} polynomial"
    lead = complex(C[2, 0])
    c1, c0 = C[1] / lead, C[0] / lead
    # Omega = -c1/2 +- sqrt(c1^2/4 - c0)
    sq = np.convolve(c1, c1) / 4
    disc = np.zeros(max(len(sq), len(c0)), dtype=complex)
    disc[: len(sq)] += sq
    disc[: len(c0)] -= c0
    mean = poly_str(-c1 / 2)
    nz = disc[np.abs(disc) > 1e-14]
    if nz.size and np.all(np.abs(nz.imag) < 1e-14) and np.all(nz.real < 0):
        root = f"±i√({poly_str(-disc.real)})"
    else:
        root = f"±√({poly_str(disc)})"
    return root if mean == "0" else f"{mean} {root}"


def dplus_summary(B, extent=4.0, count=41):
    """Fraction of a sample of the upper half plane covered by D+."""
    kr = np.linspace(-extent, extent, count)
    ki = np.linspace(extent / count, extent, count)
    K = kr[None, :] + 1j * ki[:, None]
    inside = Region(B).contains(K)
    return float(inside.mean())


def inspect_report(cfg):
    P = cfg.problem
    M = P.system
    B = BranchSet(M)
    S = find_symmetries(M, B)
    path = evaluation_contour(B)
    required, report = count_required_bcs(M, S, path)
    return {
        "system": cfg.family,
        "parameters": cfg.parameters,
        "components": list(M.names),
        "branches": branch_formula(M),
        "labels": B.labels.describe(),
        "branch_points": [
            {"k": [b.k.real, b.k.imag], "kind": b.kind} for b in B.branch_points
        ],
        "symmetries": S.describe(),
        "D_plus": {
            "definition": Region.description,
            "contour": path.kind,
            "upper_half_plane_fraction": dplus_summary(B),
        },
        "required_bcs": required,
        "given_bcs": len(P.boundary),
        "bc_report": report,
    }


# -- dispatch ------------------------------------------------------------------

def _single_bc(P, kind, component):
    if len(P.boundary) != 1:
        return None
    bc = P.boundary[0].normalized()
    if bc.component == component and bc.kind in kind:
        return bc
    return None


def solve_problem(cfg, workers=1):
    """Route a configuration to the closed-form solver of its family, else the generic one."""
    P, x, t = cfg.problem, cfg.x, cfg.t
    prm = cfg.parameters
    if cfg.family == "klein-gordon":
        bc = _single_bc(P, ("dirichlet",), 0)
        if bc is not None:
            return solve_kg_dirichlet(prm["alpha"], *P.initial, bc.data, x, t, P.tol, workers)
    elif cfg.family == "fitzhugh-nagumo":
        bc = _single_bc(P, ("neumann",), 0)
        if bc is not None:
            return solve_fn_neumann(prm["beta"], *P.initial, bc.data, x, t, P.tol, workers)
    elif cfg.family == "wave":
        bc = _single_bc(P, ("dirichlet", "neumann", "robin"), 0)
        # Neumann data with a != 0 goes through the generic elimination
        if bc is not None and not (bc.kind == "neumann" and prm["a"] != 0):
            return solve_wave_family(prm["a"], *P.initial, P.boundary[0], x, t, P.tol, workers)
    return generic_solve(P, x, t, workers)


# -- output --------------------------------------------------------------------

def _fmt(v):
    return "%.17g" % v


def csv_header(names, error="error"):
    cols = ["x", "t"]
    for n in names:
        cols += [f"re_{n}", f"im_{n}"]
    return ",".join(cols + [error])


def write_csv(path, F, components=None):
    """One row per (t, x) in grid order: x, t, (re, im) per component, error."""
    comps = range(len(F.names)) if components is None else components
    names = [F.names[c] for c in comps]
    lines = [csv_header(names)]
    for i, tt in enumerate(F.t):
        for j, xx in enumerate(F.x):
            row = [_fmt(xx), _fmt(tt)]
            for c in comps:
                v = F.values[i, j, c]
                row += [_fmt(v.real), _fmt(v.imag)]
            row.append(_fmt(F.errors[i, j]))
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- verification --------------------------------------------------------------

def reference_solution(cfg):
    """(oracle name, reference field, compared component indices)."""
    P = cfg.problem
    if cfg.family == "wave" and cfg.parameters["a"] == 0 and len(P.boundary) == 1:
        bc = P.boundary[0]
        X, T = np.meshgrid(cfg.x, cfg.t)
        u = dalembert_eval(bc, P.initial[0], P.initial[1], None, X, T)
        vals = np.zeros(X.shape + (P.system.size,), dtype=complex)
        vals[..., 0] = u
        F = SolutionField(cfg.x, cfg.t, vals, np.zeros(X.shape), P.system.names, {})
        return "dalembert", F, [0]
    homogeneous = all(b.normalized().kind != "robin" and b.data.is_zero for b in P.boundary)
    if homogeneous and cfg.family in ("klein-gordon", "fitzhugh-nagumo"):
        return "images", images_reference(P, cfg.x, cfg.t), list(range(P.system.size))
    return "finite-difference", fd_reference(P, FDConfig(), cfg.x, cfg.t), list(range(P.system.size))


def verify_report(cfg, F):
    name, R, comps = reference_solution(cfg)
    diff = np.abs(F.values[..., comps] - R.values[..., comps]).max(axis=-1)
    tol = float(cfg.verify.get("tolerance", 1e-4))
    rows = [
        {"t": float(tt), "max_abs_difference": float(diff[i].max()),
         "max_quadrature_error": float(F.errors[i].max()), "max_oracle_error": float(R.errors[i].max())}
        for i, tt in enumerate(F.t)
    ]
    try:
        residual = pde_residual(F, cfg.problem.system)
    except GridTooCoarseError:
        residual = None
    report = {
        "oracle": name,
        "components": [F.names[c] for c in comps],
        "tolerance": tol,
        "max_abs_difference": float(diff.max()),
        "failing_fraction": float(np.mean(diff > tol)),
        "pde_residual": residual,
        "rows": rows,
    }
    return report, R, comps, diff


def agreement_table(report):
    lines = [f"oracle: {report['oracle']}  components: {', '.join(report['components'])}",
             f"{'t':>10}  {'max |diff|':>12}  {'quad err':>12}  {'oracle err':>12}"]
    for r in report["rows"]:
        lines.append(f"{r['t']:10.4g}  {r['max_abs_difference']:12.3e}  "
                     f"{r['max_quadrature_error']:12.3e}  {r['max_oracle_error']:12.3e}")
    lines.append(f"max error: {report['max_abs_difference']:.3e} (tolerance {report['tolerance']:g})")
    if report["pde_residual"] is not None:
        lines.append(f"pde residual: {report['pde_residual']:.3e}")
    return "\n".join(lines)


# -- entry point ---------------------------------------------------------------

def default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _sibling(out, suffix):
    out = Path(out)
    return out.with_name(f"{out.stem}{suffix}")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="utmsys", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=("solve", "verify", "inspect"))
    ap.add_argument("--config", required=True, help="JSON problem configuration")
    ap.add_argument("--out", required=True, help="solution CSV (solve, verify) or report JSON (inspect)")
    ap.add_argument("--tol", type=float, default=None, help="quadrature tolerance per point")
    ap.add_argument("--workers", type=int, default=None, help=f"worker threads (default ${WORKERS_ENV} or CPU count)")
    return ap


def run(args):
    cfg = load_config(args.config)
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol: must be positive")
        cfg.problem.tol = args.tol
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise ConfigError("--workers: must be at least 1")

    if args.mode == "inspect":
        report = inspect_report(cfg)
        _write_json(args.out, report)
        print(f"branches: {report['branches']}")
        print(f"symmetries: {{{', '.join(report['symmetries'])}}}")
        print(f"D+ contour: {report['D_plus']['contour']}")
        print(f"required BCs: {report['required_bcs']} (data on {', '.join(report['bc_report']['data_components'])})")
        return 0

    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        F = solve_problem(cfg, workers)
    if caught:
        print(f"{len(caught)} quadrature warning(s); first: {caught[0].message}", file=sys.stderr)
    write_csv(args.out, F)
    elapsed = time.perf_counter() - start
    threshold = float(cfg.verify.get("threshold", 0.05))
    # a point fails when its error estimate exceeds error_limit (default 100 tol)
    limit = float(cfg.verify.get("error_limit", 100 * cfg.problem.tol))
    quad_fail = float(np.mean(F.errors > limit))
    print(f"solved {F.values.shape[0]} x {F.values.shape[1]} points in {elapsed:.1f} s; "
          f"max error estimate {F.errors.max(initial=0.0):.2e}")
    status = 0
    if quad_fail > threshold:
        print(f"{quad_fail:.1%} of points miss the quadrature tolerance", file=sys.stderr)
        status = 3
    if args.mode == "verify":
        report, R, comps, _ = verify_report(cfg, F)
        write_csv(_sibling(args.out, "_oracle.csv"), R, comps)
        report["quadrature_failing_fraction"] = quad_fail
        _write_json(_sibling(args.out, "_report.json"), report)
        print(agreement_table(report))
        if report["failing_fraction"] > threshold:
            status = 3
    return status


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except UTMError as exc:
        print(f"unsupported case: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
