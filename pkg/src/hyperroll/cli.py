"""Command-line entry point: classify, roll, verify.

Every command reads a TOML/JSON run configuration, emits a JSON report
(stdout or --out), and optionally dumps plot-ready CSV (columns t,
quantity, value) under --plot-dir.  Exit codes: 0 success / all checks
pass, 1 verification failure, 2 usage or configuration error, 3 numeric
failure during integration or linear algebra.
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import decomposition as dc
from . import holonomy as ho
from . import lorentz as lz
from . import manifolds as mf
from . import rolling as rl
from .config import ConfigError, load_config_file, parse_run_config

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def emit_report(report, out_path):
    text = json.dumps(report, indent=2, sort_keys=True, default=_default)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)


def emit_plot(plot_dir, name, rows):
    """rows: iterable of (t, quantity, value)."""
    if not plot_dir:
        return
    path = Path(plot_dir)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / f"{name}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "quantity", "value"])
        for t, q, v in rows:
            writer.writerow([t, q, v])


def base_report(command, run, started):
    return {
        "command": command,
        "config": run.raw,
        "c": run.c,
        "base_point": run.base_point,
        "tool_version": __version__,
        "timing_seconds": round(time.time() - started, 3),
        "tolerances": {
            "rank_tol": run.sampling.rank_tol,
            "min_generator_norm": run.sampling.min_generator_norm,
            "subspace_tol": run.sampling.subspace_tol,
            "n1_tol": run.sampling.n1_tol,
            "step": run.sampling.step,
        },
    }


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def _transversal_hints(run, rep):
    """Best-effort decomposition hints: distinguished-slice residual and the
    warp recovered along the first coordinate axis."""
    hints = {"n1_residual": rep.diagnostics.get("n1_residual")}
    form = lz.BilinearForm(run.spec.n, run.c)
    v1 = None
    for cand in rep.invariant_subspaces:
        pos, neg, null = lz.restricted_signature(cand, form)
        if neg == 1 and null == 0:
            v1 = cand
            break
    if v1 is None or rep.algebra_dim == 0:
        hints["warp"] = "skipped (maximally degenerate)"
        return hints
    try:
        fld = dc.InvariantSubspaceField.from_frame_basis(
            run.spec, run.c, run.base_point, v1.vectors, step=run.sampling.step)
        split = dc.SplitSection(fld)
        lo, hi = run.spec.domain[0]
        grid = np.linspace(lo + 0.08 * (hi - lo), hi - 0.08 * (hi - lo), 41)
        wr = dc.recover_warp(
            run.spec, lambda x: split.value(x).w1 / split.value(x).w1_scalar,
            run.base_point, 0, grid)
        hints["warp"] = {
            "kind": wr.kind,
            "coef_cosh": wr.coef_cosh,
            "coef_sinh": wr.coef_sinh,
            "shift": wr.shift,
            "fit_residual": wr.fit_residual,
            "ode_residual": wr.ode_residual,
        }
    except (dc.NotAWarpError, dc.WrongCaseError, dc.DegenerateSplitError) as exc:
        hints["warp"] = f"unavailable: {exc}"
    return hints


def cmd_classify(run, args):
    started = time.time()
    if run.c > 0:
        alg = ho.holonomy_algebra(run.spec, run.c, run.base_point, run.sampling)
        report = base_report("classify", run, started)
        report["results"] = {
            "algebra_dim": alg.dim,
            "full_dim": ho.FULL_DIM(alg.form),
            "diagnostics": alg.diagnostics,
            "note": "raw dimension only; verdicts are defined for c < 0",
        }
        emit_report(report, args.out)
        return EXIT_OK

    rep = ho.classify(run.spec, run.c, run.base_point, run.sampling)
    results = rep.to_dict()
    if rep.verdict == ho.VERDICT_LIGHTLIKE:
        results["hints"] = {
            "lightlike_direction": rep.lightlike_direction,
            "line_section": "span of (L, 1) at the base point",
        }
    elif rep.verdict == ho.VERDICT_TRANSVERSAL and not args.no_hints:
        results["hints"] = _transversal_hints(run, rep)
    report = base_report("classify", run, started)
    report["results"] = results
    emit_report(report, args.out)
    emit_plot(args.plot_dir, "classify", [
        (0.0, "algebra_dim", rep.algebra_dim),
        (0.0, "full_dim", ho.FULL_DIM(lz.BilinearForm(run.spec.n, run.c))),
        (0.0, "n_invariant_subspaces", len(rep.invariant_subspaces)),
    ])
    return EXIT_OK


# ---------------------------------------------------------------------------
# roll
# ---------------------------------------------------------------------------

def load_path_file(run, path_file):
    data = json.loads(Path(path_file).read_text())
    if "waypoints" in data:
        pts = [np.asarray(p, dtype=float) for p in data["waypoints"]]
    elif "rectangle" in data:
        r = data["rectangle"]
        anchor = np.asarray(r["anchor"], dtype=float)
        loop = mf.rectangle_loop(run.spec, anchor, tuple(r["plane"]), r["eps"])
        return loop, True
    else:
        raise ConfigError("path file needs 'waypoints' or 'rectangle'")
    if len(pts) == 0:
        return None, False
    for p in pts:
        if p.shape != (run.spec.n,):
            raise ConfigError("waypoint dimension mismatch")
        if not run.spec.contains(p):
            raise ConfigError(f"waypoint {p} outside the chart")
    if len(pts) == 1:
        return None, False
    closed = bool(np.array_equal(pts[0], pts[-1]))
    return mf.chart_path(run.spec, pts), closed


def cmd_roll(run, args):
    started = time.time()
    path, closed = load_path_file(run, args.path)
    report = base_report("roll", run, started)
    step = args.step or 1e-3

    if path is None:
        q0 = rl.initial_state(run.spec, run.c, run.base_point)
        report["results"] = {
            "note": "empty path: initial state echoed",
            "state": {"x": q0.x, "xhat": q0.xhat, "frame": q0.frame.tolist()},
            "residuals": rl.state_residuals(run.spec, run.c, q0),
        }
        emit_report(report, args.out)
        return EXIT_OK

    q0 = rl.initial_state(run.spec, run.c, path.start)
    res = rl.roll_along(run.spec, run.c, q0, path, step=step,
                        drift_limit=args.drift_limit,
                        sample_every=args.sample_every)
    results = {
        "closed": closed,
        "truncated": res.truncated,
        "drift": res.drift,
        "final_state": {
            "x": res.state.x,
            "xhat": res.state.xhat,
            "frame": res.state.frame.tolist(),
        },
    }
    if args.traj_out and res.samples:
        with open(args.traj_out, "w") as fh:
            for s in res.samples:
                fh.write(json.dumps({
                    "t": s["t"],
                    "x": s["state"].x,
                    "xhat": s["state"].xhat,
                    "frame": s["state"].frame.tolist(),
                    "residuals": s["residuals"],
                }, default=_default, sort_keys=True) + "\n")
        results["trajectory_file"] = args.traj_out

    if closed and not res.truncated:
        b = rl.rolling_loop_element(run.spec, run.c, q0, path, step=step)
        corr = rl.holonomy_correspondence(run.spec, run.c, q0, path, step=step)
        results["loop_element"] = b.tolist()
        results["loop_element_vs_identity"] = float(
            np.abs(b - np.eye(run.spec.n + 1)).max())
        results["correspondence"] = {
            "convention": corr.convention,
            "deviation": corr.matched_deviation,
            "frozen_convention": rl.CORRESPONDENCE_CONVENTION,
        }
    report["results"] = results
    emit_report(report, args.out)

    rows = []
    for s in res.samples:
        for k, v in zip("xyzw", s["state"].x):
            rows.append((s["t"], f"x_{k}", v))
        for i, v in enumerate(s["state"].xhat):
            rows.append((s["t"], f"xhat_{i}", v))
        for name, v in s["residuals"].items():
            rows.append((s["t"], f"drift_{name}", v))
    emit_plot(args.plot_dir, "roll", rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _row(rows, check, residual, tol, note=""):
    status = "pass" if residual <= tol else "fail"
    rows.append({"check": check, "status": status,
                 "residual": float(residual), "tolerance": tol, "note": note})


def _skip(rows, check, note):
    rows.append({"check": check, "status": "skipped", "residual": None,
                 "tolerance": None, "note": note})


def _unit_geodesic_probe(run, t_max=1.0):
    """A unit geodesic from the base point staying inside the chart."""
    spec = run.spec
    g = spec.metric(run.base_point)
    width = spec.domain[:, 1] - spec.domain[:, 0]
    direction = np.zeros(spec.n)
    # head for the roomier side of the box along the first axis, with a
    # small transverse component to avoid symmetry accidents
    lo_room = run.base_point[0] - spec.domain[0, 0]
    hi_room = spec.domain[0, 1] - run.base_point[0]
    direction[0] = 1.0 if hi_room >= lo_room else -1.0
    if spec.n > 1:
        direction[-1] = 0.05
    v = direction / np.sqrt(direction @ g @ direction)
    res = mf.geodesic(spec, run.base_point, v, t_max, step=1e-3)
    t_end = res.ts[-1]
    if t_end < 0.2:
        raise mf.DomainError("chart too small for a transport probe")
    return res, t_end


def _suite_transport(run, rows):
    spec = run.spec
    res, t_end = _unit_geodesic_probe(run)
    from .connection import transport_ext

    path = mf.Path(spec, [mf.GeodesicPiece(run.base_point, res.vs[0], t_end)])
    out = transport_ext(spec, -1.0, path,
                        np.append(np.zeros(spec.n), 1.0), step=1e-3)
    expected = np.append(-np.sinh(t_end) * res.v_end, np.cosh(t_end))
    _row(rows, "unit_section_transport_closed_form",
         np.abs(out.value - expected).max(), 1e-6)

    r0, a = 0.4, 0.7
    out2 = transport_ext(spec, -1.0, path,
                         np.append(a * res.vs[0], r0), step=1e-3)
    expected_r = r0 * np.cosh(t_end) - a * np.sinh(t_end)
    _row(rows, "scalar_hyperbolic_ode", abs(out2.value[-1] - expected_r), 1e-6)


def verify_lemmas(run):
    rows = []
    _suite_transport(run, rows)
    rep = ho.classify(run.spec, run.c, run.base_point, run.sampling)
    form = lz.BilinearForm(run.spec.n, run.c)

    if rep.verdict == ho.VERDICT_LIGHTLIKE:
        line = next(s for s in rep.invariant_subspaces if s.dim == 1)
        fld = dc.InvariantSubspaceField.from_frame_basis(
            run.spec, run.c, run.base_point, line.vectors,
            step=run.sampling.step)
        l_field = dc.lightlike_field_from_line(fld)
        pts = ho.sample_points(run.spec, 6, run.sampling.seed, 0.15)
        battery = dc.lightlike_structure(run.spec, run.c, l_field, pts)
        _row(rows, "lightlike_shape_operator", battery["shape_operator"], 1e-4)
        _row(rows, "lightlike_geodesic_field", battery["geodesic"], 1e-4)
        _row(rows, "lightlike_line_invariance", battery["invariance"], 1e-4)
        for name in ("curvature_annihilation", "leaf_second_fundamental_form",
                     "leaf_spherical"):
            _skip(rows, name, "transversal-case battery (lightlike verdict)")
    elif rep.verdict in (ho.VERDICT_TRANSVERSAL, ho.VERDICT_UNLOCATED):
        if not rep.invariant_subspaces:
            _skip(rows, "curvature_annihilation", "no subspace located")
        else:
            v1 = next((s for s in rep.invariant_subspaces
                       if lz.restricted_signature(s, form)[1] == 1),
                      rep.invariant_subspaces[0])
            fld = dc.InvariantSubspaceField.from_frame_basis(
                run.spec, run.c, run.base_point, v1.vectors,
                step=run.sampling.step)
            split = dc.SplitSection(fld)
            pts = ho.sample_points(run.spec, 6, run.sampling.seed, 0.15)
            _row(rows, "curvature_annihilation",
                 dc.curvature_annihilation(run.spec, split, pts), 1e-4)
            if rep.algebra_dim > 0:
                dists = dc.induced_distributions(run.spec, split)
                x = run.base_point
                if "D1" in dists:
                    g = run.spec.metric(x)
                    cols = dists["D1"].matrix_at(x)
                    gram = cols.T @ g @ cols
                    ii, _ = dc.second_fundamental_form(run.spec, dists["D1"], x)
                    v = split.value(x)
                    worst = max(
                        np.abs(ii[a_, b_] - gram[a_, b_] * v.w1 / v.w1_scalar).max()
                        for a_ in range(dists["D1"].rank)
                        for b_ in range(dists["D1"].rank))
                    _row(rows, "leaf_second_fundamental_form", worst, 1e-4)
                    sph = dc.spherical_check(
                        run.spec, dists["D1"],
                        lambda p: split.value(p).w1 / split.value(p).w1_scalar, x)
                    _row(rows, "leaf_spherical", sph["residual"], 1e-4)
            else:
                _skip(rows, "leaf_second_fundamental_form",
                      "flat connection: no distinguished leaves")
        for name in ("lightlike_shape_operator", "lightlike_geodesic_field"):
            _skip(rows, name, "lightlike-case battery (transversal verdict)")
    else:
        for name in ("curvature_annihilation", "lightlike_shape_operator"):
            _skip(rows, name, "holonomy irreducible: no invariant structure")

    # sinh-rescaled Jacobi field along the radial direction of polar charts
    if run.manifold_kind == "polar_cosh_warp" and run.spec.base.fiber.n >= 1:
        x = run.base_point.copy()
        u = np.zeros(run.spec.n)
        u[0] = 1.0
        g = run.spec.metric(x)
        xv = np.zeros(run.spec.n)
        xv[1] = 1.0
        xv = xv / np.sqrt(xv @ g @ xv)
        t_target = min(x[0] + 0.5, run.spec.domain[0, 1] - 0.05)
        jc = mf.jacobi_check(run.spec, x, u, xv, t=t_target,
                             radial_offset=x[0], step=1e-3)
        if jc.applicable:
            _row(rows, "radial_jacobi_field", jc.residual, 1e-5)
        else:
            _skip(rows, "radial_jacobi_field", jc.note)
    else:
        _skip(rows, "radial_jacobi_field", "needs a polar warped chart")
    return rows, rep


def verify_converse(run):
    rows = []
    rep = ho.classify(run.spec, run.c, run.base_point, run.sampling)
    reducible = rep.verdict != ho.VERDICT_IRREDUCIBLE
    rows.append({"check": "holonomy_reducible",
                 "status": "pass" if reducible else "fail",
                 "residual": None, "tolerance": None,
                 "note": f"verdict {rep.verdict}, dim {rep.algebra_dim}"})
    expected = {"exp_warp": ho.VERDICT_LIGHTLIKE,
                "sinh_cosh_warp": ho.VERDICT_TRANSVERSAL,
                "polar_cosh_warp": ho.VERDICT_TRANSVERSAL,
                "graph_cosh_warp": ho.VERDICT_TRANSVERSAL}
    kind = run.manifold_kind
    if kind in expected:
        rows.append({"check": "expected_case",
                     "status": "pass" if rep.verdict == expected[kind] else "fail",
                     "residual": None, "tolerance": None,
                     "note": f"{kind} expects {expected[kind]}"})
    else:
        _skip(rows, "expected_case", f"no expectation for kind '{kind}'")
    if rep.verdict == ho.VERDICT_LIGHTLIKE and kind == "exp_warp":
        target = np.zeros(run.spec.n)
        target[0] = 1.0
        _row(rows, "lightlike_direction_radial",
             float(np.linalg.norm(rep.lightlike_direction - target)), 1e-5)
    return rows, rep


def verify_forward(run):
    rows = []
    rep = ho.classify(run.spec, run.c, run.base_point, run.sampling)
    if rep.verdict == ho.VERDICT_IRREDUCIBLE:
        rows.append({"check": "reducibility_data", "status": "fail",
                     "residual": None, "tolerance": None,
                     "note": "holonomy irreducible: nothing to decompose"})
        return rows, rep
    form = lz.BilinearForm(run.spec.n, run.c)

    if rep.verdict == ho.VERDICT_LIGHTLIKE:
        line = next(s for s in rep.invariant_subspaces if s.dim == 1)
        fld = dc.InvariantSubspaceField.from_frame_basis(
            run.spec, run.c, run.base_point, line.vectors, step=run.sampling.step)
        l_field = dc.lightlike_field_from_line(fld)
        pts = ho.sample_points(run.spec, 6, run.sampling.seed, 0.15)
        battery = dc.lightlike_structure(run.spec, run.c, l_field, pts)
        _row(rows, "lightlike_battery",
             max(battery.values()), 1e-4)
        lo, hi = run.spec.domain[0]
        grid = np.linspace(lo + 0.08 * (hi - lo), hi - 0.08 * (hi - lo), 81)
        wr = dc.recover_warp(run.spec, l_field, run.base_point, 0, grid)
        _row(rows, "warp_fit_residual", wr.fit_residual, 1e-4)
        expect = np.exp(-(grid - grid[0]))
        _row(rows, "warp_exponential_profile",
             float(np.abs(wr.normalized(grid) - expect).max()), 1e-4,
             note=f"kind {wr.kind}")
        return rows, rep

    v1 = next((s for s in rep.invariant_subspaces
               if lz.restricted_signature(s, form)[1] == 1),
              rep.invariant_subspaces[0] if rep.invariant_subspaces else None)
    if v1 is None:
        rows.append({"check": "invariant_subspace", "status": "fail",
                     "residual": None, "tolerance": None,
                     "note": "reducible but no subspace located"})
        return rows, rep
    fld = dc.InvariantSubspaceField.from_frame_basis(
        run.spec, run.c, run.base_point, v1.vectors, step=run.sampling.step)
    split = dc.SplitSection(fld)
    pts = ho.sample_points(run.spec, 5, run.sampling.seed, 0.15)

    worst = {"sum": 0.0, "orthogonality": 0.0}
    for x in pts:
        r = split.residuals(x)
        worst["sum"] = max(worst["sum"], r["sum"])
        worst["orthogonality"] = max(worst["orthogonality"], r["orthogonality"])
    _row(rows, "split_identities", worst["sum"], 1e-8)
    _row(rows, "split_orthogonality", worst["orthogonality"], 1e-8)
    _row(rows, "curvature_annihilation",
         dc.curvature_annihilation(run.spec, split, pts), 1e-4)

    if rep.algebra_dim == 0:
        _skip(rows, "warped_splitting_checks", "flat connection: degenerate split")
        return rows, rep

    dists = dc.induced_distributions(run.spec, split)
    for name in ("D1", "D2", "V2M"):
        if name not in dists:
            _skip(rows, f"integrable_{name}", "rank zero")
            continue
        worst_fro = 0.0
        for x in pts:
            ok, res = dc.frobenius_check(run.spec, dists[name], x)
            if ok is None:
                continue
            worst_fro = max(worst_fro, res)
        _row(rows, f"integrable_{name}", worst_fro, 1e-4)
    if "V2M" in dists:
        worst_ii = 0.0
        for x in pts:
            ii, _ = dc.second_fundamental_form(run.spec, dists["V2M"], x)
            worst_ii = max(worst_ii, float(np.abs(ii).max()))
        _row(rows, "totally_geodesic_V2M", worst_ii, 1e-4)
    if "D1" in dists:
        worst_ii = worst_sph = 0.0
        for x in pts:
            g = run.spec.metric(x)
            cols = dists["D1"].matrix_at(x)
            gram = cols.T @ g @ cols
            ii, _ = dc.second_fundamental_form(run.spec, dists["D1"], x)
            v = split.value(x)
            worst_ii = max(worst_ii, max(
                float(np.abs(ii[a_, b_] - gram[a_, b_] * v.w1 / v.w1_scalar).max())
                for a_ in range(dists["D1"].rank)
                for b_ in range(dists["D1"].rank)))
            sph = dc.spherical_check(
                run.spec, dists["D1"],
                lambda p: split.value(p).w1 / split.value(p).w1_scalar, x)
            worst_sph = max(worst_sph, sph["residual"])
        _row(rows, "umbilic_D1_leaves", worst_ii, 1e-4)
        _row(rows, "spherical_D1_leaves", worst_sph, 1e-4)

    lo, hi = run.spec.domain[0]
    grid = np.linspace(lo + 0.08 * (hi - lo), hi - 0.08 * (hi - lo), 101)
    try:
        wr1 = dc.recover_warp(
            run.spec, lambda x: split.value(x).w1 / split.value(x).w1_scalar,
            run.base_point, 0, grid)
        _row(rows, "warp_fit_residual", wr1.fit_residual, 1e-4,
             note=f"kind {wr1.kind}")
        _row(rows, "warp_ode_residual", wr1.ode_residual, 1e-4)
        if wr1.kind == "cosh_like":
            f1 = wr1.normalized(grid)
            _row(rows, "warp_cosh_profile",
                 float(np.abs((f1 - np.cosh(grid - wr1.shift))
                              / np.cosh(grid - wr1.shift)).max()), 1e-6,
                 note="self-consistency of the normalized fit")
            try:
                wr2 = dc.recover_warp(
                    run.spec,
                    lambda x: split.value(x).w2 / split.value(x).w2_scalar,
                    run.base_point, 0, grid)
                if wr2.kind == "sinh_like":
                    f2 = wr2.normalized(grid)
                    _row(rows, "warp_pair_identity",
                         float(np.abs(f1**2 - f2**2 - 1.0).max()), 1e-4)
                else:
                    _skip(rows, "warp_pair_identity",
                          f"second factor kind {wr2.kind}")
            except (dc.NotAWarpError, ZeroDivisionError):
                _skip(rows, "warp_pair_identity", "no sinh factor on this chart")
    except dc.NotAWarpError as exc:
        rows.append({"check": "warp_fit_residual", "status": "fail",
                     "residual": None, "tolerance": None, "note": str(exc)})
    return rows, rep


SUITES = {"converse": verify_converse, "forward": verify_forward,
          "lemmas": verify_lemmas}


def cmd_verify(run, args):
    started = time.time()
    if args.suite not in SUITES:
        print(f"unknown suite '{args.suite}'; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    rows, rep = SUITES[args.suite](run)
    n_fail = sum(1 for r in rows if r["status"] == "fail")
    report = base_report("verify", run, started)
    report["results"] = {
        "suite": args.suite,
        "verdict": rep.verdict,
        "algebra_dim": rep.algebra_dim,
        "checks": rows,
        "n_fail": n_fail,
    }
    emit_report(report, args.out)
    emit_plot(args.plot_dir, f"verify_{args.suite}",
              [(0.0, r["check"], r["residual"] if r["residual"] is not None
                else float("nan")) for r in rows])
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="hyperroll",
        description="Holonomy classification, rolling simulation and "
                    "warped-product verification for chart metrics rolling "
                    "on constant-curvature spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML or JSON run config")
        p.add_argument("--c", type=float, default=None,
                       help="override the curvature parameter")
        p.add_argument("--seed", type=int, default=None,
                       help="override the sampling seed")
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--plot-dir", default=None,
                       help="write plot CSVs (t, quantity, value) here")

    p_classify = sub.add_parser("classify", help="holonomy classification")
    common(p_classify)
    p_classify.add_argument("--no-hints", action="store_true",
                            help="skip decomposition hints")

    p_roll = sub.add_parser("roll", help="simulate rolling along a path")
    common(p_roll)
    p_roll.add_argument("--path", required=True,
                        help="JSON path file with 'waypoints' or 'rectangle'")
    p_roll.add_argument("--step", type=float, default=None)
    p_roll.add_argument("--drift-limit", type=float, default=1e-4,
                        help="abort when constraint drift exceeds this")
    p_roll.add_argument("--sample-every", type=int, default=50)
    p_roll.add_argument("--traj-out", default=None,
                        help="JSON-lines trajectory dump")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    common(p_verify)
    p_verify.add_argument("--suite", required=True,
                          help="converse | forward | lemmas")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        data = load_config_file(args.config)
        run = parse_run_config(data, c_override=args.c, seed_override=args.seed)
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "classify":
            return cmd_classify(run, args)
        if args.command == "roll":
            return cmd_roll(run, args)
        if args.command == "verify":
            return cmd_verify(run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (rl.RollingIntegrationError, ho.LoopError, mf.DomainError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
