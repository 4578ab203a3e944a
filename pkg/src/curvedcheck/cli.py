"""Command-line front end.

Exit status: 0 pass or informational, 1 verdict failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

import numpy as np

from . import __version__
from . import registry as reg
from .chart import ChartError, MetricChart, curvature_bundle
from .classify import (DEFAULT_TOL, classify_point, degenerate_vanishing_test, fit_c_pi1,
                       orthonormal_quadruple_test)
from .conformal import (Diffeo, conformal_change, conformal_chart, degenerate_condition_check,
                        gradient_class, pullback_classify, verify_relation_3_1)
from .dsl import DSLError, parse_expression
from .planes import (PlaneError, classify_plane, limit_ratio_estimate,
                     sample_degenerate_planes)
from .tensor_core import evaluate4

SCHEMA = "report_v1"
VERBS = ("list", "curvature", "classify", "planes", "conformal", "limit", "lemma", "theorem")

# defaults for keys that may also come from a --config file
DEFAULTS: dict[str, Any] = {
    "format": "text",
    "seed": 0,
    "samples": 100,
    "points": 3,
    "tol": None,
    "sigma": "0",
    "kind": "weak",
    "scale": 2.0,
    "fd": False,
}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvedcheck", description="Curvature laboratory for pseudo-Riemannian metrics.")
    p.add_argument("--version", action="version", version=f"curvedcheck {__version__}")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("target", nargs="?", help="lemma A|B|C or theorem 1|2|3")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--manifold", help="registry name (see `curvedcheck list`)")
    src.add_argument("--inline", help="metric DSL text, e.g. 'dim=3; g[0][0]=-1; g[1][1]=1; g[2][2]=1'")
    p.add_argument("--domain", help="inline chart box 'lo:hi,lo:hi,...' (default -0.5:0.5 per axis)")
    for name, typ in (("c", float), ("s", int), ("n", int)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--f", help="example2 profile in t, e.g. 't^2'")
    p.add_argument("--h", help="ppwave profile in u, e.g. 'exp(u)'")
    p.add_argument("--at", action="append", default=[], help="comma-separated point; repeatable")
    p.add_argument("--points", type=int, help="number of sampled points when --at is absent")
    p.add_argument("--sigma", help="conformal factor exponent (DSL expression over x0.., or u for ppwave)")
    p.add_argument("--kind", choices=("weak", "strong"))
    p.add_argument("--samples", type=int, help="planes / frames sampled per check")
    p.add_argument("--scale", type=float, help="limit: target metric is scale * g")
    p.add_argument("--tol", type=float, help="override the relative tolerance of every verdict")
    p.add_argument("--fd", action="store_true", default=None, help="finite-difference derivatives")
    p.add_argument("--format", choices=("text", "json"))
    p.add_argument("--seed", type=int, help="RNG seed (default $CURVEDCHECK_SEED or 0)")
    p.add_argument("--config", help="key=value file; flags override it")
    return p


def read_config(path: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v
    return out


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """flags > config file > environment (seed only) > defaults."""
    cfg = read_config(args.config) if args.config else {}
    opts: dict[str, Any] = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None and key in cfg:
            val = cfg[key]
        if val is None and key == "seed" and os.environ.get("CURVEDCHECK_SEED"):
            val = os.environ["CURVEDCHECK_SEED"]
        if val is None:
            val = default
        opts[key] = val
    try:
        opts["seed"] = int(opts["seed"])
        opts["samples"] = int(opts["samples"])
        opts["points"] = int(opts["points"])
        opts["scale"] = float(opts["scale"])
        opts["tol"] = None if opts["tol"] in (None, "") else float(opts["tol"])
        if isinstance(opts["fd"], str):
            opts["fd"] = opts["fd"].lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise UsageError(f"bad option value: {exc}") from None
    if opts["format"] not in ("text", "json"):
        raise UsageError("format must be text or json")
    return opts


def load_chart(args, opts) -> MetricChart:
    if args.manifold:
        params = {k: getattr(args, k) for k in ("c", "s", "n", "f", "h")}
        chart = reg.instantiate(args.manifold, **params)
    elif args.inline:
        domain = None
        if args.domain:
            try:
                domain = [tuple(float(v) for v in part.split(":")) for part in args.domain.split(",")]
            except ValueError:
                raise UsageError("--domain must look like lo:hi,lo:hi,...") from None
        chart = MetricChart.from_dsl(args.inline.replace("\\n", "\n"), domain)
    else:
        raise UsageError("one metric source is required: --manifold or --inline")
    if opts["fd"]:
        chart = chart.with_finite_differences()
    return chart


def points_for(chart, args, opts) -> list[np.ndarray]:
    if args.at:
        pts = []
        for text in args.at:
            try:
                pts.append(np.array([float(v) for v in text.split(",")]))
            except ValueError:
                raise UsageError(f"bad point {text!r}") from None
        for pt in pts:
            chart.check_point(pt)
    else:
        pts = list(chart.sample_points(opts["points"], opts["seed"]))
    return sorted(pts, key=lambda v: tuple(v))


def sigma_expr(chart, opts):
    names = {"u": 0} if chart.name.startswith("ppwave") else None
    return parse_expression(str(opts["sigma"]), chart.dim, names=names)


def _tol(chart, opts) -> float:
    return opts["tol"] if opts["tol"] is not None else DEFAULT_TOL[chart.derivative_path]


# -- verbs ------------------------------------------------------------------

def cmd_list(args, opts):
    return {"manifolds": reg.manifest()}, None


def cmd_curvature(args, opts):
    chart = load_chart(args, opts)
    rows = []
    for p in points_for(chart, args, opts):
        b = curvature_bundle(chart, p)
        row = {
            "point": p, "signature": chart.signature, "scalar": b.scalar,
            "max_riemann": np.abs(b.riemann).max(), "ricci": b.ricci,
            "traceless_ricci_max": np.abs(b.traceless_ricci).max(),
        }
        if b.weyl is not None:
            row["max_weyl"] = np.abs(b.weyl).max()
        else:
            row["max_cotton"] = np.abs(b.cotton).max()
        rows.append(row)
    return {"chart": _chart_info(chart), "results": rows}, None


def cmd_classify(args, opts):
    chart = load_chart(args, opts)
    tol = _tol(chart, opts)
    tols = {k: tol for k in ("constant", "quasi", "weyl", "recurrence")}
    rows = []
    for p in points_for(chart, args, opts):
        row = classify_point(chart, p, tols).to_dict()
        if chart.name.startswith("example2") and row["H"] is not None:
            row["printed_formula"] = _printed_comparison(chart, p, row)
        rows.append(row)
    return {"chart": _chart_info(chart), "results": rows}, None


def _printed_comparison(chart, p, row) -> dict:
    """Fitted (H, N) next to the printed closed forms; the fit is authoritative."""
    h, n = reg.example2_reference_HN_at(chart.params["f"], p, chart.params["s"])
    dev = max(abs(row["H"] - h), abs(row["N"] - n))
    return {"H": h, "N": n, "max_deviation": dev, "discrepancy": bool(dev > 1e-6)}


def cmd_planes(args, opts):
    chart = load_chart(args, opts)
    rows = []
    for p in points_for(chart, args, opts):
        b = curvature_bundle(chart, p)
        planes = sample_degenerate_planes(b.metric, opts["kind"], min(opts["samples"], 20), opts["seed"], point=p)
        entries = []
        for pl in planes:
            cls = classify_plane(b.metric, pl)
            entries.append({"x": pl.x, "y": pl.y, "class": cls.kind.value,
                            "R(x,y,y,x)": evaluate4(b.riemann, pl.x, pl.y, pl.y, pl.x)})
        rows.append({"point": p, "planes": entries})
    return {"chart": _chart_info(chart), "kind": opts["kind"], "results": rows}, None


def cmd_conformal(args, opts):
    chart = load_chart(args, opts)
    sigma = sigma_expr(chart, opts)
    pts = points_for(chart, args, opts)
    change = conformal_change(chart, sigma, points=pts)
    mc = pullback_classify(Diffeo.identity(chart.dim), chart, change.target, points=pts,
                           seed=opts["seed"])
    tol = 1e-7 if chart.derivative_path == "symbolic" else 1e-3
    out = {
        "chart": _chart_info(chart), "sigma": str(opts["sigma"]),
        "conformal_law_residual": change.verify,
        "gradient_class": gradient_class(chart, sigma, pts),
        "map": _map_info(mc),
    }
    return out, change.verify < tol * max(1.0, _rmax(chart, pts))


def cmd_limit(args, opts):
    chart = load_chart(args, opts)
    lam = opts["scale"]
    if chart.grid is not None:
        from . import expr as ex
        target = MetricChart.from_expressions([[ex.mul(ex.const(lam), e) for e in row] for row in chart.grid],
                                              chart.domain, f"{lam}*{chart.name}")
    else:
        target = MetricChart.from_function(lambda q: lam * chart.metric(q), chart.dim, chart.domain)
    rows = []
    ok = True
    for p in points_for(chart, args, opts):
        b = curvature_bundle(chart, p)
        planes = sample_degenerate_planes(b.metric, opts["kind"], 20, opts["seed"], point=p)
        # need R != 0 on plane0 for the ratio to have a limit
        pl = max(planes, key=lambda q: abs(evaluate4(b.riemann, q.x, q.y, q.y, q.x)) / q.basis_norm ** 2)
        est = limit_ratio_estimate(chart, target, Diffeo.identity(chart.dim), pl, seed=opts["seed"])
        expected = 1.0 / lam
        rows.append({"point": p, "plane": {"x": pl.x, "y": pl.y}, "estimate": est.value,
                     "error_indicator": est.error, "expected": expected, "converged": est.converged})
        ok &= abs(est.value - expected) < 1e-5
    return {"chart": _chart_info(chart), "scale": lam, "results": rows}, ok


def cmd_lemma(args, opts):
    which = (args.target or "").upper()
    if which not in ("A", "B", "C"):
        raise UsageError("lemma needs A, B or C")
    chart = load_chart(args, opts)
    tol = _tol(chart, opts)
    rows = []
    ok = True
    for p in points_for(chart, args, opts):
        b = curvature_bundle(chart, p)
        R, g = b.riemann, b.metric
        scale = max(float(np.abs(R).max()), 1e-300)
        if which == "A":
            vt = degenerate_vanishing_test(R, g, "weak", opts["samples"], tol * 1e-2, opts["seed"])
            c, res = fit_c_pi1(R, g)
            hyp, concl = vt.passed, res <= tol * scale
            row = {"hypothesis_weak_vanishing": hyp, "worst": vt.worst, "c": c, "residual": res,
                   "conclusion_T_eq_c_pi1": concl}
        else:
            weyl_max = float(np.abs(b.weyl).max()) if b.weyl is not None else None
            if weyl_max is None:
                raise UsageError(f"lemma {which} needs dim >= 4")
            if which == "B":
                t = orthonormal_quadruple_test(R, g, max(10, opts["samples"] // 5), tol * 1e-1, opts["seed"])
            else:
                t = degenerate_vanishing_test(R, g, "strong", opts["samples"], tol * 1e-2, opts["seed"])
            hyp, concl = t.passed, weyl_max <= tol * scale
            row = {"hypothesis": hyp, "worst": t.worst, "max_weyl": weyl_max, "conclusion_weyl_zero": concl}
        row["point"] = p
        row["consistent"] = (not hyp) or concl
        ok &= row["consistent"]
        rows.append(row)
    return {"chart": _chart_info(chart), "lemma": which, "results": rows}, ok


def cmd_theorem(args, opts):
    which = args.target or ""
    if which not in ("1", "2", "3"):
        raise UsageError("theorem needs 1, 2 or 3")
    chart = load_chart(args, opts)
    sigma = sigma_expr(chart, opts)
    pts = points_for(chart, args, opts)
    seed, samples = opts["seed"], opts["samples"]
    tol = opts["tol"] if opts["tol"] is not None else (1e-7 if chart.derivative_path == "symbolic" else 1e-3)
    out: dict[str, Any] = {"chart": _chart_info(chart), "theorem": which, "sigma": str(opts["sigma"])}
    if which == "3":
        chk = degenerate_condition_check(chart, sigma, "strong", samples, tol, seed, points=pts)
        out["strong_condition"] = _check_info(chk)
        out["isometry"] = bool(not sigma_has_variation(chart, sigma, pts) and abs(_sigma_at(chart, sigma, pts[0])) < tol)
        return out, chk.passed
    bar = conformal_chart(chart, sigma)
    chk = degenerate_condition_check(chart, sigma, "weak", samples, tol, seed, points=pts, bar=bar)
    mc = pullback_classify(Diffeo.identity(chart.dim), chart, bar, points=pts, seed=seed)
    out["weak_condition"] = _check_info(chk)
    out["map"] = _map_info(mc)
    if which == "1":
        return out, chk.passed and mc.kind.value != "General"
    grad = gradient_class(chart, sigma, pts)
    case = {"zero": "a", "isotropic": "b", "nonnull": "c"}.get(grad, "mixed")
    rel = verify_relation_3_1(chart, sigma, samples=len(pts), tol=1e-6, seed=seed)
    out.update({"gradient_class": grad, "case": case,
                "relation_3_1": {"status": rel.status, "residual": rel.residual}})
    dtol = DEFAULT_TOL[chart.derivative_path]
    reports = [classify_point(chart, p) for p in pts]
    if case == "b":
        out["conformally_flat"] = all(r.verdicts["conformally_flat"] for r in reports)
        out["kn_star"] = all(r.verdicts["recurrent"] or r.verdicts["symmetric_kn_star"] for r in reports)
    elif case == "c":
        out["quasi_constant"] = all(r.verdicts["quasi_constant"] for r in reports)
    out["derivative_tolerance"] = dtol
    return out, chk.passed and rel.status == "ok" and bool(rel.passed)


def sigma_has_variation(chart, sigma, pts) -> bool:
    from .expr import free_vars
    return bool(free_vars(sigma))


def _sigma_at(chart, sigma, p) -> float:
    from .expr import evaluate
    return evaluate(sigma, p)


def _rmax(chart, pts) -> float:
    return max(float(np.abs(curvature_bundle(chart, p).riemann).max()) for p in pts)


def _chart_info(chart) -> dict:
    return {"name": chart.name, "dim": chart.dim, "signature": list(chart.signature),
            "derivative_path": chart.derivative_path}


def _check_info(chk) -> dict:
    return {"kind": chk.kind, "residual": chk.residual, "passed": chk.passed, "tol": chk.tol,
            "samples": chk.samples}


def _map_info(mc) -> dict:
    return {"kind": mc.kind.value, "sign": mc.sign, "lambda": mc.lam, "gradient_class": mc.gradient_class,
            "proportionality_residual": mc.proportionality_residual, "cone_preserved": mc.cone_preserved,
            "cone_residual": mc.cone_residual}


COMMANDS = {
    "list": cmd_list, "curvature": cmd_curvature, "classify": cmd_classify, "planes": cmd_planes,
    "conformal": cmd_conformal, "limit": cmd_limit, "lemma": cmd_lemma, "theorem": cmd_theorem,
}


# -- output -------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if f != f or f in (float("inf"), float("-inf")):
            return str(f)
        return f
    return obj


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    """Parse, dispatch, and return (exit code, report)."""
    code, report, _ = _run(argv)
    return code, report


def _run(argv):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), {}, "text"
    fmt = args.format or "text"
    try:
        opts = resolve(args)
        fmt = opts["format"]
        body, verdict = COMMANDS[args.verb](args, opts)
    except (UsageError, DSLError, reg.RegistryError, ChartError, PlaneError, OSError) as exc:
        return 2, {"schema": SCHEMA, "error": str(exc), "exit_code": 2}, fmt
    code = 0 if verdict in (None, True) else 1
    status = "info" if verdict is None else ("pass" if verdict else "fail")
    command = {"verb": args.verb, "target": args.target, "manifold": args.manifold, "inline": args.inline,
               "params": {k: getattr(args, k) for k in ("c", "s", "n", "f", "h") if getattr(args, k) is not None},
               "at": args.at, "options": {k: v for k, v in opts.items() if k != "format"}}
    report = {"schema": SCHEMA, "version": __version__, "command": command, "verdict": status,
              "exit_code": code, **body}
    return code, _plain(report), fmt


def render_text(report: dict) -> str:
    if "error" in report:
        return f"error: {report['error']}"
    lines = [f"curvedcheck {report['command']['verb']}"
             + (f" {report['command']['target']}" if report['command']['target'] else "")
             + f": {report['verdict'].upper()}"]
    for key, val in report.items():
        if key in ("schema", "version", "command", "verdict", "exit_code"):
            continue
        if isinstance(val, list):
            lines.append(f"{key}:")
            for item in val:
                lines.append("  " + json.dumps(item, sort_keys=True))
        else:
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    code, report, fmt = _run(argv)
    if not report:
        return code
    if fmt == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(render_text(report), file=sys.stderr if code == 2 else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
