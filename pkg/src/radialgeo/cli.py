"""Command-line entry point exposing every checker with JSON/CSV reports.

Subcommands mirror the library modules: ``models`` (growth conditions),
``jacobi`` (comparison ODE solves), ``sc-check`` (convexity-at-infinity
gate), ``certify`` (sublevel-set margin sweep), ``construct`` (exhaustion
trace), ``rotsym`` (distance/volume/monotonicity), ``angular`` (mollified
extension field), ``dirichlet`` (spectral exhaustion).  Exit status is 0
when every requested check passes, 1 on a failed check, 2 on bad usage or
configuration.  Identical configurations reproduce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .angular import AngularField, decay_check, plateau_radius
from .convexity import EpsilonRule, certificate_margin, find_r0, run_construction
from .dirichlet import BoundaryData, exhaust
from .errors import RadialGeoError
from .jacobi import solve_jacobi
from .profiles import (
    ConeSpec,
    DataC,
    catalog_lookup,
    check_c_conditions,
    default_grid,
    profile_from_json,
)
from .reporting import write_csv, write_json
from .sc import ScParams, decide_sc
from .surfaces import (
    GeoPoint,
    RotSymSurface,
    ball_volume,
    cone_mass,
    cone_inequality_check,
    distance,
    geodesic_slice_series,
    monotonicity_check,
    radial_cone_series,
)

USAGE_ERROR = 2
CHECK_FAILED = 1


def _load_config(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"config error: {exc}") from None


def _profile_from(cfg: dict):
    if "profile" in cfg:
        return profile_from_json(json.dumps(cfg["profile"]))
    model = cfg.get("model")
    if model is None:
        raise RadialGeoError("config needs 'model' or 'profile'")
    return catalog_lookup(model, **cfg.get("params", {}))


def _surface_from(cfg: dict) -> RotSymSurface:
    kind = cfg.get("surface", "hyperbolic")
    if kind == "hyperbolic":
        return RotSymSurface.hyperbolic(kappa=float(cfg.get("kappa", 1.0)),
                                        dim=int(cfg.get("dim", 2)))
    if kind == "flat":
        return RotSymSurface.euclidean(dim=int(cfg.get("dim", 2)))
    if kind == "jacobi":
        profile = _profile_from(cfg)
        sol = solve_jacobi(profile.a, float(cfg.get("t_max", 50.0)),
                           rtol=float(cfg.get("rtol", 1e-10)))
        return RotSymSurface.from_jacobi(sol, dim=int(cfg.get("dim", 2)),
                                         label=str(cfg.get("model", "jacobi")))
    raise RadialGeoError(f"unknown surface kind {kind!r}")


def _window(text: str):
    lo, hi = (float(x) for x in text.split(","))
    return lo, hi


def _report_path(args, name: str) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_models(args) -> int:
    cfg = _load_config(args.config)
    profile = _profile_from(cfg) if (args.model is None) else catalog_lookup(
        args.model, **json.loads(args.params))
    lo, hi = _window(args.window)
    data = DataC(profile=profile, t1=args.t1, eps=args.eps,
                 eps_tilde=args.eps_tilde, c1=args.c1)
    grid = default_grid(max(lo, args.t1), hi)
    report = check_c_conditions(data, grid)
    write_json(_report_path(args, "models_report.json"), {
        "check": "growth-conditions",
        "anchor": "curvature-bound-growth-conditions",
        "model": profile.model,
        **report.to_dict(),
    })
    return 0 if report.passed else CHECK_FAILED


def _cmd_jacobi(args) -> int:
    profile = catalog_lookup(args.model, **json.loads(args.params))
    sol = solve_jacobi(profile.a, args.t_max, rtol=args.rtol)
    write_csv(_report_path(args, args.csv), sol.csv_rows())
    write_json(_report_path(args, "jacobi_report.json"), {
        "check": "jacobi-solve",
        "anchor": "comparison-ode-log-riccati",
        "model": args.model,
        "t_max": args.t_max,
        "rtol": args.rtol,
        "log_f_end": sol.log_f_at(sol.t_max),
        "u_end": sol.u_at(sol.t_max),
    })
    return 0


def _cmd_sc_check(args) -> int:
    cfg = _load_config(args.config)
    profile = _profile_from(cfg)
    lo, hi = _window(args.window)
    data = DataC(profile=profile, t1=float(cfg.get("t1", math.e**2)),
                 eps=float(cfg["eps"]), eps_tilde=float(cfg["eps_tilde"]),
                 c1=float(cfg.get("c1", 2.0)))
    params = ScParams(
        eps=data.eps, eps_tilde=data.eps_tilde,
        eps1=float(cfg["eps1"]), alpha=float(cfg["alpha"]),
        lam=float(cfg.get("lambda", 0.75)), t0=float(cfg.get("t0", 1.0)),
        pinch2_eps=float(cfg.get("pinch2_eps", 0.1)),
    )
    verdict = decide_sc(data, params, (lo, hi), rtol=float(cfg.get("rtol", 1e-10)))
    winner = verdict.evidence.get("winner", {})
    sup_slack = None
    for key in ("min_slack_upper", "sup_log_L"):
        if key in winner:
            sup_slack = winner[key]
            break
    write_json(_report_path(args, "sc_report.json"), {
        "check": "sc-gate",
        "anchor": "strict-convexity-pinching-gate",
        "branch": verdict.branch,
        "witness": verdict.witness.to_dict() if verdict.witness else None,
        "sup_slack": sup_slack,
        "caveat": verdict.caveat,
        "window": [lo, hi],
    })
    return 0 if verdict.certified else CHECK_FAILED


def _cmd_certify(args) -> int:
    cfg = _load_config(args.config)
    profile = _profile_from(cfg)
    data = DataC(profile=profile, t1=float(cfg.get("t1", math.e**2)),
                 eps=float(cfg["eps"]), eps_tilde=float(cfg["eps_tilde"]),
                 c1=float(cfg.get("c1", 2.0)))
    params = ScParams(
        eps=data.eps, eps_tilde=data.eps_tilde, eps1=float(cfg["eps1"]),
        alpha=float(cfg["alpha"]), lam=float(cfg.get("lambda", 0.75)),
        t0=float(cfg.get("t0", 1.0)),
    )
    sol = solve_jacobi(profile.a, float(cfg.get("t_max", 1e5)),
                       rtol=float(cfg.get("rtol", 1e-10)))
    lo, hi, n = (float(x) for x in args.log_rho_range.split(","))
    rows = [("log_rho", "dominant", "hessian_h", "bracket", "margin")]
    margins = []
    for log_rho in np.geomspace(lo, hi, int(n)):
        cm = certificate_margin(data, params, sol, R=args.level,
                                log_rho=float(log_rho), c4=args.c4)
        rows.append((repr(float(log_rho)), repr(cm.dominant), repr(cm.hessian_h),
                     repr(cm.bracket), repr(cm.margin)))
        margins.append(cm.margin)
    write_csv(_report_path(args, "certify_margins.csv"), rows)
    ok = all(m > 0 for m in margins)
    write_json(_report_path(args, "certify_report.json"), {
        "check": "certificate-margin",
        "anchor": "sublevel-set-convexity-margin",
        "R": args.level, "c4": args.c4,
        "log_rho_range": [lo, hi],
        "min_margin": min(margins),
        "all_positive": ok,
    })
    return 0 if ok else CHECK_FAILED


def _cmd_construct(args) -> int:
    profile = catalog_lookup(args.model, **json.loads(args.params))
    rule = EpsilonRule(beta=args.beta, variant=args.variant,
                       eps=args.eps_bump, L_bump=args.L_bump)
    sol = solve_jacobi(profile.a, args.t_max, rtol=1e-10)
    if args.r0 is None:
        r0 = find_r0(profile, sol, rule, alpha_budget=args.alpha,
                     c_angle=args.c_angle)
    else:
        r0 = args.r0
    trace = run_construction(profile, sol, rule, r0=r0, alpha_budget=args.alpha,
                             c_angle=args.c_angle)
    write_csv(_report_path(args, "construct_trace.csv"), trace.csv_rows())
    write_json(_report_path(args, "construct_report.json"), {
        "check": "exhaustion-trace",
        "anchor": "angle-budget-convex-exhaustion",
        **trace.to_dict(),
    })
    return 0 if trace.converged else CHECK_FAILED


def _cmd_rotsym(args) -> int:
    cfg = _load_config(args.config)
    surface = _surface_from({**cfg, "surface": args.surface, "dim": args.dim})
    if args.op == "distance":
        r1, t1, r2, t2 = (float(x) for x in args.points.split(","))
        d = distance(surface, GeoPoint.of(r1, t1), GeoPoint.of(r2, t2))
        write_json(_report_path(args, "rotsym_report.json"), {
            "check": "distance", "anchor": "warped-product-geodesics",
            "surface": args.surface, "points": [r1, t1, r2, t2], "distance": d,
        })
        return 0
    if args.op == "volume":
        vol = ball_volume(surface, args.k, args.t)
        write_json(_report_path(args, "rotsym_report.json"), {
            "check": "ball-volume", "anchor": "warped-ball-volume",
            "surface": args.surface, "k": args.k, "t": args.t, "volume": vol,
        })
        return 0
    if args.op == "mono":
        grid = np.linspace(args.t_lo, args.t, 64)
        if args.series == "radial-cone":
            series = radial_cone_series(surface, args.gamma_measure, args.k, grid)
        elif args.series == "slice":
            series = geodesic_slice_series(grid, offset=args.offset)
        else:
            raise RadialGeoError(f"unknown series {args.series!r}")
        rep = monotonicity_check(series)
        write_csv(_report_path(args, "rotsym_series.csv"),
                  [("t", "mass", "ball_vol", "ratio")]
                  + [(repr(float(t)), repr(float(m)), repr(float(b)), repr(float(q)))
                     for t, m, b, q in zip(series.t_grid, series.mass,
                                           series.ball_vol, series.ratio)])
        write_json(_report_path(args, "rotsym_report.json"), {
            "check": "mass-ratio-monotonicity",
            "anchor": "pole-centered-mass-ratio-monotonicity",
            "series": args.series, **rep.to_dict(),
        })
        return 0 if rep.passed else CHECK_FAILED
    raise RadialGeoError(f"unknown rotsym op {args.op!r}")


def _cmd_angular(args) -> int:
    cfg = _load_config(args.config)
    surface = _surface_from(cfg)
    profile = _profile_from(cfg) if ("model" in cfg or "profile" in cfg) \
        else catalog_lookup("constant", k=1.0)
    cone = ConeSpec(L=args.L)
    fld = AngularField(surface=surface, cone=cone, b=profile.b,
                       quad_tol=args.quad_tol)
    sol = solve_jacobi(profile.a, float(cfg.get("t_max", 40.0)), rtol=1e-10)
    r1 = plateau_radius(surface, cone, profile.b)
    rep = decay_check(fld, sol, lam=args.lam, t0=args.t0,
                      r_start=r1, span=args.span, n_radii=args.rays)
    rows = [("r", "theta", "h", "grad_bound_ratio", "hess_bound_ratio")]
    for i, rho in enumerate(rep.rhos):
        pt = GeoPoint.of(float(rho), cone.v0_angle + 0.6 / cone.L)
        rows.append((repr(float(rho)), repr(pt.theta), repr(fld.value(pt)),
                     repr(float(rep.c4_grad[i])), repr(float(rep.c4_hess[i]))))
    write_csv(_report_path(args, args.field_csv), rows)
    write_json(_report_path(args, "angular_report.json"), {
        "check": "angular-extension-decay",
        "anchor": "mollified-angular-extension-decay",
        "L": args.L, "plateau_radius": r1, **rep.to_dict(),
    })
    return 0 if rep.passed else CHECK_FAILED


def _cmd_dirichlet(args) -> int:
    cfg = _load_config(args.config)
    surface = _surface_from(cfg)
    data_spec = json.loads(Path(args.data).read_text(encoding="utf-8")) \
        if args.data else cfg.get("data", {"modes": [[1, 1.0, 0.0]]})
    data = BoundaryData.of(*[tuple(m) for m in data_spec["modes"]])
    radii = [float(x) for x in args.radii.split(",")]
    sol = exhaust(surface, data, radii, rtol=args.rtol)
    gap = sol.max_principle_gap()
    rows = [("r", "theta", "u")]
    R = radii[-1]
    for r in np.linspace(0.0, R, 33):
        for th in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
            rows.append((repr(float(r)), repr(float(th)),
                         repr(sol.u_at(float(r), float(th)))))
    write_csv(_report_path(args, "dirichlet_field.csv"), rows)
    write_json(_report_path(args, "dirichlet_report.json"), {
        "check": "dirichlet-exhaustion",
        "anchor": "asymptotic-dirichlet-exhaustion",
        "sup_norm_check": gap,
        **sol.to_dict(),
    })
    return 0 if gap <= 1e-8 else CHECK_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="radialgeo",
        description="numerical checks for convexity at infinity under radial "
                    "curvature bounds",
    )
    p.add_argument("--version", action="version", version=f"radialgeo {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=".", help="output directory for reports")
        sp.add_argument("--config", default=None, help="JSON configuration file")

    sp = sub.add_parser("models", help="check the growth conditions on a grid")
    common(sp)
    sp.add_argument("--model", default=None)
    sp.add_argument("--params", default="{}")
    sp.add_argument("--t1", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--eps-tilde", dest="eps_tilde", type=float, required=True)
    sp.add_argument("--c1", type=float, default=1.0)
    sp.add_argument("--window", required=True, help="lo,hi")
    sp.set_defaults(fn=_cmd_models)

    sp = sub.add_parser("jacobi", help="solve the comparison ODE, emit CSV")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--params", default="{}")
    sp.add_argument("--t-max", dest="t_max", type=float, default=20.0)
    sp.add_argument("--rtol", type=float, default=1e-10)
    sp.add_argument("--csv", default="jacobi_solution.csv")
    sp.set_defaults(fn=_cmd_jacobi)

    sp = sub.add_parser("sc-check", help="decide the strict-convexity branches")
    common(sp)
    sp.add_argument("--window", required=True, help="lo,hi")
    sp.set_defaults(fn=_cmd_sc_check)

    sp = sub.add_parser("certify", help="sweep the sublevel-set margin")
    common(sp)
    sp.add_argument("--level", type=float, required=True, help="certificate level R")
    sp.add_argument("--c4", type=float, default=1.0)
    sp.add_argument("--log-rho-range", dest="log_rho_range", required=True,
                    help="lo,hi,n (log rho sweep, geometric)")
    sp.set_defaults(fn=_cmd_certify)

    sp = sub.add_parser("construct", help="run the convex exhaustion trace")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--params", default="{}")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--variant", choices=("unit-bump", "eps-bump", "harmonic-step"),
                    default="unit-bump")
    sp.add_argument("--eps-bump", dest="eps_bump", type=float, default=None)
    sp.add_argument("--L-bump", dest="L_bump", type=float, default=4.0)
    sp.add_argument("--c-angle", dest="c_angle", type=float, default=1.0)
    sp.add_argument("--r0", type=float, default=None,
                    help="start radius (omit to search for the least working one)")
    sp.add_argument("--t-max", dest="t_max", type=float, default=60.0)
    sp.set_defaults(fn=_cmd_construct)

    sp = sub.add_parser("rotsym", help="distance/volume/monotonicity on a surface")
    common(sp)
    sp.add_argument("--op", choices=("distance", "volume", "mono"), required=True)
    sp.add_argument("--surface", default="hyperbolic",
                    choices=("hyperbolic", "flat", "jacobi"))
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--points", default="1,0,1,1.5707963267948966",
                    help="r1,theta1,r2,theta2 for --op distance")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--t-lo", dest="t_lo", type=float, default=0.5)
    sp.add_argument("--gamma-measure", dest="gamma_measure", type=float,
                    default=2.0 * math.pi)
    sp.add_argument("--series", choices=("radial-cone", "slice"), default="radial-cone")
    sp.add_argument("--offset", type=float, default=0.0)
    sp.set_defaults(fn=_cmd_rotsym)

    sp = sub.add_parser("angular", help="mollified angular extension decay")
    common(sp)
    sp.add_argument("--L", type=float, default=3.0)
    sp.add_argument("--quad-tol", dest="quad_tol", type=float, default=1e-4)
    sp.add_argument("--lam", type=float, default=0.75)
    sp.add_argument("--t0", type=float, default=1.0)
    sp.add_argument("--rays", type=int, default=5, help="number of sample radii")
    sp.add_argument("--span", type=float, default=4.0)
    sp.add_argument("--field-csv", dest="field_csv", default="angular_field.csv")
    sp.set_defaults(fn=_cmd_angular)

    sp = sub.add_parser("dirichlet", help="spectral exhaustion for boundary data")
    common(sp)
    sp.add_argument("--data", default=None, help="JSON file with {\"modes\": [[n,a,b],...]}")
    sp.add_argument("--radii", required=True, help="comma-separated exhaustion radii")
    sp.add_argument("--rtol", type=float, default=1e-10)
    sp.set_defaults(fn=_cmd_dirichlet)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize --version/-h to 0
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except SystemExit as exc:  # config loader
        print(exc, file=sys.stderr)
        return USAGE_ERROR
    except RadialGeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (KeyError, ValueError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
