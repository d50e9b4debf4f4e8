"""Command line entry point: optimize scenarios, validate them, and print
problem-size / constraint-violation reports for finished runs.

Exit codes of ``optimize``: 0 converged, 2 not converged, 3 infeasible, and
1 for I/O or scenario errors.  Set ``MOMPLAN_LOG`` to a logging level name
for diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .dynamics import violation_metrics
from .relax import RefinementSettings, refine
from .runio import load_run, write_run
from .scenario import ScenarioConfig, ScenarioError, load_scenario_file

log = logging.getLogger("momplan")

TIME_MODE_FLAGS = {"fixed": "fixed_time", "free": "time_opt_free_horizon",
                   "fixed-horizon": "time_opt_fixed_horizon"}
RELAXATION_FLAGS = {"trust": "trust_region", "soft": "soft_constraint"}

SIZE_ROWS = [("Horizon [sec]", "horizon"), ("Timesteps", "timesteps"),
             ("Variables", "variables"), ("Lin. equalities", "lin_eq"),
             ("Lin. inequalities", "lin_ineq"), ("SO cones", "soc_count"),
             ("Size KKT", "kkt_size"), ("Nnz KKT", "kkt_nnz"),
             ("time [sec]", "solve_time")]


def _override_config(cfg: ScenarioConfig, args) -> ScenarioConfig:
    time_mode = TIME_MODE_FLAGS.get(args.time_mode, cfg.time_mode) \
        if args.time_mode else cfg.time_mode
    relaxation = RELAXATION_FLAGS.get(args.relaxation, cfg.relaxation_mode) \
        if args.relaxation else cfg.relaxation_mode
    if time_mode == cfg.time_mode and relaxation == cfg.relaxation_mode:
        return cfg
    return ScenarioConfig(
        mass=cfg.mass, friction_mu=cfg.friction_mu, cop_bounds=cfg.cop_bounds,
        torque_bounds=cfg.torque_bounds, dt_bounds=cfg.dt_bounds,
        eef_limits=cfg.eef_limits, n_timesteps=cfg.n_timesteps,
        nominal_dt=cfg.nominal_dt, gravity=cfg.gravity, time_mode=time_mode,
        relaxation_mode=relaxation, cost_weights=cfg.cost_weights)


def cmd_optimize(args) -> int:
    try:
        cfg, plan, state = load_scenario_file(args.scenario)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 1
    cfg = _override_config(cfg, args)
    overrides = {}
    if args.sigma0 is not None:
        overrides["sigma0"] = args.sigma0
    if args.w0 is not None:
        overrides["w0"] = args.w0
    if args.max_outer is not None:
        overrides["max_outer"] = args.max_outer
    if args.tol is not None:
        overrides["solver_tol"] = args.tol
    if args.backend is not None:
        overrides["backend"] = args.backend
    for name, flag in (("conv_com", args.conv_com),
                       ("conv_lin", args.conv_lin),
                       ("conv_ang", args.conv_ang)):
        if flag is not None:
            overrides[name] = flag
    settings = RefinementSettings.from_config(cfg, **overrides)

    log.info("optimizing %s (%s, %s)", args.scenario, cfg.time_mode,
             cfg.relaxation_mode)
    result = refine(cfg, plan, state, settings=settings)
    sr = result.report

    report = {
        "version": __version__,
        "scenario": str(args.scenario),
        "scenario_name": Path(args.scenario).stem,
        "seed": args.seed,
        "mass": cfg.mass,
        "time_mode": cfg.time_mode,
        "relaxation_mode": cfg.relaxation_mode,
        "status": sr.status,
        "outer_iterations": sr.outer_iterations,
        "total_solve_time": sr.total_solve_time,
        "horizon": cfg.horizon,
        "timesteps": cfg.n_timesteps,
        "kkt": sr.kkt,
        "settings": {
            "sigma0": settings.sigma0, "sigma_shrink": settings.sigma_shrink,
            "w0": settings.w0, "w_growth": settings.w_growth,
            "max_outer": settings.max_outer,
            "conv_thresholds": {"com": settings.conv_com,
                                "lin": settings.conv_lin,
                                "ang": settings.conv_ang},
            "backend": settings.backend, "solver_tol": settings.solver_tol,
        },
        "violation": result.violation.as_dict() if result.violation else None,
    }

    if result.trajectory is None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"{report['scenario_name']}: {sr.status}")
        return 3 if sr.status == "infeasible" else 2

    paths = write_run(args.out, result.trajectory, result.controls, report,
                      sr.records)
    v = result.violation
    print(f"{report['scenario_name']}: {sr.status} after "
          f"{sr.outer_iterations} refinements in {sr.total_solve_time:.2f}s")
    print(f"  violation avg: com={v.com_err:.3e} lin={v.lin_err:.3e} "
          f"ang={v.ang_err:.3e}")
    print(f"  outputs in {Path(args.out)}")
    if sr.status == "converged":
        return 0
    return 3 if sr.status == "infeasible" else 2


def cmd_validate(args) -> int:
    try:
        load_scenario_file(args.scenario)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 1
    print(f"{args.scenario}: ok")
    return 0


def _fmt_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def cmd_report(args) -> int:
    runs = []
    for run_dir in args.run_dirs:
        try:
            data = load_run(run_dir)
        except (OSError, FileNotFoundError) as exc:
            print(f"error: {run_dir}: {exc}", file=sys.stderr)
            return 1
        runs.append(data["report"])

    names = [r.get("scenario_name", "?") + "/" +
             {"fixed_time": "fixed", "time_opt_free_horizon": "time",
              "time_opt_fixed_horizon": "time-fh"}.get(r.get("time_mode"), "?")
             for r in runs]
    width = max(18, *(len(n) + 2 for n in names))
    print("problem size and solve time")
    print(f"{'':22s}" + "".join(f"{n:>{width}s}" for n in names))
    for label, key in SIZE_ROWS:
        cells = []
        for r in runs:
            if key in ("horizon", "timesteps"):
                cells.append(r.get(key))
            elif key == "solve_time":
                cells.append(r.get("total_solve_time"))
            else:
                cells.append(r.get("kkt", {}).get(key))
        print(f"{label:22s}"
              + "".join(f"{_fmt_cell(c):>{width}s}" for c in cells))
    print()
    print("constraint violation (average / max over steps)")
    rows = [("Center of Mass", "com"), ("Linear Momentum", "lin"),
            ("Angular Momentum", "ang")]
    print(f"{'':22s}" + "".join(f"{n:>{width}s}" for n in names))
    for label, key in rows:
        cells = []
        for r in runs:
            v = r.get("violation")
            cells.append(f"{v[key + '_err']:.3e}/{v[key + '_max']:.3e}"
                         if v else "-")
        print(f"{label:22s}" + "".join(f"{c:>{width}s}" for c in cells))
    return 0


def cmd_audit(args) -> int:
    """Re-audit an exported run against exact integration (CSV round trip)."""
    try:
        data = load_run(args.run_dir)
        cfg, plan, state = load_scenario_file(data["report"]["scenario"])
    except (OSError, KeyError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cfg = _override_config_from_report(cfg, data["report"])
    rep = violation_metrics(data["trajectory"], data["controls"], plan, cfg,
                            state)
    print(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
    return 0


def _override_config_from_report(cfg: ScenarioConfig, report: dict) -> ScenarioConfig:
    if report.get("time_mode", cfg.time_mode) == cfg.time_mode and \
            report.get("relaxation_mode", cfg.relaxation_mode) == cfg.relaxation_mode:
        return cfg
    return ScenarioConfig(
        mass=cfg.mass, friction_mu=cfg.friction_mu, cop_bounds=cfg.cop_bounds,
        torque_bounds=cfg.torque_bounds, dt_bounds=cfg.dt_bounds,
        eef_limits=cfg.eef_limits, n_timesteps=cfg.n_timesteps,
        nominal_dt=cfg.nominal_dt, gravity=cfg.gravity,
        time_mode=report.get("time_mode", cfg.time_mode),
        relaxation_mode=report.get("relaxation_mode", cfg.relaxation_mode),
        cost_weights=cfg.cost_weights)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momplan",
        description="Momentum trajectory optimization for multi-contact "
                    "legged robots")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="solve a scenario and export a run")
    opt.add_argument("scenario", help="scenario file (.scn)")
    opt.add_argument("--out", required=True, help="output run directory")
    opt.add_argument("--time-mode", choices=sorted(TIME_MODE_FLAGS),
                     help="override the scenario's time mode")
    opt.add_argument("--relaxation", choices=sorted(RELAXATION_FLAGS),
                     help="override the relaxation mode")
    opt.add_argument("--sigma0", type=float, help="initial trust width")
    opt.add_argument("--w0", type=float, help="initial penalty weight")
    opt.add_argument("--max-outer", type=int, help="refinement iteration cap")
    opt.add_argument("--tol", type=float, help="cone solver tolerance")
    opt.add_argument("--conv-com", type=float, help="CoM convergence threshold [m]")
    opt.add_argument("--conv-lin", type=float,
                     help="linear momentum convergence threshold [kg m/s]")
    opt.add_argument("--conv-ang", type=float,
                     help="angular momentum convergence threshold [kg m^2/s]")
    opt.add_argument("--backend", choices=("ipm", "splitting"),
                     help="cone solver backend")
    opt.add_argument("--seed", type=int, default=0,
                     help="recorded in the report; the pipeline itself is "
                          "deterministic")
    opt.set_defaults(func=cmd_optimize)

    val = sub.add_parser("validate", help="parse and check a scenario file")
    val.add_argument("scenario")
    val.set_defaults(func=cmd_validate)

    rep = sub.add_parser("report", help="print size/violation tables for runs")
    rep.add_argument("run_dirs", nargs="+", help="run directories")
    rep.set_defaults(func=cmd_report)

    aud = sub.add_parser("audit", help="re-audit an exported run from its CSVs")
    aud.add_argument("run_dir")
    aud.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("MOMPLAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
