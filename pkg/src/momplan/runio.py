"""Run-directory artifacts: CSV trajectories/controls/activations + report.

One optimization run produces a directory with ``trajectory.csv``,
``controls.csv``, ``activations.csv``, ``report.json`` and a per-iteration
``refine_log.jsonl``.  Floats are written with ``repr`` so a file round-trip
reproduces the exact binary values; the audit of a re-read run is therefore
identical to the in-memory one.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import CentroidalTrajectory, ControlStep, EefWrench

TRAJECTORY_COLUMNS = ["step", "dt", "r_x", "r_y", "r_z", "l_x", "l_y", "l_z",
                      "k_x", "k_y", "k_z", "ldot_x", "ldot_y", "ldot_z",
                      "kdot_x", "kdot_y", "kdot_z"]
CONTROL_COLUMNS = ["step", "eef", "f_x", "f_y", "f_z", "tau", "z_x", "z_y"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path, traj: CentroidalTrajectory) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(TRAJECTORY_COLUMNS)
        for t in range(traj.n_steps):
            row = [str(t), _fmt(traj.dts[t])]
            for arr in (traj.r, traj.l, traj.k, traj.ldot, traj.kdot):
                row.extend(_fmt(v) for v in arr[t])
            out.writerow(row)


def write_controls_csv(path, controls: list[ControlStep]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(CONTROL_COLUMNS)
        for t, step in enumerate(controls):
            for eef, w in step.wrenches.items():
                out.writerow([str(t), eef, _fmt(w.f[0]), _fmt(w.f[1]),
                              _fmt(w.f[2]), _fmt(w.tau), _fmt(w.z[0]),
                              _fmt(w.z[1])])


def write_activations_csv(path, controls: list[ControlStep]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["step", "eef"])
        for t, step in enumerate(controls):
            for eef in step.wrenches:
                out.writerow([str(t), eef])


def load_trajectory_csv(path) -> CentroidalTrajectory:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = len(rows)
    arrs = {name: np.empty((n, 3)) for name in ("r", "l", "k", "ldot", "kdot")}
    dts = np.empty(n)
    for row in rows:
        t = int(row["step"])
        dts[t] = float(row["dt"])
        for name in arrs:
            arrs[name][t] = [float(row[f"{name}_x"]), float(row[f"{name}_y"]),
                             float(row[f"{name}_z"])]
    return CentroidalTrajectory(dts=dts, **arrs)


def load_controls_csv(path, dts: np.ndarray) -> list[ControlStep]:
    per_step: dict[int, dict[str, EefWrench]] = {t: {} for t in range(len(dts))}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = int(row["step"])
            per_step[t][row["eef"]] = EefWrench(
                f=[float(row["f_x"]), float(row["f_y"]), float(row["f_z"])],
                tau=float(row["tau"]),
                z=[float(row["z_x"]), float(row["z_y"])])
    return [ControlStep(dt=float(dts[t]), wrenches=per_step[t])
            for t in range(len(dts))]


def write_run(out_dir, traj: CentroidalTrajectory, controls: list[ControlStep],
              report: dict, records=()) -> dict[str, str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trajectory": str(out / "trajectory.csv"),
        "controls": str(out / "controls.csv"),
        "activations": str(out / "activations.csv"),
        "report": str(out / "report.json"),
        "log": str(out / "refine_log.jsonl"),
    }
    write_trajectory_csv(paths["trajectory"], traj)
    write_controls_csv(paths["controls"], controls)
    write_activations_csv(paths["activations"], controls)
    report = dict(report, outputs=paths)
    with open(paths["report"], "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths["log"], "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict(), sort_keys=True) + "\n")
    return paths


def load_run(run_dir) -> dict:
    run = Path(run_dir)
    report_path = run / "report.json"
    if not report_path.exists():
        raise FileNotFoundError(f"no report.json in {run}")
    with open(report_path) as fh:
        report = json.load(fh)
    traj = load_trajectory_csv(run / "trajectory.csv")
    controls = load_controls_csv(run / "controls.csv", traj.dts)
    return {"report": report, "trajectory": traj, "controls": controls}
