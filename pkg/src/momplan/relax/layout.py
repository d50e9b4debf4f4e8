"""Variable layout of the relaxed trajectory program.

Block order, per timestep: r, l, k, ldot, kdot (15 state slots, momenta
weight normalized), then f(3)/tau(1)/z(2) per active end-effector, the
timestep duration in time-optimization modes, and the DC auxiliary scalars
pbar/qbar of every decomposed bilinear term of that step.  Objective
epigraph variables follow after all steps so the index map stays a bijection
onto the full variable range.

Momenta, rates, forces and torques are scaled by 1/(mass * |gravity|)
inside the program: forces land at O(1), so the bilinear auxiliaries and
every constraint row are O(1) too.  Without this the pbar >= p'p cone rows
amplify solver residuals by the size of pbar, which would swamp the audit
tolerances.  :meth:`extract` undoes the scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dc import DcPair, VariablePool
from ..dynamics import CentroidalTrajectory, ControlStep, EefWrench
from ..scenario import ContactPlan, ScenarioConfig

STATE_BLOCKS = ("r", "l", "k", "ldot", "kdot")


def wrench_scale(cfg: ScenarioConfig) -> float:
    """Internal normalization constant mass * |gravity| (force units)."""
    g_norm = float(np.linalg.norm(cfg.gravity))
    return cfg.mass * (g_norm if g_norm > 0 else 9.80665)


@dataclass
class TimeLinearization:
    """First-order expansion point for the time-bilinear products.

    Arrays are mass normalized (same scale as the program variables):
    ``v * dt`` is replaced by ``v_val * dt + dt_val * v - v_val * dt_val``
    for v in {l, ldot, kdot}.
    """

    l: np.ndarray      # (n, 3)
    ldot: np.ndarray   # (n, 3)
    kdot: np.ndarray   # (n, 3)
    dt: np.ndarray     # (n,)


@dataclass
class RelaxedLayout:
    """Index map from physical quantities into the program variable vector."""

    cfg: ScenarioConfig
    plan: ContactPlan
    with_time: bool
    with_time_dc: bool
    fixed_dts: np.ndarray | None = None  # frozen per-step durations
    pool: VariablePool = field(default_factory=VariablePool)

    def __post_init__(self):
        n = self.cfg.n_timesteps
        self.wrench_scale = wrench_scale(self.cfg)
        self.accel_scale = self.wrench_scale / self.cfg.mass
        self.active = [self.plan.active_contacts(t) for t in range(n)]
        self._state: list[dict[str, list[int]]] = []
        self._controls: list[dict[str, dict[str, list[int]]]] = []
        self._dt: list[int | None] = []
        for t in range(n):
            blocks = {name: self.pool.new_vec(f"{name}[{t}]", 3)
                      for name in STATE_BLOCKS}
            self._state.append(blocks)
            ctrl: dict[str, dict[str, list[int]]] = {}
            for eef in self.active[t]:
                ctrl[eef] = {
                    "f": self.pool.new_vec(f"f[{t},{eef}]", 3),
                    "tau": [self.pool.new(f"tau[{t},{eef}]")],
                    "z": self.pool.new_vec(f"z[{t},{eef}]", 2),
                }
            self._controls.append(ctrl)
            self._dt.append(self.pool.new(f"dt[{t}]") if self.with_time else None)
        # DC pairs are appended by the assembler (their pbar/qbar ids come
        # from the same pool, interleaved per step)
        self.cross_pairs: list[DcPair] = []
        self.time_pairs: list[DcPair] = []
        self.pairs_by_step: list[list[DcPair]] = [[] for _ in range(n)]
        self.cost_epigraphs: list[int] = []
        self.program_vars: int | None = None  # set after assembly

    # -- index accessors ---------------------------------------------------

    def state_ids(self, name: str, t: int) -> list[int]:
        return self._state[t][name]

    def r(self, t): return self._state[t]["r"]
    def l(self, t): return self._state[t]["l"]
    def k(self, t): return self._state[t]["k"]
    def ldot(self, t): return self._state[t]["ldot"]
    def kdot(self, t): return self._state[t]["kdot"]

    def f(self, t: int, eef: str): return self._controls[t][eef]["f"]
    def tau(self, t: int, eef: str): return self._controls[t][eef]["tau"][0]
    def z(self, t: int, eef: str): return self._controls[t][eef]["z"]

    def dt(self, t: int) -> int | None:
        return self._dt[t]

    @property
    def dc_pairs(self) -> list[DcPair]:
        return self.cross_pairs + self.time_pairs

    @property
    def n_vars(self) -> int:
        return self.pool.n_vars

    def describe(self) -> dict[str, int]:
        """Variable counts per block family (used by size audits)."""
        n = self.cfg.n_timesteps
        active_steps = sum(len(a) for a in self.active)
        return {
            "states": 15 * n,
            "controls": 6 * active_steps,
            "dt": n if self.with_time else 0,
            "cross_aux": 2 * len(self.cross_pairs),
            "time_aux": 2 * len(self.time_pairs),
            "cost_epigraphs": len(self.cost_epigraphs),
            "total": self.program_vars if self.program_vars is not None
                     else self.n_vars,
        }

    # -- value mapping -------------------------------------------------

    def extract(self, x: np.ndarray) -> tuple[CentroidalTrajectory,
                                              list[ControlStep]]:
        """Denormalized trajectory and controls from a solution vector."""
        cfg = self.cfg
        n = cfg.n_timesteps
        ws = self.wrench_scale
        arr = {name: np.empty((n, 3)) for name in STATE_BLOCKS}
        dts = np.empty(n)
        controls = []
        for t in range(n):
            for name in STATE_BLOCKS:
                scale = 1.0 if name == "r" else ws
                arr[name][t] = scale * x[self._state[t][name]]
            if self.with_time:
                dts[t] = x[self._dt[t]]
            elif self.fixed_dts is not None:
                dts[t] = self.fixed_dts[t]
            else:
                dts[t] = cfg.nominal_dt
            wrenches = {}
            for eef in self.active[t]:
                ids = self._controls[t][eef]
                wrenches[eef] = EefWrench(
                    f=ws * x[ids["f"]], tau=float(ws * x[ids["tau"][0]]),
                    z=x[ids["z"]])
            controls.append(ControlStep(dt=float(dts[t]), wrenches=wrenches))
        traj = CentroidalTrajectory(
            r=arr["r"], l=arr["l"], k=arr["k"], ldot=arr["ldot"],
            kdot=arr["kdot"], dts=dts)
        return traj, controls

    def embed(self, traj: CentroidalTrajectory,
              controls: list[ControlStep]) -> np.ndarray:
        """Normalized solution vector with the base blocks filled in.

        Used to evaluate DC linearization points after a program rebuild;
        auxiliary and epigraph entries are left at zero.
        """
        cfg = self.cfg
        x = np.zeros(self.program_vars if self.program_vars is not None
                     else self.n_vars)
        ws = self.wrench_scale
        for t in range(cfg.n_timesteps):
            for name in STATE_BLOCKS:
                scale = 1.0 if name == "r" else 1.0 / ws
                x[self._state[t][name]] = scale * getattr(traj, name)[t]
            if self.with_time:
                x[self._dt[t]] = traj.dts[t]
            for eef in self.active[t]:
                ids = self._controls[t][eef]
                wrench = controls[t].wrenches[eef]
                x[ids["f"]] = wrench.f / ws
                x[ids["tau"][0]] = wrench.tau / ws
                x[ids["z"]] = wrench.z
        return x
