"""Exact discrete centroidal dynamics: integration oracle, physical
constraint checks and violation metrics for auditing relaxed solutions.

The state recursion per step is evaluated in the order rate -> momentum ->
CoM -> angular rate -> angular momentum:

    ldot_t = m g + sum_e f_e
    l_t    = l_{t-1} + ldot_t dt_t
    r_t    = r_{t-1} + (1/m) l_t dt_t
    kdot_t = sum_e [ (p_e + R_e^{xy} z_e - r_t) x f_e + R_e^z tau_e ]
    k_t    = k_{t-1} + kdot_t dt_t

Note that r_t uses the updated l_t and kdot_t uses the updated r_t; the
recursion is still explicit when evaluated in this order.  These functions
are pure and safe to run in parallel across scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .scenario import ContactPlan, InitialState, ScenarioConfig


@dataclass(frozen=True)
class EefWrench:
    """World-frame force, local-z torque and local CoP of one end-effector."""

    f: np.ndarray        # (3,) N, world frame
    tau: float           # N*m about the local z axis
    z: np.ndarray        # (2,) m, CoP in the end-effector frame

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float).reshape(3))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float).reshape(2))


@dataclass(frozen=True)
class ControlStep:
    """Controls of one timestep: wrench per active end-effector plus dt."""

    dt: float
    wrenches: Mapping[str, EefWrench] = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")


@dataclass(frozen=True)
class CentroidalState:
    r: np.ndarray
    l: np.ndarray
    k: np.ndarray
    ldot: np.ndarray
    kdot: np.ndarray


@dataclass(frozen=True)
class CentroidalTrajectory:
    """Per-step CoM, momenta and rates as (n, 3) arrays plus dt sequence."""

    r: np.ndarray
    l: np.ndarray
    k: np.ndarray
    ldot: np.ndarray
    kdot: np.ndarray
    dts: np.ndarray

    def __post_init__(self):
        n = self.dts.shape[0]
        for name in ("r", "l", "k", "ldot", "kdot"):
            if getattr(self, name).shape != (n, 3):
                raise ValueError(f"{name}: expected shape ({n}, 3)")

    @property
    def n_steps(self) -> int:
        return int(self.dts.shape[0])

    def state(self, t: int) -> CentroidalState:
        return CentroidalState(self.r[t], self.l[t], self.k[t],
                               self.ldot[t], self.kdot[t])

    def times(self) -> np.ndarray:
        """Cumulative physical time at the end of each step."""
        return np.cumsum(self.dts)


@dataclass(frozen=True)
class Violation:
    step: int
    eef: str | None
    constraint: str
    magnitude: float


@dataclass(frozen=True)
class ViolationReport:
    """Average and max per-step 2-norm gaps between a relaxed trajectory and
    the exact integration of its own controls."""

    com_err: float
    lin_err: float
    ang_err: float
    com_max: float
    lin_max: float
    ang_max: float

    def within(self, com: float, lin: float, ang: float) -> bool:
        return (self.com_err <= com and self.lin_err <= lin
                and self.ang_err <= ang)

    def as_dict(self) -> dict[str, float]:
        return {
            "com_err": self.com_err, "lin_err": self.lin_err,
            "ang_err": self.ang_err, "com_max": self.com_max,
            "lin_max": self.lin_max, "ang_max": self.ang_max,
        }


def kappa_e(p_e, R_e: np.ndarray, z_e, r, f_e, tau_e: float) -> np.ndarray:
    """End-effector contribution to the angular momentum rate.

    ``(p_e + R_e^{xy} z_e - r) x f_e + R_e^z tau_e`` with ``R_e`` the 3x3
    end-effector-to-world rotation, ``z_e`` the local CoP and ``tau_e`` the
    torque about the local z axis.
    """
    p_e = np.asarray(p_e, dtype=float)
    r = np.asarray(r, dtype=float)
    f_e = np.asarray(f_e, dtype=float)
    z_e = np.asarray(z_e, dtype=float)
    ell = p_e + R_e[:, 0:2] @ z_e - r
    return np.cross(ell, f_e) + R_e[:, 2] * tau_e


def integrate(x0: InitialState, controls: Sequence[ControlStep],
              plan: ContactPlan, cfg: ScenarioConfig) -> CentroidalTrajectory:
    """Forward integration of the exact discrete dynamics.

    Raises ``ValueError`` when the control sequence length disagrees with the
    configured horizon, or when a wrench is supplied for an end-effector that
    is not in contact at that step.
    """
    n = cfg.n_timesteps
    if len(controls) != n:
        raise ValueError(f"expected {n} control steps, got {len(controls)}")
    m = cfg.mass
    g = cfg.gravity

    r = np.empty((n, 3))
    l = np.empty((n, 3))
    k = np.empty((n, 3))
    ldot = np.empty((n, 3))
    kdot = np.empty((n, 3))
    dts = np.array([c.dt for c in controls], dtype=float)

    r_prev, l_prev, k_prev = x0.r0, x0.l0, x0.k0
    for t, ctrl in enumerate(controls):
        active = plan.active_contacts(t)
        for eef in ctrl.wrenches:
            if eef not in active:
                raise ValueError(
                    f"step {t}: control given for inactive end-effector {eef!r}")
        ldot[t] = m * g
        for eef, wrench in ctrl.wrenches.items():
            ldot[t] += wrench.f
        l[t] = l_prev + ldot[t] * ctrl.dt
        r[t] = r_prev + l[t] * (ctrl.dt / m)
        kdot[t] = 0.0
        for eef, wrench in ctrl.wrenches.items():
            phase = plan.phase_at(eef, t)
            kdot[t] += kappa_e(phase.position, phase.rotation(), wrench.z,
                               r[t], wrench.f, wrench.tau)
        k[t] = k_prev + kdot[t] * ctrl.dt
        r_prev, l_prev, k_prev = r[t], l[t], k[t]

    return CentroidalTrajectory(r=r, l=l, k=k, ldot=ldot, kdot=kdot, dts=dts)


def check_physical(controls: Sequence[ControlStep], plan: ContactPlan,
                   cfg: ScenarioConfig,
                   states: CentroidalTrajectory) -> list[Violation]:
    """All constraint violations of a control/state pair, exact arithmetic.

    Checks, per step and end-effector: friction cone in the local frame,
    nonnegative normal force, CoP box, torque box, dt box and CoM-to-contact
    distance.  Returns an empty list iff everything is satisfied.
    """
    out: list[Violation] = []
    mu = cfg.friction_mu
    for t, ctrl in enumerate(controls):
        if ctrl.dt < cfg.dt_bounds.lo:
            out.append(Violation(t, None, "dt_min", cfg.dt_bounds.lo - ctrl.dt))
        if ctrl.dt > cfg.dt_bounds.hi:
            out.append(Violation(t, None, "dt_max", ctrl.dt - cfg.dt_bounds.hi))
        for eef, wrench in ctrl.wrenches.items():
            phase = plan.phase_at(eef, t)
            f_local = phase.rotation().T @ wrench.f
            if f_local[2] < 0:
                out.append(Violation(t, eef, "normal_force", -f_local[2]))
            slack = np.hypot(f_local[0], f_local[1]) - mu * f_local[2]
            if slack > 0:
                out.append(Violation(t, eef, "friction_cone", slack))
            for axis, name in ((0, "cop_x"), (1, "cop_y")):
                iv = cfg.cop_bounds[axis]
                if wrench.z[axis] < iv.lo:
                    out.append(Violation(t, eef, name, iv.lo - wrench.z[axis]))
                if wrench.z[axis] > iv.hi:
                    out.append(Violation(t, eef, name, wrench.z[axis] - iv.hi))
            if wrench.tau < cfg.torque_bounds.lo:
                out.append(Violation(t, eef, "torque",
                                     cfg.torque_bounds.lo - wrench.tau))
            if wrench.tau > cfg.torque_bounds.hi:
                out.append(Violation(t, eef, "torque",
                                     wrench.tau - cfg.torque_bounds.hi))
            dist = float(np.linalg.norm(phase.position - states.r[t]))
            reach = cfg.reach(eef)
            if dist > reach:
                out.append(Violation(t, eef, "eef_length", dist - reach))
    return out


def violation_metrics(relaxed: CentroidalTrajectory,
                      controls: Sequence[ControlStep], plan: ContactPlan,
                      cfg: ScenarioConfig,
                      x0: InitialState) -> ViolationReport:
    """Audit a relaxed trajectory against exact integration of its controls.

    Re-integrates the controls with :func:`integrate` and reports the
    average and max per-step 2-norm discrepancy of CoM, linear and angular
    momentum.
    """
    n = relaxed.n_steps
    if len(controls) != n:
        raise ValueError(f"trajectory has {n} steps, controls {len(controls)}")
    if not np.allclose(relaxed.dts, [c.dt for c in controls], atol=0.0, rtol=0.0):
        raise ValueError("trajectory and controls disagree on dt sequence")
    exact = integrate(x0, controls, plan, cfg)
    com = np.linalg.norm(relaxed.r - exact.r, axis=1)
    lin = np.linalg.norm(relaxed.l - exact.l, axis=1)
    ang = np.linalg.norm(relaxed.k - exact.k, axis=1)
    return ViolationReport(
        com_err=float(com.mean()), lin_err=float(lin.mean()),
        ang_err=float(ang.mean()), com_max=float(com.max()),
        lin_max=float(lin.max()), ang_max=float(ang.max()))
