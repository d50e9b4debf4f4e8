"""Trust-region / soft-constraint refinement of the convex relaxation.

The driver first solves the relaxation with only the convex halves of the DC
constraints active, then tightens around the previous iterate: trust regions
restrict each auxiliary to ``pbar <= lin(p'p) + sigma`` (shrinking sigma) and
soft constraints penalize ``(pbar - lin(p'p))^2`` (growing weight).  Both are
linearized at the values the previous solve assigned to p.

Convergence is judged by the audit against exact integration: average CoM,
linear and angular momentum discrepancies below the configured thresholds.

Time-optimization runs use two phases.  Phase 1 decomposes the time products
like the cross products and lets the solver discover the motion and its
timing.  Once CoM/linear momentum converge or stop improving, phase 2
replaces the time products by their first-order expansion around the current
iterate (re-expanded every iteration) and keeps refining only the
cross-product terms; at the fixed point the expansion is exact, which is
what lets the audit errors on CoM and linear momentum reach solver level.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..conic import (ConicProgram, ConicSolution, append_nonneg_rows,
                     extend_with_epigraphs, kkt_stats, solve)
from ..dc import AffExpr
from ..dynamics import (CentroidalTrajectory, ControlStep, ViolationReport,
                        violation_metrics)
from ..scenario import ContactPlan, InitialState, ScenarioConfig
from .assemble import build_convex_relaxation
from .layout import RelaxedLayout, TimeLinearization


@dataclass(frozen=True)
class RefinementSettings:
    sigma0: float = 1.0
    sigma_shrink: float = 0.5
    w0: float = 1.0
    w_growth: float = 5.0
    max_outer: int = 20
    conv_com: float = 1e-6
    conv_lin: float = 1e-5
    conv_ang: float = 1e-2
    phase2_enabled: bool = True
    infeasibility_backoff: float = 4.0
    phase1_max_iters: int = 4
    phase2_max_iters: int = 8
    dt_settle_tol: float = 2e-3
    solver_tol: float = 1e-8
    solver_max_iter: int = 100
    backend: str = "ipm"
    # linear pressure on the pbar/qbar auxiliaries: keeps the convex-only
    # relaxation from hiding momentum in DC slack, which would hand the
    # trust/penalty refinement useless linearization points
    aux_pull: float = 0.1

    def __post_init__(self):
        if not 0 < self.sigma_shrink < 1:
            raise ValueError("sigma_shrink must be in (0, 1)")
        if not self.w_growth > 1:
            raise ValueError("w_growth must be > 1")
        if min(self.conv_com, self.conv_lin, self.conv_ang) <= 0:
            raise ValueError("convergence thresholds must be > 0")
        if not self.infeasibility_backoff > 1:
            raise ValueError("infeasibility_backoff must be > 1")

    @classmethod
    def from_config(cls, cfg: ScenarioConfig, **overrides) -> "RefinementSettings":
        base = {"sigma0": cfg.cost_weights.trust_sigma0,
                "w0": cfg.cost_weights.soft_penalty_w0}
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class IterationRecord:
    """One refinement iteration, as emitted to the JSON-lines log."""

    iteration: int
    phase: int
    sigma: float | None
    penalty_weight: float | None
    solver_status: str
    solver_iterations: int
    solve_time: float
    objective: float
    report: ViolationReport | None
    dc_gap_min: float
    dc_gap_max: float

    def as_dict(self) -> dict:
        out = {
            "iteration": self.iteration, "phase": self.phase,
            "sigma": self.sigma, "penalty_weight": self.penalty_weight,
            "solver_status": self.solver_status,
            "solver_iterations": self.solver_iterations,
            "solve_time": self.solve_time, "objective": self.objective,
            "dc_gap_min": self.dc_gap_min, "dc_gap_max": self.dc_gap_max,
        }
        out["violation"] = self.report.as_dict() if self.report else None
        return out


@dataclass(frozen=True)
class SolveReport:
    status: str  # converged | max_outer | infeasible | stalled
    outer_iterations: int
    total_solve_time: float
    kkt: dict[str, int]
    records: tuple[IterationRecord, ...]
    settings: RefinementSettings

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class RefineResult:
    trajectory: CentroidalTrajectory | None
    controls: list[ControlStep] | None
    violation: ViolationReport | None
    report: SolveReport


def add_trust_regions(prog: ConicProgram, layout: RelaxedLayout,
                      prior_x: np.ndarray, sigma: float) -> ConicProgram:
    """One linear row per auxiliary: ``2 v'p - pbar >= v'v - sigma`` with v
    the prior value of p; same for qbar.  The prior point itself satisfies
    the row with sigma > 0, so the restricted program has interior points."""
    rows = []
    for pair in layout.dc_pairs:
        for bar, exprs, val in (
                (pair.pbar_var, pair.plus_expr, pair.plus_value(prior_x)),
                (pair.qbar_var, pair.minus_expr, pair.minus_value(prior_x))):
            row = AffExpr.constant(sigma - float(val @ val)) - AffExpr.var(bar)
            for vj, ej in zip(val, exprs):
                if vj != 0.0:
                    row = row + (2.0 * float(vj)) * ej
            rows.append(row)
    return append_nonneg_rows(prog, rows)


# growing the penalty beyond this deteriorates the Newton systems; past the
# cap the refinement keeps improving through re-linearization alone
MAX_PENALTY_WEIGHT = 1e5


def add_soft_penalties(prog: ConicProgram, layout: RelaxedLayout,
                       prior_x: np.ndarray, weight: float) -> ConicProgram:
    """Quadratic pull of every auxiliary toward the linearization of its
    squared norm; grouped per timestep into one epigraph each.  Leaves the
    feasible set untouched; ``weight == 0`` returns the program unchanged.

    The weight is carried as sqrt(w) inside the cone rows (unit epigraph
    cost) and capped, so growing it geometrically cannot blow up the
    objective scale.
    """
    if weight == 0.0:
        return prog
    root = float(np.sqrt(min(weight, MAX_PENALTY_WEIGHT)))
    groups = []
    for step_pairs in layout.pairs_by_step:
        devs = []
        for pair in step_pairs:
            for bar, exprs, val in (
                    (pair.pbar_var, pair.plus_expr, pair.plus_value(prior_x)),
                    (pair.qbar_var, pair.minus_expr,
                     pair.minus_value(prior_x))):
                dev = AffExpr.var(bar) + float(val @ val)
                for vj, ej in zip(val, exprs):
                    if vj != 0.0:
                        dev = dev - (2.0 * float(vj)) * ej
                devs.append(root * dev)
        if devs:
            groups.append(devs)
    return extend_with_epigraphs(prog, groups, [1.0] * len(groups),
                                 name="dc_penalty")


def dc_gaps(layout: RelaxedLayout, x: np.ndarray) -> tuple[float, float]:
    """(min, max) of ``bar - value'value`` over all auxiliaries."""
    lo, hi = np.inf, -np.inf
    for pair in layout.dc_pairs:
        for bar, val in ((pair.pbar_var, pair.plus_value(x)),
                         (pair.qbar_var, pair.minus_value(x))):
            gap = float(x[bar]) - float(val @ val)
            lo = min(lo, gap)
            hi = max(hi, gap)
    if not layout.dc_pairs:
        lo = hi = 0.0
    return lo, hi


def _score(report: ViolationReport, st: RefinementSettings) -> float:
    return max(report.com_err / st.conv_com, report.lin_err / st.conv_lin,
               report.ang_err / st.conv_ang)


def _normalized_lin(traj: CentroidalTrajectory,
                    scale: float) -> TimeLinearization:
    return TimeLinearization(l=traj.l / scale, ldot=traj.ldot / scale,
                             kdot=traj.kdot / scale, dt=traj.dts.copy())


def refine(cfg: ScenarioConfig, plan: ContactPlan, state: InitialState,
           settings: RefinementSettings | None = None,
           log_cb=None) -> RefineResult:
    """Run the full refinement loop for one scenario.

    Returns the best audited iterate; ``report.status`` distinguishes
    convergence, iteration exhaustion ("max_outer"), relaxation
    infeasibility ("infeasible") and solver breakdown ("stalled").
    ``log_cb``, when given, receives each IterationRecord as it is produced.
    """
    st = settings if settings is not None else RefinementSettings.from_config(cfg)
    t_start = time.perf_counter()
    trust = cfg.relaxation_mode == "trust_region"
    time_mode = cfg.time_mode != "fixed_time"

    def _solve(prog, warm):
        if warm is not None and (warm.x is None
                                 or warm.x.shape[0] != prog.n_vars):
            warm = None
        return solve(prog, tol=st.solver_tol, max_iter=st.solver_max_iter,
                     backend=st.backend, warm_start=warm)

    def _usable(sol: ConicSolution) -> bool:
        """Accept only solves accurate enough to audit and linearize from."""
        if sol.x is None or not np.all(np.isfinite(sol.x)):
            return False
        if sol.status == "optimal":
            return True
        return (sol.status == "max_iter"
                and max(sol.primal_residual, sol.dual_residual)
                <= 100.0 * st.solver_tol and sol.gap <= 1e-4)

    base_prog, layout = build_convex_relaxation(cfg, plan, state,
                                                aux_pull=st.aux_pull)
    kkt = kkt_stats(base_prog)
    if time_mode:
        # solve the convex-only initialization at the nominal timing: a
        # fixed-dt start gives the first trust regions / penalties a
        # dynamics-consistent expansion point for the time products
        init_prog, init_layout = build_convex_relaxation(
            cfg, plan, state,
            fixed_dts=np.full(cfg.n_timesteps, cfg.nominal_dt),
            aux_pull=st.aux_pull)
    else:
        init_prog, init_layout = base_prog, layout
    records: list[IterationRecord] = []

    def emit(rec: IterationRecord):
        records.append(rec)
        if log_cb is not None:
            log_cb(rec)

    def finish(status, traj, controls, report):
        sr = SolveReport(
            status=status, outer_iterations=len(records) - 1,
            total_solve_time=time.perf_counter() - t_start, kkt=kkt,
            records=tuple(records), settings=st)
        return RefineResult(traj, controls, report, sr)

    sol = _solve(init_prog, None)
    if time_mode and not _usable(sol):
        # nominal timing may itself be infeasible; fall back to the loose
        # initialization with decomposed time products
        init_prog, init_layout = base_prog, layout
        sol = _solve(init_prog, None)
    if sol.status in ("primal_infeasible", "dual_infeasible"):
        emit(IterationRecord(0, 1, None, None, sol.status, sol.iterations,
                             sol.solve_time, np.nan, None, 0.0, 0.0))
        return finish("infeasible", None, None, None)
    if not _usable(sol):
        emit(IterationRecord(0, 1, None, None, sol.status, sol.iterations,
                             sol.solve_time, np.nan, None, 0.0, 0.0))
        return finish("stalled", None, None, None)

    traj, controls = init_layout.extract(sol.x)
    report = violation_metrics(traj, controls, plan, cfg, state)
    lo, hi = dc_gaps(init_layout, sol.x)
    emit(IterationRecord(0, 1, None, None, sol.status, sol.iterations,
                         sol.solve_time, sol.objective, report, lo, hi))
    best = (traj, controls, report)
    if not time_mode and _score(report, st) <= 1.0:
        return finish("converged", *best)

    sigma = st.sigma0
    weight = st.w0
    phase = 1
    phase1_iters = 0
    phase2_iters = 0
    prior_x = sol.x if not time_mode else layout.embed(traj, controls)
    prev_sol = sol if not time_mode else None
    prev_dts = traj.dts.copy()
    status = "max_outer"
    for outer in range(1, st.max_outer + 1):
        if time_mode and st.phase2_enabled:
            if phase == 1 and phase1_iters >= 1 \
                    and _phase2_trigger(records, st, phase1_iters):
                phase = 2
            elif phase == 2 and (
                    phase2_iters >= st.phase2_max_iters
                    or (phase2_iters >= 2
                        and np.max(np.abs(traj.dts - prev_dts))
                        < st.dt_settle_tol)):
                phase = 3
        rebuild = False
        if phase == 2:
            # re-expand the time products around the current iterate
            base_prog, layout = build_convex_relaxation(
                cfg, plan, state,
                time_lin=_normalized_lin(traj, layout.wrench_scale),
                aux_pull=st.aux_pull)
            rebuild = True
        elif phase == 3 and layout.with_time:
            # durations settled: freeze them and finish as a fixed-dt run
            base_prog, layout = build_convex_relaxation(
                cfg, plan, state, fixed_dts=traj.dts.copy(),
                aux_pull=st.aux_pull)
            rebuild = True
        if rebuild:
            prior_x = layout.embed(traj, controls)
        prev_dts = traj.dts.copy()

        def tighten(width):
            if trust:
                prog = add_trust_regions(base_prog, layout, prior_x, width)
            else:
                prog = add_soft_penalties(base_prog, layout, prior_x, weight)
            if phase == 2:
                prog = _damp_dt(prog, layout, prior_x, np.sqrt(width),
                                trust, weight)
            return prog

        sol = _solve(tighten(sigma), prev_sol)
        for _ in range(3):
            if not (trust and not _usable(sol)):
                break
            # too tight (infeasible) or too hard numerically: widen
            sigma *= st.infeasibility_backoff
            sol = _solve(tighten(sigma), prev_sol)
        if not _usable(sol):
            emit(IterationRecord(outer, phase, sigma if trust else None,
                                 None if trust else weight, sol.status,
                                 sol.iterations, sol.solve_time, np.nan,
                                 None, 0.0, 0.0))
            status = "stalled"
            break

        traj, controls = layout.extract(sol.x)
        report = violation_metrics(traj, controls, plan, cfg, state)
        lo, hi = dc_gaps(layout, sol.x)
        emit(IterationRecord(outer, phase, sigma if trust else None,
                             None if trust else weight, sol.status,
                             sol.iterations, sol.solve_time, sol.objective,
                             report, lo, hi))
        if phase == 1:
            phase1_iters += 1
        elif phase == 2:
            phase2_iters += 1
        if _score(report, st) < _score(best[2], st):
            best = (traj, controls, report)
        prior_x = sol.x
        prev_sol = sol
        if _score(report, st) <= 1.0:
            status = "converged"
            break
        sigma *= st.sigma_shrink
        weight *= st.w_growth

    return finish(status, *best)


def _damp_dt(prog: ConicProgram, layout: RelaxedLayout, prior_x: np.ndarray,
             radius: float, trust: bool, weight: float) -> ConicProgram:
    """Bound (or penalize) duration movement while time terms are linearized;
    keeps the first-order expansion error second-order small."""
    n = layout.cfg.n_timesteps
    if trust:
        rows = []
        for t in range(n):
            dt_var = AffExpr.var(layout.dt(t))
            val = float(prior_x[layout.dt(t)])
            rows.append(dt_var - (val - radius))
            rows.append((val + radius) - dt_var)
        return append_nonneg_rows(prog, rows)
    devs = [AffExpr.var(layout.dt(t)) - float(prior_x[layout.dt(t)])
            for t in range(n)]
    return extend_with_epigraphs(prog, [devs], [weight], name="dt_damp")


def _phase2_trigger(records, st: RefinementSettings,
                    phase1_iters: int) -> bool:
    """Switch once CoM and linear momentum converged or stopped improving.

    Only genuine phase-1 iterates count; the fixed-dt initialization solve
    has artificially clean audits and would otherwise distort the ratios.
    """
    phase1 = [r for r in records
              if r.phase == 1 and r.iteration >= 1 and r.report is not None]
    if not phase1:
        return False
    last = phase1[-1].report
    if last.com_err <= st.conv_com and last.lin_err <= st.conv_lin:
        return True
    if phase1_iters >= st.phase1_max_iters:
        return True
    if len(phase1) >= 2:
        prev = phase1[-2].report
        com_ratio = last.com_err / max(prev.com_err, 1e-300)
        lin_ratio = last.lin_err / max(prev.lin_err, 1e-300)
        if max(com_ratio, lin_ratio) > 0.7:
            return True
    return False
