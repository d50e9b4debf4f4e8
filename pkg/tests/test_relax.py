from types import SimpleNamespace

import numpy as np
import pytest

from momplan.conic import ProgramBuilder, kkt_stats, solve
from momplan.dc import AffExpr, DcPair
from momplan.dynamics import violation_metrics
from momplan.relax import (RefinementSettings, add_soft_penalties,
                           add_trust_regions, build_convex_relaxation,
                           dc_gaps, refine)
from momplan.scenario import CostWeights

from conftest import standing_scenario, walking_scenario


# ---------------------------------------------------------------------------
# assembly structure
# ---------------------------------------------------------------------------

def test_single_step_program_counts():
    cfg, plan, state = standing_scenario(n=1)
    prog, layout = build_convex_relaxation(cfg, plan, state)
    assert prog.n_eq == 15  # 5 state blocks x 3 rows; DC links live in cones
    d = layout.describe()
    assert d["states"] == 15
    assert d["controls"] == 6
    assert d["cross_aux"] == 6
    assert d["time_aux"] == 0
    assert d["dt"] == 0
    assert d["cost_epigraphs"] == 2  # running regs + terminal
    assert d["total"] == 15 + 6 + 6 + 2
    stats = kkt_stats(prog)
    assert stats["variables"] == d["total"]
    assert stats["lin_eq"] == 15


def test_time_mode_adds_expected_blocks():
    n = 5
    cfg_f, plan, state = standing_scenario(n=n)
    cfg_t, _, _ = standing_scenario(n=n, time_mode="time_opt_free_horizon")
    prog_f, lay_f = build_convex_relaxation(cfg_f, plan, state)
    prog_t, lay_t = build_convex_relaxation(cfg_t, plan, state)
    df, dt = lay_f.describe(), lay_t.describe()
    assert dt["dt"] == n
    assert dt["time_aux"] == 2 * 3 * 3 * n
    assert dt["total"] - df["total"] == n + 18 * n
    # dynamics equality count does not change; the bilinears move into cones
    assert prog_t.n_eq == prog_f.n_eq
    sf, st_ = kkt_stats(prog_f), kkt_stats(prog_t)
    assert st_["lin_ineq"] - sf["lin_ineq"] == 2 * n          # dt bounds
    assert st_["soc_count"] - sf["soc_count"] == 18 * n      # aux cones


def test_fixed_horizon_adds_one_equality():
    n = 4
    cfg_free, plan, state = standing_scenario(
        n=n, time_mode="time_opt_free_horizon")
    cfg_fh, _, _ = standing_scenario(
        n=n, time_mode="time_opt_fixed_horizon")
    prog_free, _ = build_convex_relaxation(cfg_free, plan, state)
    prog_fh, _ = build_convex_relaxation(cfg_fh, plan, state)
    assert prog_fh.n_eq == prog_free.n_eq + 1


def test_zero_weight_objective_still_feasible():
    zero = CostWeights(terminal_state=np.zeros(9),
                       running_momentum_tracking=np.zeros(9), force_reg=0.0,
                       torque_reg=0.0, cop_reg=0.0, dt_reg=0.0)
    cfg, plan, state = standing_scenario(n=3, cost_weights=zero)
    prog, layout = build_convex_relaxation(cfg, plan, state)
    assert layout.describe()["cost_epigraphs"] == 0
    sol = solve(prog)
    assert sol.status == "optimal"
    lo, hi = dc_gaps(layout, sol.x)
    assert lo >= -1e-6  # relaxation-only: slack above p'p is allowed


def test_extraction_embed_round_trip():
    cfg, plan, state = walking_scenario(n=10)
    prog, layout = build_convex_relaxation(cfg, plan, state)
    sol = solve(prog)
    traj, controls = layout.extract(sol.x)
    x2 = layout.embed(traj, controls)
    traj2, controls2 = layout.extract(x2)
    assert np.allclose(traj.r, traj2.r, atol=1e-12)
    assert np.allclose(traj.l, traj2.l, atol=1e-9)
    for c1, c2 in zip(controls, controls2):
        assert c1.wrenches.keys() == c2.wrenches.keys()
        for eef in c1.wrenches:
            assert np.allclose(c1.wrenches[eef].f, c2.wrenches[eef].f,
                               atol=1e-9)


# ---------------------------------------------------------------------------
# trust region / soft penalty mechanics
# ---------------------------------------------------------------------------

def _toy_problem():
    """min (pbar-5)^2 + (p-1)^2 subject to pbar = p^2 (as a DC pair)."""
    b = ProgramBuilder(3, ["p", "pbar", "qbar"])
    p, pbar, qbar = AffExpr.var(0), AffExpr.var(1), AffExpr.var(2)
    b.add_soc([pbar + 1.0, 2.0 * p, pbar - 1.0])       # pbar >= p^2
    b.add_soc([qbar + 1.0, AffExpr.constant(0.0), qbar - 1.0])  # qbar >= 0
    b.add_sq_epigraph([pbar - 5.0, p - 1.0])
    pair = DcPair(plus_expr=(p,), minus_expr=(AffExpr.constant(0.0),),
                  pbar_var=1, qbar_var=2)
    layout = SimpleNamespace(dc_pairs=[pair], pairs_by_step=[[pair]])
    return b.build(), layout


def _toy_oracle():
    grid = np.linspace(-3.0, 3.0, 240001)
    vals = (grid ** 2 - 5.0) ** 2 + (grid - 1.0) ** 2
    return grid[np.argmin(vals)]


def test_trust_region_row_algebra():
    prog, layout = _toy_problem()
    # pin p = 1, then maximize pbar and qbar: the trust rows must cap them
    # at lin(p'p) + sigma = 1.1 and 0 + sigma = 0.1 (prior p_val = 1)
    b = ProgramBuilder(3, ["p", "pbar", "qbar"])
    b.add_eq(AffExpr.var(0) - 1.0)
    b.add_soc([AffExpr.var(1) + 1.0, 2.0 * AffExpr.var(0), AffExpr.var(1) - 1.0])
    b.add_nonneg(AffExpr.var(2))
    b.add_cost(1, -1.0)
    b.add_cost(2, -1.0)
    prior = np.array([1.0, 1.0, 0.0])
    tight = add_trust_regions(b.build(), layout, prior, sigma=0.1)
    sol = solve(tight)
    assert sol.status == "optimal"
    assert sol.x[1] == pytest.approx(1.1, abs=1e-6)
    assert sol.x[2] == pytest.approx(0.1, abs=1e-6)


def test_trust_region_refinement_reaches_grid_optimum():
    prog, layout = _toy_problem()
    sol = solve(prog)
    sigma = 1.0
    for _ in range(16):
        sol = solve(add_trust_regions(prog, layout, sol.x, sigma))
        assert sol.status == "optimal"
        sigma *= 0.5
    assert sol.x[0] == pytest.approx(_toy_oracle(), abs=1e-3)


def test_soft_penalty_refinement_reaches_grid_optimum():
    prog, layout = _toy_problem()
    sol = solve(prog)
    weight = 1.0
    for _ in range(14):
        sol = solve(add_soft_penalties(prog, layout, sol.x, weight))
        assert sol.status == "optimal"
        weight *= 5.0
    assert sol.x[0] == pytest.approx(_toy_oracle(), abs=1e-3)


def test_soft_penalty_zero_at_prior_and_identity_at_zero_weight():
    prog, layout = _toy_problem()
    assert add_soft_penalties(prog, layout, np.zeros(3), 0.0) is prog
    # exact prior (pbar = p_val^2): the added penalty admits zero deviation
    prior = np.array([2.0, 4.0, 0.0])
    ext = add_soft_penalties(prog, layout, prior, 1e6)
    sol = solve(ext)
    assert sol.status == "optimal"
    # at the prior point the epigraph variables can sit at ~0
    pair = layout.dc_pairs[0]
    lin = 2 * 2.0 * sol.x[0] - 4.0
    assert sol.x[1] >= lin - 1e-6  # penalty pulled pbar onto linearization


# ---------------------------------------------------------------------------
# refinement driver
# ---------------------------------------------------------------------------

def test_refine_equilibrium_converges_quickly():
    cfg, plan, state = standing_scenario(n=10)
    res = refine(cfg, plan, state)
    assert res.report.status == "converged"
    assert res.report.outer_iterations <= 3
    assert res.violation.ang_err < RefinementSettings().conv_ang


def test_refine_trust_containment_and_monotone_audit():
    cfg, plan, state = walking_scenario(n=12)
    res = refine(cfg, plan, state)
    assert res.report.status == "converged"
    sigma_records = [r for r in res.report.records if r.sigma is not None]
    assert sigma_records
    for rec in sigma_records:
        assert rec.dc_gap_min >= -1e-7
        assert rec.dc_gap_max <= rec.sigma + 1e-7
    first = res.report.records[0].report
    final = res.violation
    assert final.com_err <= first.com_err + 1e-12
    assert final.ang_err <= first.ang_err + 1e-12


def test_refine_soft_mode_converges():
    cfg, plan, state = walking_scenario(n=12, relaxation_mode="soft_constraint")
    res = refine(cfg, plan, state)
    assert res.report.status == "converged"
    weights = [r.penalty_weight for r in res.report.records
               if r.penalty_weight is not None]
    assert weights == sorted(weights)  # grows monotonically


def test_refine_emits_log_records():
    cfg, plan, state = standing_scenario(n=6)
    seen = []
    res = refine(cfg, plan, state, log_cb=seen.append)
    assert len(seen) == len(res.report.records)
    rec = seen[0].as_dict()
    assert {"iteration", "phase", "solver_status", "solve_time",
            "violation"} <= rec.keys()


def test_refine_time_mode_dt_bounds_and_horizon():
    cfg, plan, state = walking_scenario(n=10,
                                        time_mode="time_opt_fixed_horizon")
    res = refine(cfg, plan, state)
    assert res.trajectory is not None
    dts = res.trajectory.dts
    assert np.all(dts >= cfg.dt_bounds.lo - 1e-9)
    assert np.all(dts <= cfg.dt_bounds.hi + 1e-9)
    assert dts.sum() == pytest.approx(cfg.horizon, abs=1e-9)


def test_refine_dt_regularizer_only_returns_nominal():
    weights = CostWeights(terminal_state=np.zeros(9),
                          running_momentum_tracking=np.zeros(9),
                          force_reg=0.0, torque_reg=0.0, cop_reg=0.0,
                          dt_reg=1.0)
    cfg, plan, state = standing_scenario(
        n=4, time_mode="time_opt_free_horizon", cost_weights=weights)
    res = refine(cfg, plan, state)
    assert res.trajectory is not None
    assert np.allclose(res.trajectory.dts, cfg.nominal_dt, atol=1e-6)


def test_refine_infeasible_reports_cleanly():
    # feet too far apart for the reach limits: even the relaxation has no
    # feasible point
    cfg, plan, state = walking_scenario(n=10)
    from momplan.scenario import ContactPhase, ContactPlan
    phases = (
        ContactPhase("left", 0, 10, (0.0, 0.09, 0.0), (1, 0, 0, 0)),
        ContactPhase("right", 0, 10, (5.0, -0.09, 0.0), (1, 0, 0, 0)),
    )
    plan = ContactPlan(eef_ids=("left", "right"), phases=phases)
    res = refine(cfg, plan, state)
    assert res.report.status == "infeasible"
    assert res.trajectory is None


def test_refine_with_splitting_backend():
    """The first-order backend drives the same contract end to end."""
    cfg, plan, state = standing_scenario(n=6)
    settings = RefinementSettings(backend="splitting", solver_tol=1e-7,
                                  solver_max_iter=200)
    res = refine(cfg, plan, state, settings=settings)
    assert res.report.status == "converged"
    assert res.violation.com_err < 1e-6


def test_refine_audit_self_consistency():
    """The driver's reported violation equals a fresh audit of its outputs."""
    cfg, plan, state = walking_scenario(n=10)
    res = refine(cfg, plan, state)
    rep = violation_metrics(res.trajectory, res.controls, plan, cfg, state)
    assert rep.com_err == pytest.approx(res.violation.com_err, rel=1e-12)
    assert rep.ang_err == pytest.approx(res.violation.ang_err, rel=1e-12)
