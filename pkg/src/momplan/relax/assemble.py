"""Assembly of the relaxed trajectory optimization as a cone program.

The discrete dynamics become linear equalities in states, rates and DC
auxiliaries (every bilinear term appears as 1/4 (pbar - qbar)); the convex
halves ``pbar >= p'p`` / ``qbar >= q'q`` become second-order cone rows;
friction cones, CoP/torque/dt boxes and reach limits fill the physical
constraint catalog; quadratic costs enter as SOC epigraphs.

In time-optimization modes the products of momenta/rates with the timestep
duration are decomposed like the cross products (phase 1) or replaced by
their first-order expansion around the previous iterate (phase 2, see the
refinement driver).
"""

from __future__ import annotations

import math

import numpy as np

from ..conic import ConicProgram, ProgramBuilder
from ..dc import (AffExpr, decompose_cross_product, decompose_time_bilinear)
from ..scenario import ContactPlan, InitialState, ScenarioConfig
from .layout import RelaxedLayout, TimeLinearization


def _vec(ids) -> list[AffExpr]:
    return [AffExpr.var(i) for i in ids]


def build_convex_relaxation(
        cfg: ScenarioConfig, plan: ContactPlan, state: InitialState,
        time_lin: TimeLinearization | None = None,
        fixed_dts: np.ndarray | None = None,
        aux_pull: float = 0.0) -> tuple[ConicProgram, RelaxedLayout]:
    """Build the convex relaxation (no trust regions / penalties yet).

    ``time_lin`` switches the time-bilinear products to their first-order
    expansion (phase 2 of the driver); otherwise time products get DC
    auxiliaries.  ``fixed_dts`` drops the duration variables entirely and
    uses the given per-step constants (final stage of time-optimized runs).
    ``aux_pull`` adds a small linear cost on every pbar/qbar to bias the
    relaxation toward tight auxiliaries.
    """
    with_time = cfg.time_mode != "fixed_time" and fixed_dts is None
    with_time_dc = with_time and time_lin is None
    layout = RelaxedLayout(cfg, plan, with_time=with_time,
                           with_time_dc=with_time_dc, fixed_dts=fixed_dts)
    n = cfg.n_timesteps
    ws = layout.wrench_scale      # momenta/forces enter scaled by 1/ws
    g0 = layout.accel_scale
    w = cfg.cost_weights
    dts_const = (fixed_dts if fixed_dts is not None
                 else np.full(n, cfg.nominal_dt))

    # allocate DC auxiliaries step by step (cross first, then time products)
    cross_by_step: list[dict[str, tuple]] = []
    time_by_step: list[dict[str, tuple]] = []
    for t in range(n):
        cross: dict[str, tuple] = {}
        for eef in layout.active[t]:
            phase = plan.phase_at(eef, t)
            rot = phase.rotation()
            z_expr = _vec(layout.z(t, eef))
            ell = [AffExpr.var(layout.r(t)[i]) * -1.0
                   + (rot[i, 0] * z_expr[0]) + (rot[i, 1] * z_expr[1])
                   + float(phase.position[i])
                   for i in range(3)]
            f_expr = _vec(layout.f(t, eef))
            pairs = decompose_cross_product(ell, f_expr, layout.pool,
                                            label=f"kappa[{t},{eef}]")
            cross[eef] = pairs
            layout.cross_pairs.extend(pairs)
            layout.pairs_by_step[t].extend(pairs)
        cross_by_step.append(cross)
        time_terms: dict[str, tuple] = {}
        if with_time_dc:
            dt_expr = AffExpr.var(layout.dt(t))
            for name in ("l", "ldot", "kdot"):
                pairs = decompose_time_bilinear(
                    _vec(layout.state_ids(name, t)), dt_expr, layout.pool,
                    label=f"{name}*dt[{t}]")
                time_terms[name] = pairs
                layout.time_pairs.extend(pairs)
                layout.pairs_by_step[t].extend(pairs)
        time_by_step.append(time_terms)

    b = ProgramBuilder(layout.n_vars, layout.pool.names)

    # -- dynamics equalities ------------------------------------------------
    g_norm = cfg.gravity / g0  # unit-scale gravity in the rate rows
    r_prev = [AffExpr.constant(v) for v in state.r0]
    l_prev = [AffExpr.constant(v / ws) for v in state.l0]
    k_prev = [AffExpr.constant(v / ws) for v in state.k0]
    for t in range(n):
        r_t, l_t, k_t = _vec(layout.r(t)), _vec(layout.l(t)), _vec(layout.k(t))
        ldot_t, kdot_t = _vec(layout.ldot(t)), _vec(layout.kdot(t))
        for i in range(3):
            expr = ldot_t[i] - g_norm[i]
            for eef in layout.active[t]:
                expr = expr - AffExpr.var(layout.f(t, eef)[i])
            b.add_eq(expr)
        for i in range(3):
            expr = kdot_t[i]
            for eef in layout.active[t]:
                pair = cross_by_step[t][eef][i]
                expr = (expr - 0.25 * AffExpr.var(pair.pbar_var)
                        + 0.25 * AffExpr.var(pair.qbar_var))
                rz = plan.phase_at(eef, t).rotation()[i, 2]
                if rz != 0.0:
                    expr = expr - rz * AffExpr.var(layout.tau(t, eef))
            b.add_eq(expr)

        def product(name: str, v_exprs, i: int) -> AffExpr:
            """The term v_i * dt in the current time handling."""
            if not with_time:
                return float(dts_const[t]) * v_exprs[i]
            if with_time_dc:
                pair = time_by_step[t][name][i]
                return (0.25 * AffExpr.var(pair.pbar_var)
                        - 0.25 * AffExpr.var(pair.qbar_var))
            v0 = float(getattr(time_lin, name)[t, i])
            dt0 = float(time_lin.dt[t])
            return (v0 * AffExpr.var(layout.dt(t)) + dt0 * v_exprs[i]
                    - v0 * dt0)

        for i in range(3):
            b.add_eq(l_t[i] - l_prev[i] - product("ldot", ldot_t, i))
        for i in range(3):
            b.add_eq(k_t[i] - k_prev[i] - product("kdot", kdot_t, i))
        for i in range(3):
            # r advances by dt * l / mass = g0 * dt * (scaled l)
            b.add_eq(r_t[i] - r_prev[i] - g0 * product("l", l_t, i))
        r_prev, l_prev, k_prev = r_t, l_t, k_t

    if with_time and cfg.time_mode == "time_opt_fixed_horizon":
        expr = AffExpr.constant(-cfg.horizon)
        for t in range(n):
            expr = expr + AffExpr.var(layout.dt(t))
        b.add_eq(expr)

    # -- physical constraints -----------------------------------------------
    for t in range(n):
        if with_time:
            dt_expr = AffExpr.var(layout.dt(t))
            b.add_nonneg(dt_expr - cfg.dt_bounds.lo)
            b.add_nonneg(cfg.dt_bounds.hi - dt_expr)
        for eef in layout.active[t]:
            zx, zy = _vec(layout.z(t, eef))
            b.add_nonneg(zx - cfg.cop_bounds[0].lo)
            b.add_nonneg(cfg.cop_bounds[0].hi - zx)
            b.add_nonneg(zy - cfg.cop_bounds[1].lo)
            b.add_nonneg(cfg.cop_bounds[1].hi - zy)
            tau_expr = AffExpr.var(layout.tau(t, eef))
            b.add_nonneg(tau_expr - cfg.torque_bounds.lo / ws)
            b.add_nonneg(cfg.torque_bounds.hi / ws - tau_expr)
    for t in range(n):
        for eef in layout.active[t]:
            phase = plan.phase_at(eef, t)
            rot = phase.rotation()
            f_expr = _vec(layout.f(t, eef))
            local = [rot[0, i] * f_expr[0] + rot[1, i] * f_expr[1]
                     + rot[2, i] * f_expr[2] for i in range(3)]
            b.add_soc([cfg.friction_mu * local[2], local[0], local[1]])
            reach = cfg.reach(eef)
            r_t = _vec(layout.r(t))
            b.add_soc([AffExpr.constant(reach),
                       float(phase.position[0]) - r_t[0],
                       float(phase.position[1]) - r_t[1],
                       float(phase.position[2]) - r_t[2]])

    # -- DC convex halves -----------------------------------------------------
    # the tightness pull applies to the cross-product auxiliaries only: on
    # time products it would lean on the durations themselves (through the
    # (v +- dt)^2 floors), distorting dt whenever the real costs are small
    for pair in layout.dc_pairs:
        for bar, exprs in ((pair.pbar_var, pair.plus_expr),
                           (pair.qbar_var, pair.minus_expr)):
            bar_expr = AffExpr.var(bar)
            block = [bar_expr + 1.0]
            block.extend(2.0 * e for e in exprs)
            block.append(bar_expr - 1.0)
            b.add_soc(block)
            if aux_pull and pair.kind == "cross":
                b.add_cost(bar, aux_pull)

    # -- objective ------------------------------------------------------------
    def tracked(t: int, targets: np.ndarray, weights: np.ndarray):
        """sqrt(w) scaled deviations of raw (r, l, k) from targets."""
        out = []
        blocks = (("r", 1.0), ("l", ws), ("k", ws))
        for bi, (name, scale) in enumerate(blocks):
            ids = layout.state_ids(name, t)
            for i in range(3):
                wi = weights[3 * bi + i]
                if wi > 0:
                    out.append(math.sqrt(wi)
                               * (scale * AffExpr.var(ids[i])
                                  - float(targets[3 * bi + i])))
        return out

    for t in range(n):
        entries = []
        if t < n - 1:
            entries.extend(tracked(t, state.h_des[t],
                                   w.running_momentum_tracking))
        for eef in layout.active[t]:
            if w.force_reg > 0:
                fw = math.sqrt(w.force_reg) * ws
                entries.extend(fw * e for e in _vec(layout.f(t, eef)))
            if w.torque_reg > 0:
                entries.append(math.sqrt(w.torque_reg) * ws
                               * AffExpr.var(layout.tau(t, eef)))
            if w.cop_reg > 0:
                cw = math.sqrt(w.cop_reg)
                entries.extend(cw * e for e in _vec(layout.z(t, eef)))
        if with_time and w.dt_reg > 0:
            entries.append(math.sqrt(w.dt_reg)
                           * (AffExpr.var(layout.dt(t)) - cfg.nominal_dt))
        if entries:
            layout.cost_epigraphs.append(
                b.add_sq_epigraph(entries, name=f"cost[{t}]"))
    terminal = tracked(n - 1, state.h_terminal, w.terminal_state)
    if terminal:
        layout.cost_epigraphs.append(
            b.add_sq_epigraph(terminal, name="cost[terminal]"))

    prog = b.build()
    layout.program_vars = prog.n_vars
    return prog, layout
