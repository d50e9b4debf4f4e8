import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from momplan.dynamics import (ControlStep, EefWrench, check_physical,
                              integrate, kappa_e, violation_metrics)
from momplan.scenario import (ContactPhase, ContactPlan, InitialState,
                              default_h_des)

from conftest import make_config

I3 = np.eye(3)


def _state(n, r0=(0, 0, 0.8)):
    h_term = np.zeros(9)
    return InitialState(r0=r0, l0=(0, 0, 0), k0=(0, 0, 0),
                        h_des=default_h_des("zeros", n, r0, h_term),
                        h_terminal=h_term)


def test_kappa_zero_wrench():
    out = kappa_e((1, 2, 3), I3, (0.1, -0.1), (0, 0, 1), (0, 0, 0), 0.0)
    assert np.allclose(out, 0.0)


def test_kappa_unit_cross():
    out = kappa_e((1, 0, 0), I3, (0, 0), (0, 0, 0), (0, 1, 0), 0.0)
    assert np.allclose(out, (0, 0, 1))


def test_kappa_worked_example():
    # independent evaluation: ell = (1.1, 0, -1), cross with (0,0,10), + z*2
    ell = np.array([1.0, 0.0, 0.0]) + I3[:, 0:2] @ [0.1, 0.0] - [0.0, 0.0, 1.0]
    expected = np.cross(ell, [0.0, 0.0, 10.0]) + np.array([0, 0, 1]) * 2.0
    out = kappa_e((1, 0, 0), I3, (0.1, 0), (0, 0, 1), (0, 0, 10), 2.0)
    assert np.allclose(out, expected)
    assert np.allclose(out, (0.0, -11.0, 2.0))


@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
@settings(max_examples=50, deadline=None)
def test_kappa_cross_antisymmetry(vals):
    ell = np.array(vals[:3])
    f = np.array(vals[3:])
    a = kappa_e(ell, I3, (0, 0), (0, 0, 0), f, 0.0)
    b = kappa_e(f, I3, (0, 0), (0, 0, 0), ell, 0.0)
    assert np.allclose(a, -b, atol=1e-9)


def test_integrate_free_fall():
    n = 5
    cfg = make_config(mass=1.0, n_timesteps=n,
                      eef_limits={"foot": (1.1, 0.0)})
    plan = ContactPlan(eef_ids=("foot",), phases=())
    controls = [ControlStep(dt=0.1) for _ in range(n)]
    traj = integrate(_state(n), controls, plan, cfg)
    for t in range(n):
        assert np.allclose(traj.l[t], (t + 1) * cfg.gravity * 0.1)
        assert np.allclose(traj.k[t], 0.0)


def test_integrate_equilibrium():
    n = 6
    cfg = make_config()
    plan = ContactPlan(eef_ids=("foot",), phases=(
        ContactPhase("foot", 0, n, (0, 0, 0.8), (1, 0, 0, 0)),))
    cfg2 = make_config(n_timesteps=n)
    f_hold = -cfg2.mass * cfg2.gravity
    controls = [ControlStep(dt=0.1, wrenches={
        "foot": EefWrench(f=f_hold, tau=0.0, z=(0, 0))}) for _ in range(n)]
    traj = integrate(_state(n, r0=(0, 0, 0.8)), controls, plan, cfg2)
    assert np.allclose(traj.l, 0.0, atol=1e-12)
    assert np.allclose(traj.k, 0.0, atol=1e-12)
    assert np.allclose(traj.r, (0, 0, 0.8), atol=1e-12)


def test_integrate_gravity_compensation_drift():
    """Holding force keeps l and k constant while r drifts by l0 dt / m."""
    n = 5
    cfg = make_config(n_timesteps=n)
    plan = ContactPlan(eef_ids=("foot",), phases=(
        ContactPhase("foot", 0, n, (0, 0, 0.8), (1, 0, 0, 0)),))
    l0 = np.array([0.0, 0.0, 6.0])  # vertical drift keeps the lever || f
    state = InitialState(r0=(0, 0, 0.8), l0=l0, k0=(0, 0, 0),
                         h_des=np.zeros((n, 9)), h_terminal=np.zeros(9))
    f_hold = -cfg.mass * cfg.gravity
    controls = [ControlStep(dt=0.1, wrenches={
        "foot": EefWrench(f=f_hold, tau=0.0, z=(0, 0))}) for _ in range(n)]
    traj = integrate(state, controls, plan, cfg)
    for t in range(n):
        assert np.allclose(traj.l[t], l0, atol=1e-12)
        assert np.allclose(traj.k[t], 0.0, atol=1e-12)
        expected_r = np.array([0, 0, 0.8]) + (t + 1) * l0 * 0.1 / cfg.mass
        assert np.allclose(traj.r[t], expected_r, atol=1e-12)


def test_integrate_matches_hand_recursion():
    rng = np.random.default_rng(3)
    n = 5
    cfg = make_config(n_timesteps=n, mass=42.0,
                      eef_limits={"a": (2.1, 0.0), "b": (2.1, 0.0)})
    phases = (ContactPhase("a", 0, n, (0.1, 0.2, 0.0),
                           _rand_quat(rng)),
              ContactPhase("b", 1, 4, (-0.3, 0.1, 0.2), _rand_quat(rng)))
    plan = ContactPlan(eef_ids=("a", "b"), phases=phases)
    controls = []
    for t in range(n):
        wrenches = {}
        for eef in plan.active_contacts(t):
            wrenches[eef] = EefWrench(f=rng.normal(size=3) * 50,
                                      tau=rng.normal(), z=rng.normal(size=2) * 0.05)
        controls.append(ControlStep(dt=0.1 + 0.02 * t, wrenches=wrenches))
    state = _state(n)
    traj = integrate(state, controls, plan, cfg)

    # independent step-by-step recursion, written differently on purpose
    r, l, k = np.array(state.r0), np.array(state.l0), np.array(state.k0)
    for t, ctrl in enumerate(controls):
        ldot = cfg.mass * cfg.gravity + sum(
            (w.f for w in ctrl.wrenches.values()), np.zeros(3))
        l = l + ldot * ctrl.dt
        r = r + l * ctrl.dt / cfg.mass
        kdot = np.zeros(3)
        for eef, w in ctrl.wrenches.items():
            ph = plan.phase_at(eef, t)
            rot = ph.rotation()
            contact_pt = ph.position + rot[:, :2] @ w.z
            kdot = kdot + np.cross(contact_pt - r, w.f) + rot[:, 2] * w.tau
        k = k + kdot * ctrl.dt
        assert np.allclose(traj.r[t], r, atol=1e-12)
        assert np.allclose(traj.l[t], l, atol=1e-12)
        assert np.allclose(traj.k[t], k, atol=1e-12)


def _rand_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def test_integrate_rejects_bad_lengths():
    n = 4
    cfg = make_config(n_timesteps=n)
    plan = ContactPlan(eef_ids=("foot",), phases=())
    with pytest.raises(ValueError, match="control steps"):
        integrate(_state(n), [ControlStep(dt=0.1)] * 3, plan, cfg)


def test_integrate_rejects_inactive_control():
    n = 3
    cfg = make_config(n_timesteps=n)
    plan = ContactPlan(eef_ids=("foot",), phases=(
        ContactPhase("foot", 0, 1, (0, 0, 0), (1, 0, 0, 0)),))
    controls = [ControlStep(dt=0.1, wrenches={
        "foot": EefWrench(f=(0, 0, 1), tau=0, z=(0, 0))}) for _ in range(n)]
    with pytest.raises(ValueError, match="inactive"):
        integrate(_state(n), controls, plan, cfg)


def test_conservation_without_wrench_and_gravity():
    n = 8
    cfg = make_config(n_timesteps=n, gravity=(0, 0, 0))
    plan = ContactPlan(eef_ids=("foot",), phases=())
    state = InitialState(r0=(0, 0, 1), l0=(1.0, -2.0, 0.5), k0=(0.3, 0, -0.1),
                         h_des=np.zeros((n, 9)), h_terminal=np.zeros(9))
    traj = integrate(state, [ControlStep(dt=0.17)] * n, plan, cfg)
    assert np.all(traj.l == traj.l[0])
    assert np.all(traj.k == traj.k[0])
    assert np.allclose(traj.l[0], state.l0)


def test_rate_linearity_in_forces():
    """l-rate is affine in f; kappa is linear in (f, tau) at fixed geometry."""
    rng = np.random.default_rng(11)
    p, r = rng.normal(size=3), rng.normal(size=3)
    z = rng.normal(size=2) * 0.05
    f1, f2 = rng.normal(size=3), rng.normal(size=3)
    t1, t2 = rng.normal(), rng.normal()
    a, b = 0.7, -1.3
    k_combo = kappa_e(p, I3, z, r, a * f1 + b * f2, a * t1 + b * t2)
    k_parts = a * kappa_e(p, I3, z, r, f1, t1) + b * kappa_e(p, I3, z, r, f2, t2)
    assert np.allclose(k_combo, k_parts, atol=1e-10)


def _simple_contact_setup(n=4):
    cfg = make_config(n_timesteps=n, friction_mu=0.4)
    plan = ContactPlan(eef_ids=("foot",), phases=(
        ContactPhase("foot", 0, n, (0, 0, 0), (1, 0, 0, 0)),))
    return cfg, plan


def _controls(cfg, f, tau=0.0, z=(0.0, 0.0), dt=0.1):
    return [ControlStep(dt=dt, wrenches={
        "foot": EefWrench(f=f, tau=tau, z=z)}) for _ in range(cfg.n_timesteps)]


def test_check_physical_friction_ok():
    cfg, plan = _simple_contact_setup()
    controls = _controls(cfg, (1.0, 0.0, 3.0))
    traj = integrate(_state(cfg.n_timesteps, (0, 0, 0.5)), controls, plan, cfg)
    out = check_physical(controls, plan, cfg, traj)
    assert [v for v in out if v.constraint == "friction_cone"] == []


def test_check_physical_friction_violation_magnitude():
    cfg, plan = _simple_contact_setup()
    cfg = make_config(n_timesteps=cfg.n_timesteps, friction_mu=0.3)
    controls = _controls(cfg, (1.0, 0.0, 3.0))
    traj = integrate(_state(cfg.n_timesteps, (0, 0, 0.5)), controls, plan, cfg)
    out = [v for v in check_physical(controls, plan, cfg, traj)
           if v.constraint == "friction_cone"]
    assert len(out) == cfg.n_timesteps
    assert out[0].magnitude == pytest.approx(1.0 - 0.9)


def test_check_physical_dt_violation():
    cfg, plan = _simple_contact_setup()
    controls = _controls(cfg, (0.0, 0.0, 1.0), dt=0.26)
    traj = integrate(_state(cfg.n_timesteps, (0, 0, 0.5)), controls, plan, cfg)
    out = [v for v in check_physical(controls, plan, cfg, traj)
           if v.constraint == "dt_max"]
    assert out and out[0].magnitude == pytest.approx(0.01)


def test_check_physical_reach_and_cop_and_torque():
    cfg, plan = _simple_contact_setup()
    controls = _controls(cfg, (0.0, 0.0, 1.0), tau=7.0, z=(0.2, 0.0))
    traj = integrate(_state(cfg.n_timesteps, (0, 0, 2.0)), controls, plan, cfg)
    kinds = {v.constraint for v in check_physical(controls, plan, cfg, traj)}
    assert {"torque", "cop_x", "eef_length"} <= kinds


def test_violation_metrics_self_consistency():
    cfg, plan = _simple_contact_setup(n=6)
    controls = _controls(cfg, (0.5, -0.2, 3.0), tau=0.3, z=(0.01, 0.02))
    state = _state(6, (0, 0, 0.5))
    traj = integrate(state, controls, plan, cfg)
    rep = violation_metrics(traj, controls, plan, cfg, state)
    assert rep.com_err == 0.0 and rep.lin_err == 0.0 and rep.ang_err == 0.0
    assert rep.com_max == 0.0 and rep.ang_max == 0.0


def test_violation_metrics_constant_offset():
    cfg, plan = _simple_contact_setup(n=5)
    controls = _controls(cfg, (0.0, 0.0, 2.0))
    state = _state(5, (0, 0, 0.5))
    exact = integrate(state, controls, plan, cfg)
    shifted = type(exact)(r=exact.r, l=exact.l, k=exact.k + [0.0, 0.01, 0.0],
                          ldot=exact.ldot, kdot=exact.kdot, dts=exact.dts)
    rep = violation_metrics(shifted, controls, plan, cfg, state)
    assert rep.ang_err == pytest.approx(0.01)
    assert rep.ang_max == pytest.approx(0.01)
    assert rep.com_err == 0.0


def test_violation_metrics_requires_matching_dts():
    cfg, plan = _simple_contact_setup(n=3)
    controls = _controls(cfg, (0.0, 0.0, 2.0))
    state = _state(3, (0, 0, 0.5))
    traj = integrate(state, controls, plan, cfg)
    other = _controls(cfg, (0.0, 0.0, 2.0), dt=0.11)
    with pytest.raises(ValueError, match="dt"):
        violation_metrics(traj, other, plan, cfg, state)


def test_max_at_least_average():
    rng = np.random.default_rng(5)
    cfg, plan = _simple_contact_setup(n=7)
    controls = [ControlStep(dt=0.1, wrenches={
        "foot": EefWrench(f=rng.normal(size=3) * 20, tau=0.1, z=(0, 0))})
        for _ in range(7)]
    state = _state(7, (0, 0, 0.5))
    exact = integrate(state, controls, plan, cfg)
    noisy = type(exact)(r=exact.r + rng.normal(size=exact.r.shape) * 1e-3,
                        l=exact.l + rng.normal(size=exact.l.shape) * 1e-3,
                        k=exact.k + rng.normal(size=exact.k.shape) * 1e-3,
                        ldot=exact.ldot, kdot=exact.kdot, dts=exact.dts)
    rep = violation_metrics(noisy, controls, plan, cfg, state)
    assert rep.com_max >= rep.com_err
    assert rep.lin_max >= rep.lin_err
    assert rep.ang_max >= rep.ang_err
