import numpy as np
import pytest

from momplan.scenario import (ContactPhase, ContactPlan, CostWeights,
                              InitialState, Interval, ScenarioConfig,
                              default_h_des)

SCENARIO_DIR = "scenarios"


def make_config(**overrides):
    base = dict(
        mass=60.0, friction_mu=0.6,
        cop_bounds=(Interval(-0.1, 0.1), Interval(-0.05, 0.05)),
        torque_bounds=Interval(-5.0, 5.0), dt_bounds=Interval(0.05, 0.25),
        eef_limits={"foot": (1.1, 0.0)}, n_timesteps=10, nominal_dt=0.1,
        time_mode="fixed_time", relaxation_mode="trust_region",
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def standing_scenario(n=10, **cfg_overrides):
    """Single foot under the CoM, zero desired momentum."""
    cfg = make_config(n_timesteps=n, **cfg_overrides)
    plan = ContactPlan(eef_ids=("foot",), phases=(
        ContactPhase("foot", 0, n, (0.0, 0.0, 0.0), (1, 0, 0, 0)),))
    h_term = np.array([0.0, 0.0, 0.8, 0, 0, 0, 0, 0, 0])
    state = InitialState(
        r0=(0.0, 0.0, 0.8), l0=(0, 0, 0), k0=(0, 0, 0),
        h_des=default_h_des("zeros", n, (0, 0, 0.8), h_term),
        h_terminal=h_term)
    return cfg, plan, state


def walking_scenario(n=12, time_mode="fixed_time",
                     relaxation_mode="trust_region", weights=None):
    """Small two-feet walk used by the mid-size driver tests."""
    cfg = make_config(
        n_timesteps=n, time_mode=time_mode, relaxation_mode=relaxation_mode,
        friction_mu=0.7,
        eef_limits={"left": (1.15, 0.0), "right": (1.15, 0.0)},
        cost_weights=weights or CostWeights())
    phases = (
        ContactPhase("left", 0, n // 2 + 2, (0.0, 0.09, 0.0), (1, 0, 0, 0)),
        ContactPhase("right", 0, n, (0.0, -0.09, 0.0), (1, 0, 0, 0)),
        ContactPhase("left", n // 2 + 4, n, (0.2, 0.09, 0.0), (1, 0, 0, 0)),
    )
    plan = ContactPlan(eef_ids=("left", "right"), phases=phases)
    h_term = np.array([0.15, 0.0, 0.8, 0, 0, 0, 0, 0, 0])
    state = InitialState(
        r0=(0.0, 0.0, 0.8), l0=(0, 0, 0), k0=(0, 0, 0),
        h_des=default_h_des("zeros", n, (0, 0, 0.8), h_term),
        h_terminal=h_term)
    return cfg, plan, state


@pytest.fixture(scope="session")
def stairs_paths():
    return f"{SCENARIO_DIR}/stairs.scn"


@pytest.fixture(scope="session")
def corpus_paths():
    return {name: f"{SCENARIO_DIR}/{name}.scn"
            for name in ("stairs", "hands_bar", "low_friction")}
