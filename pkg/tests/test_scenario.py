import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from momplan.scenario import (ContactPhase, ContactPlan, CostWeights,
                              ScenarioParseError,
                              ScenarioValidationError, active_contacts,
                              dump_scenario, load_scenario,
                              load_scenario_file)

MINIMAL = """
schema_version 1
[robot]
mass 60.0
friction_mu 0.5
cop_x -0.1 0.1
cop_y -0.05 0.05
torque_bounds -5 5
eef foot 1.1
[time]
n_timesteps 20
nominal_dt 0.1
dt_bounds 0.05 0.25
[contacts]
phase foot 0 20 0 0 0 1 0 0 0
[initial]
r0 0 0 0.8
h_terminal 0 0 0.8 0 0 0 0 0 0
"""

TWO_FEET = """
schema_version 1
[robot]
mass 60.0
friction_mu 0.5
cop_x -0.1 0.1
cop_y -0.05 0.05
torque_bounds -5 5
eef left 1.1
eef right 1.1
[time]
n_timesteps 20
nominal_dt 0.1
dt_bounds 0.05 0.25
[contacts]
phase left 0 6 0 0.1 0 1 0 0 0
phase right 4 12 0.2 -0.1 0 1 0 0 0
phase left 10 18 0.4 0.1 0 1 0 0 0
phase right 16 20 0.6 -0.1 0 1 0 0 0
[initial]
r0 0 0 0.8
h_terminal 0.5 0 0.8 0 0 0 0 0 0
"""


def test_minimal_document_defaults():
    cfg, plan, state = load_scenario(MINIMAL)
    assert cfg.mass == 60.0
    assert cfg.friction_mu == 0.5
    assert cfg.n_timesteps == 20
    assert cfg.time_mode == "fixed_time"
    assert cfg.relaxation_mode == "trust_region"
    assert np.allclose(cfg.gravity, (0, 0, -9.81))
    assert plan.eef_ids == ("foot",)
    assert state.h_des.shape == (20, 9)
    # default cost weights applied
    assert cfg.cost_weights == CostWeights()


def test_dt_bounds_inverted_rejected():
    doc = MINIMAL.replace("dt_bounds 0.05 0.25", "dt_bounds 0.2 0.1")
    with pytest.raises(ScenarioValidationError, match="dt_bounds: min > max"):
        load_scenario(doc)


def test_two_feet_walk_phases():
    cfg, plan, state = load_scenario(TWO_FEET)
    assert len(plan.phases) == 4
    assert plan.eef_ids == ("left", "right")


def test_parse_error_includes_line_number():
    doc = MINIMAL.replace("mass 60.0", "mass sixty")
    with pytest.raises(ScenarioParseError, match=r"line \d+.*mass"):
        load_scenario(doc)


def test_unknown_key_rejected_with_line():
    doc = MINIMAL.replace("mass 60.0", "mass 60.0\nbogus_key 3")
    with pytest.raises(ScenarioParseError, match="bogus_key"):
        load_scenario(doc)


def test_missing_schema_version():
    doc = "\n".join(MINIMAL.splitlines()[2:])
    with pytest.raises(ScenarioParseError, match="schema_version"):
        load_scenario(doc)


def test_phase_beyond_horizon_rejected():
    doc = MINIMAL.replace("phase foot 0 20", "phase foot 0 21")
    with pytest.raises(ScenarioValidationError, match="end_step"):
        load_scenario(doc)


def test_overlapping_phases_same_eef_rejected():
    doc = TWO_FEET.replace("phase left 10 18", "phase left 5 18")
    with pytest.raises(ScenarioValidationError, match="overlap"):
        load_scenario(doc)


def test_unit_quaternion_required():
    doc = MINIMAL.replace("1 0 0 0", "1 1 0 0")
    with pytest.raises(ScenarioValidationError, match="quaternion"):
        load_scenario(doc)


def test_round_trip_minimal():
    parsed = load_scenario(MINIMAL)
    dumped = dump_scenario(*parsed)
    reparsed = load_scenario(dumped)
    assert parsed[0] == reparsed[0]
    assert parsed[1] == reparsed[1]
    assert parsed[2] == reparsed[2]


def test_round_trip_corpus(corpus_paths):
    for path in corpus_paths.values():
        parsed = load_scenario_file(path)
        reparsed = load_scenario(dump_scenario(*parsed))
        assert parsed[0] == reparsed[0], path
        assert parsed[1] == reparsed[1], path
        assert parsed[2] == reparsed[2], path


def test_active_contacts_basic():
    plan = ContactPlan(eef_ids=("left",), phases=(
        ContactPhase("left", 0, 10, (0, 0, 0), (1, 0, 0, 0)),))
    assert active_contacts(plan, 5, 20) == ["left"]
    assert active_contacts(plan, 10, 20) == []   # exclusive end


def test_active_contacts_double_support():
    plan = ContactPlan(eef_ids=("left", "right"), phases=(
        ContactPhase("left", 0, 10, (0, 0.1, 0), (1, 0, 0, 0)),
        ContactPhase("right", 5, 15, (0, -0.1, 0), (1, 0, 0, 0))))
    assert active_contacts(plan, 7, 20) == ["left", "right"]


def test_active_contacts_out_of_range():
    plan = ContactPlan(eef_ids=("left",), phases=())
    with pytest.raises(IndexError):
        active_contacts(plan, 20, 20)
    with pytest.raises(IndexError):
        active_contacts(plan, -1, 20)


@given(st.lists(st.tuples(st.integers(0, 18), st.integers(1, 6)),
                min_size=0, max_size=5),
       st.integers(0, 19))
@settings(max_examples=60, deadline=None)
def test_active_contacts_monotone_under_insertion(extra, t):
    """Adding a phase never removes an id from any step's active set."""
    base_phases = [ContactPhase("a", 0, 10, (0, 0, 0), (1, 0, 0, 0))]
    plan = ContactPlan(eef_ids=("a", "b"), phases=tuple(base_phases))
    before = set(plan.active_contacts(t))
    phases = list(base_phases)
    last_end = 0
    for start, length in sorted(extra):
        start = max(start, last_end)  # keep one eef's phases disjoint
        end = min(start + length, 20)
        if start >= end:
            continue
        phases.append(ContactPhase("b", start, end, (1, 0, 0), (1, 0, 0, 0)))
        last_end = end
    grown = ContactPlan(eef_ids=("a", "b"), phases=tuple(phases))
    after = set(grown.active_contacts(t))
    assert before <= after


_FIELD_MUTATIONS = [
    ("mass 60.0", "mass 0"),
    ("mass 60.0", "mass -3"),
    ("friction_mu 0.5", "friction_mu 0"),
    ("dt_bounds 0.05 0.25", "dt_bounds 0.3 0.25"),
    ("dt_bounds 0.05 0.25", "dt_bounds 0 0.25"),
    ("nominal_dt 0.1", "nominal_dt 0.3"),
    ("n_timesteps 20", "n_timesteps 0"),
    ("cop_x -0.1 0.1", "cop_x 0.1 -0.1"),
    ("torque_bounds -5 5", "torque_bounds 5 -5"),
    ("eef foot 1.1", "eef foot -1.1"),
    ("phase foot 0 20", "phase foot 12 12"),
    ("phase foot 0 20 0 0 0 1 0 0 0", "phase foot 0 20 0 0 0 0.5 0 0 0"),
    ("time_mode fixed_time", "time_mode warp_speed"),
]


@pytest.mark.parametrize("old,new", _FIELD_MUTATIONS)
def test_single_field_violations_rejected(old, new):
    doc = MINIMAL
    if old not in doc:  # inject optional keys before mutating them
        doc = doc.replace("[contacts]", f"{old}\n[contacts]")
    assert old in doc
    with pytest.raises((ScenarioValidationError, ScenarioParseError)):
        load_scenario(doc.replace(old, new))


def test_vectors_are_read_only():
    cfg, plan, state = load_scenario(MINIMAL)
    with pytest.raises(ValueError):
        cfg.gravity[0] = 1.0
    with pytest.raises(ValueError):
        state.h_des[0, 0] = 1.0
    with pytest.raises(ValueError):
        plan.phases[0].position[0] = 2.0
