"""Momentum trajectory optimization for multi-contact legged robots.

Computes CoM/momentum trajectories, contact wrenches and per-step timestep
durations under friction-cone, CoP, torque and reach constraints, by convex
relaxation (trust region or soft constraint) of the bilinear dynamics, and
audits every solution against exact forward integration.
"""

from __future__ import annotations

from .dynamics import (CentroidalState, CentroidalTrajectory, ControlStep,
                       EefWrench, ViolationReport, check_physical, integrate,
                       kappa_e, violation_metrics)
from .scenario import (ContactPhase, ContactPlan, CostWeights, InitialState,
                       Interval, ScenarioConfig, ScenarioError,
                       ScenarioParseError, ScenarioValidationError,
                       active_contacts, dump_scenario, load_scenario,
                       load_scenario_file, validate_scenario)

__version__ = "0.1.0"

from .planner import MomentumPlanner, NotFittedError  # noqa: E402
from .relax import RefinementSettings, RefineResult, refine  # noqa: E402
