"""Estimator-style front end so the optimizer composes with scikit-learn
pipelines and model-selection tooling.

``MomentumPlanner`` follows the fit/get_params/set_params protocol: the
constructor only stores hyperparameters, :meth:`fit` runs the refinement on
a scenario and exposes the results as trailing-underscore attributes, and
``sklearn.base.clone`` works out of the box.
"""

from __future__ import annotations

import inspect
from pathlib import Path

import numpy as np

from .dynamics import violation_metrics
from .relax import RefinementSettings, refine
from .scenario import (ScenarioConfig, load_scenario, load_scenario_file,
                       validate_scenario)


class NotFittedError(RuntimeError):
    """fit() has not produced a trajectory yet."""


class MomentumPlanner:
    """Plans CoM/momentum trajectories and contact wrenches for a scenario.

    Parameters mirror :class:`RefinementSettings`; ``None`` means "use the
    scenario's (or the package's) default".  After ``fit`` the solution is
    available as ``trajectory_``, ``controls_``, ``violation_`` and
    ``report_``; ``converged_`` tells whether the audit thresholds were met.
    """

    def __init__(self, time_mode=None, relaxation_mode=None, sigma0=None,
                 sigma_shrink=None, w0=None, w_growth=None, max_outer=None,
                 conv_com=None, conv_lin=None, conv_ang=None,
                 phase2_enabled=None, backend=None, solver_tol=None):
        self.time_mode = time_mode
        self.relaxation_mode = relaxation_mode
        self.sigma0 = sigma0
        self.sigma_shrink = sigma_shrink
        self.w0 = w0
        self.w_growth = w_growth
        self.max_outer = max_outer
        self.conv_com = conv_com
        self.conv_lin = conv_lin
        self.conv_ang = conv_ang
        self.phase2_enabled = phase2_enabled
        self.backend = backend
        self.solver_tol = solver_tol

    # -- sklearn protocol ---------------------------------------------------

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(
                    f"invalid parameter {key!r} for MomentumPlanner")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items()
                         if v is not None)
        return f"MomentumPlanner({args})"

    # -- fitting --------------------------------------------------------------

    def _coerce(self, scenario):
        if isinstance(scenario, tuple) and len(scenario) == 3:
            cfg, plan, state = scenario
        elif isinstance(scenario, (str, Path)):
            text = str(scenario)
            if "\n" in text or text.lstrip().startswith("schema_version"):
                cfg, plan, state = load_scenario(text)
            else:
                cfg, plan, state = load_scenario_file(scenario)
        else:
            raise TypeError(
                "scenario must be a path, document text, or a "
                "(ScenarioConfig, ContactPlan, InitialState) tuple")
        validate_scenario(cfg, plan, state)
        if self.time_mode is not None or self.relaxation_mode is not None:
            cfg = ScenarioConfig(
                mass=cfg.mass, friction_mu=cfg.friction_mu,
                cop_bounds=cfg.cop_bounds, torque_bounds=cfg.torque_bounds,
                dt_bounds=cfg.dt_bounds, eef_limits=cfg.eef_limits,
                n_timesteps=cfg.n_timesteps, nominal_dt=cfg.nominal_dt,
                gravity=cfg.gravity,
                time_mode=self.time_mode or cfg.time_mode,
                relaxation_mode=self.relaxation_mode or cfg.relaxation_mode,
                cost_weights=cfg.cost_weights)
        return cfg, plan, state

    def _settings(self, cfg: ScenarioConfig) -> RefinementSettings:
        overrides = {}
        for name in ("sigma0", "sigma_shrink", "w0", "w_growth", "max_outer",
                     "conv_com", "conv_lin", "conv_ang", "phase2_enabled",
                     "backend", "solver_tol"):
            value = getattr(self, name)
            if value is not None:
                overrides[name] = value
        return RefinementSettings.from_config(cfg, **overrides)

    def fit(self, scenario, y=None):
        """Run the refinement on a scenario (path, text, or model tuple)."""
        cfg, plan, state = self._coerce(scenario)
        result = refine(cfg, plan, state, settings=self._settings(cfg))
        self.scenario_ = (cfg, plan, state)
        self.trajectory_ = result.trajectory
        self.controls_ = result.controls
        self.violation_ = result.violation
        self.report_ = result.report
        self.converged_ = result.report.converged
        return self

    def _check_fitted(self):
        if not hasattr(self, "report_") or self.trajectory_ is None:
            raise NotFittedError(
                "no trajectory available; call fit() on a feasible scenario")

    def predict(self, X=None):
        """Per-step state matrix (n_timesteps x 16): dt, r, l, k, ldot, kdot."""
        self._check_fitted()
        traj = self.trajectory_
        return np.hstack([traj.dts[:, None], traj.r, traj.l, traj.k,
                          traj.ldot, traj.kdot])

    def score(self, X=None, y=None):
        """Negative worst violation ratio (0 is a perfectly consistent plan)."""
        self._check_fitted()
        cfg, plan, state = self.scenario_
        rep = violation_metrics(self.trajectory_, self.controls_, plan, cfg,
                                state)
        st = self._settings(cfg)
        return -max(rep.com_err / st.conv_com, rep.lin_err / st.conv_lin,
                    rep.ang_err / st.conv_ang)
