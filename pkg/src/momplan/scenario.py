"""Scenario model: robot constants, contact plan, initial state, and the
text document format they are loaded from.

A scenario document is a plain-text file with ``key value...`` lines grouped
into ``[robot]``, ``[time]``, ``[costs]``, ``[contacts]`` and ``[initial]``
sections.  All units are SI, orientations are ``w x y z`` quaternions and
every interval is written as a ``min max`` pair.  See
``docs/scenario_format.md`` for the full schema.

All objects here are immutable after construction (vector fields are
read-only numpy arrays) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

SCHEMA_VERSION = 1

TIME_MODES = ("fixed_time", "time_opt_free_horizon", "time_opt_fixed_horizon")
RELAXATION_MODES = ("trust_region", "soft_constraint")

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)


class ScenarioError(Exception):
    """Base class for scenario loading problems."""


class ScenarioParseError(ScenarioError):
    """Malformed document; message carries the line number and field."""


class ScenarioValidationError(ScenarioError):
    """Well-formed document violating a model invariant; names the field."""


def _ro(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(shape)
    arr.setflags(write=False)
    return arr


def _eq_arrays(a, b) -> bool:
    return a.shape == b.shape and np.array_equal(a, b)


class Interval(NamedTuple):
    lo: float
    hi: float

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


class EefLimit(NamedTuple):
    """Maximum end-effector distance from the CoM: ``length + offset``.

    The offset term covers arm end-effectors whose reach is measured from a
    shoulder rather than from the CoM; it defaults to zero for feet.
    """

    length: float
    offset: float = 0.0

    @property
    def reach(self) -> float:
        return self.length + self.offset


@dataclass(frozen=True, eq=False)
class CostWeights:
    """Objective weights: terminal state, running tracking and regularizers.

    ``terminal_state`` and ``running_momentum_tracking`` are 9-vectors over
    (r, l, k).  The scalar regularizers apply to raw (unnormalized) control
    magnitudes.  ``soft_penalty_w0`` seeds the soft-constraint penalty weight
    and ``trust_sigma0`` the trust-region width.
    """

    terminal_state: np.ndarray = field(
        default=(100.0, 100.0, 100.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0))
    running_momentum_tracking: np.ndarray = field(
        default=(0.0, 0.0, 0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1))
    force_reg: float = 1e-5
    torque_reg: float = 1e-4
    cop_reg: float = 1e-3
    dt_reg: float = 1.0
    soft_penalty_w0: float = 1.0
    trust_sigma0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terminal_state", _ro(self.terminal_state, (9,)))
        object.__setattr__(self, "running_momentum_tracking",
                           _ro(self.running_momentum_tracking, (9,)))
        for name in ("force_reg", "torque_reg", "cop_reg", "dt_reg",
                     "soft_penalty_w0"):
            if getattr(self, name) < 0:
                raise ScenarioValidationError(f"{name}: must be >= 0")
        if np.any(self.terminal_state < 0):
            raise ScenarioValidationError("terminal_state: must be >= 0")
        if np.any(self.running_momentum_tracking < 0):
            raise ScenarioValidationError(
                "running_momentum_tracking: must be >= 0")
        if not self.trust_sigma0 > 0:
            raise ScenarioValidationError("trust_sigma0: must be > 0")

    def __eq__(self, other):
        if not isinstance(other, CostWeights):
            return NotImplemented
        return (_eq_arrays(self.terminal_state, other.terminal_state)
                and _eq_arrays(self.running_momentum_tracking,
                               other.running_momentum_tracking)
                and (self.force_reg, self.torque_reg, self.cop_reg,
                     self.dt_reg, self.soft_penalty_w0, self.trust_sigma0)
                == (other.force_reg, other.torque_reg, other.cop_reg,
                    other.dt_reg, other.soft_penalty_w0, other.trust_sigma0))


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Robot constants, bounds, cost weights and optimization mode."""

    mass: float
    friction_mu: float
    cop_bounds: tuple[Interval, Interval]
    torque_bounds: Interval
    dt_bounds: Interval
    eef_limits: Mapping[str, EefLimit]
    n_timesteps: int
    nominal_dt: float
    gravity: np.ndarray = DEFAULT_GRAVITY
    time_mode: str = "fixed_time"
    relaxation_mode: str = "trust_region"
    cost_weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        object.__setattr__(self, "gravity", _ro(self.gravity, (3,)))
        object.__setattr__(self, "cop_bounds",
                           (Interval(*self.cop_bounds[0]),
                            Interval(*self.cop_bounds[1])))
        object.__setattr__(self, "torque_bounds", Interval(*self.torque_bounds))
        object.__setattr__(self, "dt_bounds", Interval(*self.dt_bounds))
        object.__setattr__(self, "eef_limits",
                           {k: EefLimit(*v) for k, v in self.eef_limits.items()})
        if not self.mass > 0:
            raise ScenarioValidationError("mass: must be > 0")
        if not self.friction_mu > 0:
            raise ScenarioValidationError("friction_mu: must be > 0")
        for name, iv in (("cop_x", self.cop_bounds[0]),
                         ("cop_y", self.cop_bounds[1]),
                         ("torque_bounds", self.torque_bounds),
                         ("dt_bounds", self.dt_bounds)):
            if iv.lo > iv.hi:
                raise ScenarioValidationError(f"{name}: min > max")
        if not self.dt_bounds.lo > 0:
            raise ScenarioValidationError("dt_bounds: min must be > 0")
        if not self.dt_bounds.contains(self.nominal_dt):
            raise ScenarioValidationError("nominal_dt: outside dt_bounds")
        if self.n_timesteps < 1:
            raise ScenarioValidationError("n_timesteps: must be >= 1")
        for eef, lim in self.eef_limits.items():
            if not lim.length > 0:
                raise ScenarioValidationError(f"eef {eef}: length must be > 0")
            if lim.offset < 0:
                raise ScenarioValidationError(f"eef {eef}: offset must be >= 0")
        if self.time_mode not in TIME_MODES:
            raise ScenarioValidationError(
                f"time_mode: unknown mode {self.time_mode!r}")
        if self.relaxation_mode not in RELAXATION_MODES:
            raise ScenarioValidationError(
                f"relaxation_mode: unknown mode {self.relaxation_mode!r}")

    @property
    def horizon(self) -> float:
        """Nominal total duration ``n_timesteps * nominal_dt`` in seconds."""
        return self.n_timesteps * self.nominal_dt

    def reach(self, eef_id: str) -> float:
        return self.eef_limits[eef_id].reach

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return (_eq_arrays(self.gravity, other.gravity)
                and self.cost_weights == other.cost_weights
                and (self.mass, self.friction_mu, self.cop_bounds,
                     self.torque_bounds, self.dt_bounds, dict(self.eef_limits),
                     self.n_timesteps, self.nominal_dt, self.time_mode,
                     self.relaxation_mode)
                == (other.mass, other.friction_mu, other.cop_bounds,
                    other.torque_bounds, other.dt_bounds,
                    dict(other.eef_limits), other.n_timesteps,
                    other.nominal_dt, other.time_mode, other.relaxation_mode))


@dataclass(frozen=True, eq=False)
class ContactPhase:
    """One end-effector held at a fixed pose over ``[start_step, end_step)``."""

    eef_id: str
    start_step: int
    end_step: int
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion, (w, x, y, z)

    def __post_init__(self):
        object.__setattr__(self, "position", _ro(self.position, (3,)))
        quat = np.array(self.orientation, dtype=float).reshape(4)
        norm = float(np.linalg.norm(quat))
        if abs(norm - 1.0) > 1e-9:
            raise ScenarioValidationError(
                f"phase {self.eef_id}: quaternion norm {norm:.2e} != 1")
        quat /= norm
        quat.setflags(write=False)
        object.__setattr__(self, "orientation", quat)
        if not 0 <= self.start_step < self.end_step:
            raise ScenarioValidationError(
                f"phase {self.eef_id}: start_step must satisfy "
                f"0 <= start < end, got [{self.start_step}, {self.end_step})")

    def active_at(self, t: int) -> bool:
        return self.start_step <= t < self.end_step

    def rotation(self) -> np.ndarray:
        """3x3 rotation matrix mapping end-effector frame to world frame."""
        w, x, y, z = self.orientation
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def __eq__(self, other):
        if not isinstance(other, ContactPhase):
            return NotImplemented
        return ((self.eef_id, self.start_step, self.end_step)
                == (other.eef_id, other.start_step, other.end_step)
                and _eq_arrays(self.position, other.position)
                and _eq_arrays(self.orientation, other.orientation))


@dataclass(frozen=True, eq=False)
class ContactPlan:
    """All contact phases, with a fixed end-effector ordering."""

    eef_ids: tuple[str, ...]
    phases: tuple[ContactPhase, ...]

    def __post_init__(self):
        object.__setattr__(self, "eef_ids", tuple(self.eef_ids))
        object.__setattr__(self, "phases", tuple(self.phases))
        known = set(self.eef_ids)
        if len(self.eef_ids) != len(known):
            raise ScenarioValidationError("eef_ids: duplicate identifier")
        for ph in self.phases:
            if ph.eef_id not in known:
                raise ScenarioValidationError(
                    f"phase: unknown end-effector {ph.eef_id!r}")
        for eef in self.eef_ids:
            spans = sorted((p.start_step, p.end_step)
                           for p in self.phases if p.eef_id == eef)
            for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
                if s1 < e0:
                    raise ScenarioValidationError(
                        f"phase {eef}: intervals [{s0},{e0}) and "
                        f"[{s1},{e1}) overlap")

    def active_contacts(self, t: int) -> list[str]:
        """End-effectors in contact at step ``t``, in ``eef_ids`` order."""
        if t < 0:
            raise IndexError(f"timestep {t} out of range")
        hit = {p.eef_id for p in self.phases if p.active_at(t)}
        return [e for e in self.eef_ids if e in hit]

    def phase_at(self, eef_id: str, t: int) -> ContactPhase:
        for p in self.phases:
            if p.eef_id == eef_id and p.active_at(t):
                return p
        raise KeyError(f"{eef_id} not active at step {t}")

    def max_end_step(self) -> int:
        return max((p.end_step for p in self.phases), default=0)

    def __eq__(self, other):
        if not isinstance(other, ContactPlan):
            return NotImplemented
        return self.eef_ids == other.eef_ids and self.phases == other.phases


def active_contacts(plan: ContactPlan, t: int, n_timesteps: int | None = None) -> list[str]:
    """End-effectors active at step ``t``; range-checked against the horizon."""
    if n_timesteps is not None and not 0 <= t < n_timesteps:
        raise IndexError(f"timestep {t} out of range [0, {n_timesteps})")
    return plan.active_contacts(t)


@dataclass(frozen=True, eq=False)
class InitialState:
    """Initial CoM/momentum state plus desired running and terminal targets."""

    r0: np.ndarray
    l0: np.ndarray
    k0: np.ndarray
    h_des: np.ndarray        # (n_timesteps, 9) desired (r, l, k) per step
    h_terminal: np.ndarray   # (9,) desired terminal (r, l, k)
    h_des_mode: str = "zeros"

    def __post_init__(self):
        object.__setattr__(self, "r0", _ro(self.r0, (3,)))
        object.__setattr__(self, "l0", _ro(self.l0, (3,)))
        object.__setattr__(self, "k0", _ro(self.k0, (3,)))
        object.__setattr__(self, "h_terminal", _ro(self.h_terminal, (9,)))
        h = np.array(self.h_des, dtype=float)
        if h.ndim != 2 or h.shape[1] != 9:
            raise ScenarioValidationError("h_des: expected an (n, 9) table")
        h.setflags(write=False)
        object.__setattr__(self, "h_des", h)

    def __eq__(self, other):
        if not isinstance(other, InitialState):
            return NotImplemented
        return (self.h_des_mode == other.h_des_mode
                and all(_eq_arrays(getattr(self, f), getattr(other, f))
                        for f in ("r0", "l0", "k0", "h_des", "h_terminal")))


def default_h_des(mode: str, n: int, r0, h_terminal) -> np.ndarray:
    """Desired per-step (r, l, k) rows.

    ``zeros`` holds r at r0 with zero momenta; ``lerp`` ramps the desired CoM
    linearly to the terminal target, still with zero desired momenta.
    """
    h = np.zeros((n, 9))
    r0 = np.asarray(r0, dtype=float)
    if mode == "zeros":
        h[:, 0:3] = r0
    elif mode == "lerp":
        rT = np.asarray(h_terminal, dtype=float)[0:3]
        alphas = (np.arange(n) + 1.0) / n
        h[:, 0:3] = r0 + alphas[:, None] * (rT - r0)
    else:
        raise ScenarioValidationError(f"h_des: unknown mode {mode!r}")
    return h


# --------------------------------------------------------------------------
# document parsing
# --------------------------------------------------------------------------

_SECTIONS = ("robot", "time", "costs", "contacts", "initial")


class _Lines:
    """Parsed ``key tokens...`` lines bucketed by section."""

    def __init__(self):
        self.by_section: dict[str, list[tuple[int, str, list[str]]]] = {
            s: [] for s in _SECTIONS}
        self.header: list[tuple[int, str, list[str]]] = []


def _tokenize(text: str) -> _Lines:
    out = _Lines()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioParseError(f"line {lineno}: unterminated section header")
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ScenarioParseError(f"line {lineno}: unknown section [{name}]")
            section = name
            continue
        tokens = line.split()
        key, args = tokens[0], tokens[1:]
        if section is None:
            out.header.append((lineno, key, args))
        else:
            out.by_section[section].append((lineno, key, args))
    return out


_REPEATED_KEYS = {"robot": ("eef",), "contacts": ("phase",),
                  "initial": ("h_des_row",)}


class _Section:
    def __init__(self, name: str, rows: list[tuple[int, str, list[str]]]):
        self.name = name
        self.rows = rows
        self._single: dict[str, tuple[int, list[str]]] = {}
        for lineno, key, args in rows:
            if key in _REPEATED_KEYS.get(name, ()):
                continue
            if any(key in allowed for allowed in _REPEATED_KEYS.values()):
                raise ScenarioParseError(
                    f"line {lineno}: [{name}] key {key!r} not allowed here")
            if key in self._single:
                raise ScenarioParseError(
                    f"line {lineno}: [{self.name}] duplicate key {key!r}")
            self._single[key] = (lineno, args)
        self.consumed: set[str] = set()

    def floats(self, key: str, count: int, default=None):
        if key not in self._single:
            if default is not None:
                return list(default)
            raise ScenarioParseError(f"[{self.name}] missing required key {key!r}")
        self.consumed.add(key)
        lineno, args = self._single[key]
        if len(args) != count:
            raise ScenarioParseError(
                f"line {lineno}: [{self.name}] {key}: expected {count} "
                f"number(s), got {len(args)}")
        try:
            return [float(a) for a in args]
        except ValueError as exc:
            raise ScenarioParseError(
                f"line {lineno}: [{self.name}] {key}: {exc}") from None

    def scalar(self, key: str, default=None):
        vals = self.floats(key, 1, None if default is None else [default])
        return vals[0]

    def integer(self, key: str, default=None):
        val = self.scalar(key, default)
        if val != int(val):
            lineno = self._single[key][0]
            raise ScenarioParseError(
                f"line {lineno}: [{self.name}] {key}: expected an integer")
        return int(val)

    def word(self, key: str, default=None):
        if key not in self._single:
            if default is not None:
                return default
            raise ScenarioParseError(f"[{self.name}] missing required key {key!r}")
        self.consumed.add(key)
        lineno, args = self._single[key]
        if len(args) != 1:
            raise ScenarioParseError(
                f"line {lineno}: [{self.name}] {key}: expected a single word")
        return args[0]

    def repeated(self, key: str):
        return [(lineno, args) for lineno, k, args in self.rows if k == key]

    def check_consumed(self):
        for key, (lineno, _) in self._single.items():
            if key not in self.consumed:
                raise ScenarioParseError(
                    f"line {lineno}: [{self.name}] unknown key {key!r}")


def load_scenario(text: str) -> tuple[ScenarioConfig, ContactPlan, InitialState]:
    """Parse a scenario document into validated model objects.

    Raises :class:`ScenarioParseError` for malformed input (with line/field
    identification) and :class:`ScenarioValidationError` for invariant
    violations (naming the offending field).
    """
    lines = _tokenize(text)

    version = None
    for lineno, key, args in lines.header:
        if key == "schema_version" and len(args) == 1:
            version = args[0]
        else:
            raise ScenarioParseError(
                f"line {lineno}: unexpected {key!r} before first section")
    if version is None:
        raise ScenarioParseError("missing schema_version header")
    if version != str(SCHEMA_VERSION):
        raise ScenarioParseError(
            f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")

    robot = _Section("robot", lines.by_section["robot"])
    time_s = _Section("time", lines.by_section["time"])
    costs = _Section("costs", lines.by_section["costs"])
    contacts = _Section("contacts", lines.by_section["contacts"])
    initial = _Section("initial", lines.by_section["initial"])

    eef_limits: dict[str, EefLimit] = {}
    eef_order: list[str] = []
    for lineno, args in robot.repeated("eef"):
        if len(args) not in (2, 4) or (len(args) == 4 and args[2] != "offset"):
            raise ScenarioParseError(
                f"line {lineno}: [robot] eef: expected "
                f"'eef <id> <length> [offset <offset>]'")
        eef_id = args[0]
        if eef_id in eef_limits:
            raise ScenarioParseError(
                f"line {lineno}: [robot] eef {eef_id!r} declared twice")
        try:
            length = float(args[1])
            offset = float(args[3]) if len(args) == 4 else 0.0
        except ValueError as exc:
            raise ScenarioParseError(f"line {lineno}: [robot] eef: {exc}") from None
        eef_limits[eef_id] = EefLimit(length, offset)
        eef_order.append(eef_id)
    if not eef_order:
        raise ScenarioParseError("[robot] missing required key 'eef'")

    weights = CostWeights(
        terminal_state=costs.floats(
            "terminal_state", 9, CostWeights().terminal_state),
        running_momentum_tracking=costs.floats(
            "momentum_tracking", 9, CostWeights().running_momentum_tracking),
        force_reg=costs.scalar("force_reg", CostWeights().force_reg),
        torque_reg=costs.scalar("torque_reg", CostWeights().torque_reg),
        cop_reg=costs.scalar("cop_reg", CostWeights().cop_reg),
        dt_reg=costs.scalar("dt_reg", CostWeights().dt_reg),
        soft_penalty_w0=costs.scalar(
            "soft_penalty_w0", CostWeights().soft_penalty_w0),
        trust_sigma0=costs.scalar("trust_sigma0", CostWeights().trust_sigma0),
    )

    cop_x = robot.floats("cop_x", 2)
    cop_y = robot.floats("cop_y", 2)
    cfg = ScenarioConfig(
        mass=robot.scalar("mass"),
        gravity=robot.floats("gravity", 3, DEFAULT_GRAVITY),
        friction_mu=robot.scalar("friction_mu"),
        cop_bounds=(Interval(*cop_x), Interval(*cop_y)),
        torque_bounds=Interval(*robot.floats("torque_bounds", 2)),
        dt_bounds=Interval(*time_s.floats("dt_bounds", 2)),
        eef_limits=eef_limits,
        n_timesteps=time_s.integer("n_timesteps"),
        nominal_dt=time_s.scalar("nominal_dt"),
        time_mode=time_s.word("time_mode", "fixed_time"),
        relaxation_mode=time_s.word("relaxation_mode", "trust_region"),
        cost_weights=weights,
    )

    phases = []
    for lineno, args in contacts.repeated("phase"):
        if len(args) != 10:
            raise ScenarioParseError(
                f"line {lineno}: [contacts] phase: expected "
                f"'phase <eef> <start> <end> <px py pz> <qw qx qy qz>'")
        try:
            start, end = int(args[1]), int(args[2])
            numbers = [float(a) for a in args[3:]]
        except ValueError as exc:
            raise ScenarioParseError(
                f"line {lineno}: [contacts] phase: {exc}") from None
        phases.append(ContactPhase(
            eef_id=args[0], start_step=start, end_step=end,
            position=numbers[0:3], orientation=numbers[3:7]))
    plan = ContactPlan(eef_ids=tuple(eef_order), phases=tuple(phases))

    r0 = initial.floats("r0", 3)
    l0 = initial.floats("l0", 3, (0.0, 0.0, 0.0))
    k0 = initial.floats("k0", 3, (0.0, 0.0, 0.0))
    h_terminal = initial.floats("h_terminal", 9)
    h_des_mode = initial.word("h_des", "zeros")
    h_des = default_h_des(h_des_mode, cfg.n_timesteps, r0, h_terminal)
    for lineno, args in initial.repeated("h_des_row"):
        if len(args) != 10:
            raise ScenarioParseError(
                f"line {lineno}: [initial] h_des_row: expected "
                f"'h_des_row <step> <9 numbers>'")
        try:
            step = int(args[0])
            row = [float(a) for a in args[1:]]
        except ValueError as exc:
            raise ScenarioParseError(
                f"line {lineno}: [initial] h_des_row: {exc}") from None
        if not 0 <= step < cfg.n_timesteps:
            raise ScenarioValidationError(
                f"h_des_row: step {step} outside [0, {cfg.n_timesteps})")
        h_des[step] = row
    state = InitialState(r0=r0, l0=l0, k0=k0, h_des=h_des,
                         h_terminal=h_terminal, h_des_mode=h_des_mode)

    for section in (robot, time_s, costs, contacts, initial):
        section.check_consumed()
    validate_scenario(cfg, plan, state)
    return cfg, plan, state


def load_scenario_file(path) -> tuple[ScenarioConfig, ContactPlan, InitialState]:
    return load_scenario(Path(path).read_text())


def validate_scenario(cfg: ScenarioConfig, plan: ContactPlan,
                      state: InitialState) -> None:
    """Cross-object invariants for programmatically built scenarios.

    The per-object constructors already enforce local invariants; this checks
    the couplings: phase windows inside the horizon, every end-effector has a
    reach limit, and the desired trajectory covers every timestep.
    """
    for ph in plan.phases:
        if ph.end_step > cfg.n_timesteps:
            raise ScenarioValidationError(
                f"phase {ph.eef_id}: end_step {ph.end_step} beyond "
                f"n_timesteps {cfg.n_timesteps}")
    for eef in plan.eef_ids:
        if eef not in cfg.eef_limits:
            raise ScenarioValidationError(f"eef {eef}: no reach limit configured")
    if state.h_des.shape[0] != cfg.n_timesteps:
        raise ScenarioValidationError(
            f"h_des: {state.h_des.shape[0]} rows for "
            f"{cfg.n_timesteps} timesteps")


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_scenario(cfg: ScenarioConfig, plan: ContactPlan,
                  state: InitialState) -> str:
    """Serialize model objects back into document text (exact round trip)."""
    w = cfg.cost_weights
    out = [f"schema_version {SCHEMA_VERSION}", ""]
    out.append("[robot]")
    out.append(f"mass {_fmt(cfg.mass)}")
    out.append("gravity " + " ".join(_fmt(v) for v in cfg.gravity))
    out.append(f"friction_mu {_fmt(cfg.friction_mu)}")
    out.append(f"cop_x {_fmt(cfg.cop_bounds[0].lo)} {_fmt(cfg.cop_bounds[0].hi)}")
    out.append(f"cop_y {_fmt(cfg.cop_bounds[1].lo)} {_fmt(cfg.cop_bounds[1].hi)}")
    out.append(f"torque_bounds {_fmt(cfg.torque_bounds.lo)} "
               f"{_fmt(cfg.torque_bounds.hi)}")
    for eef in plan.eef_ids:
        lim = cfg.eef_limits[eef]
        suffix = f" offset {_fmt(lim.offset)}" if lim.offset else ""
        out.append(f"eef {eef} {_fmt(lim.length)}{suffix}")
    out.append("")
    out.append("[time]")
    out.append(f"n_timesteps {cfg.n_timesteps}")
    out.append(f"nominal_dt {_fmt(cfg.nominal_dt)}")
    out.append(f"dt_bounds {_fmt(cfg.dt_bounds.lo)} {_fmt(cfg.dt_bounds.hi)}")
    out.append(f"time_mode {cfg.time_mode}")
    out.append(f"relaxation_mode {cfg.relaxation_mode}")
    out.append("")
    out.append("[costs]")
    out.append("terminal_state " + " ".join(_fmt(v) for v in w.terminal_state))
    out.append("momentum_tracking "
               + " ".join(_fmt(v) for v in w.running_momentum_tracking))
    for key in ("force_reg", "torque_reg", "cop_reg", "dt_reg",
                "soft_penalty_w0", "trust_sigma0"):
        out.append(f"{key} {_fmt(getattr(w, key))}")
    out.append("")
    out.append("[contacts]")
    for ph in plan.phases:
        pos = " ".join(_fmt(v) for v in ph.position)
        quat = " ".join(_fmt(v) for v in ph.orientation)
        out.append(f"phase {ph.eef_id} {ph.start_step} {ph.end_step} {pos} {quat}")
    out.append("")
    out.append("[initial]")
    out.append("r0 " + " ".join(_fmt(v) for v in state.r0))
    out.append("l0 " + " ".join(_fmt(v) for v in state.l0))
    out.append("k0 " + " ".join(_fmt(v) for v in state.k0))
    out.append("h_terminal " + " ".join(_fmt(v) for v in state.h_terminal))
    out.append(f"h_des {state.h_des_mode}")
    base = default_h_des(state.h_des_mode, cfg.n_timesteps, state.r0,
                         state.h_terminal)
    for t in range(cfg.n_timesteps):
        if not np.array_equal(base[t], state.h_des[t]):
            out.append(f"h_des_row {t} "
                       + " ".join(_fmt(v) for v in state.h_des[t]))
    out.append("")
    return "\n".join(out)
