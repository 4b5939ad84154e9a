"""Physical constants of the chassis, motors and floor, and their config file.

All quantities are SI internally. The config file is TOML with sections
``[robot]``, ``[motor]``, ``[surfaces.<name>]``, ``[loop]``, ``[controller]``
and optional ``[cases.<name>]``; wheel angles are written in degrees.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from omnisim.kinematics import ScenarioCase, TrapezoidProfile


class ConfigError(ValueError):
    """Config text could not be parsed or has the wrong structure."""


class ValidationError(ConfigError):
    """A parameter violates one of its invariants."""


def _positive(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (math.isfinite(value) and value > 0):
            raise ValidationError(f"{name} must be > 0 (got {value!r})")


def _nonnegative(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (math.isfinite(value) and value >= 0):
            raise ValidationError(f"{name} must be >= 0 (got {value!r})")


@dataclass(frozen=True)
class RobotParams:
    """Chassis geometry and mass properties.

    Wheel angles are kept in degrees as given; ``wheel_angles`` exposes them
    in radians.
    """

    mass_M: float = 1.5
    inertia_J: float = 0.0192
    wheel_offset_d: float = 0.07895
    wheel_angles_deg: tuple[float, float, float, float] = (33.0, 147.0, 225.0, 315.0)
    wheel_radius_r: float = 0.0254
    gear_ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "wheel_angles_deg", tuple(float(a) for a in self.wheel_angles_deg))
        _positive(self, "mass_M", "inertia_J", "wheel_offset_d", "wheel_radius_r", "gear_ratio")
        if len(self.wheel_angles_deg) != 4:
            raise ValidationError(
                f"wheel_angles must hold exactly 4 angles (got {len(self.wheel_angles_deg)})")
        if not all(math.isfinite(a) for a in self.wheel_angles_deg):
            raise ValidationError("wheel_angles must be finite")

    @property
    def wheel_angles(self) -> np.ndarray:
        return np.array([a * math.pi / 180.0 for a in self.wheel_angles_deg])


def derive_motor_constants(a, b):
    """Split the lumped constants ``a = km/R`` and ``b = km/(R kn)``.

    Uses the ideal-motor identity ``km * kn = 1`` (SI units) to separate the
    torque constant from the coil resistance.

    Returns ``(kn, km, R)`` in rad/(s V), N m/A and ohm.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"motor constants must be positive (a={a!r}, b={b!r})")
    kn = a / b
    km = b / a
    R = km / a
    return kn, km, R


@dataclass(frozen=True)
class MotorParams:
    supply_Vcc: float = 14.8
    torque_per_volt_a: float = 0.02125
    damping_b: float = 0.0005426

    def __post_init__(self):
        _positive(self, "supply_Vcc", "torque_per_volt_a", "damping_b")

    @property
    def speed_constant_kn(self) -> float:
        return derive_motor_constants(self.torque_per_volt_a, self.damping_b)[0]

    @property
    def torque_constant_km(self) -> float:
        return derive_motor_constants(self.torque_per_volt_a, self.damping_b)[1]

    @property
    def resistance_R(self) -> float:
        return derive_motor_constants(self.torque_per_volt_a, self.damping_b)[2]

    @property
    def stall_torque(self) -> float:
        return self.torque_per_volt_a * self.supply_Vcc

    @property
    def no_load_speed(self) -> float:
        return self.torque_per_volt_a * self.supply_Vcc / self.damping_b


@dataclass(frozen=True)
class SurfaceParams:
    """Floor friction. ``mu_linear`` yields a deceleration ``mu * g``; the
    rotational coefficient yields a torque ``mu_rot * M * g * d``."""

    name: str = "floor"
    mu_linear: float = 0.3
    mu_rotational: float = 0.3
    gravity_g: float = 9.81
    regularization_eps: float = 1e-3
    regularization_eps_rot: float = 1e-2

    def __post_init__(self):
        _nonnegative(self, "mu_linear", "mu_rotational")
        _positive(self, "gravity_g", "regularization_eps", "regularization_eps_rot")


@dataclass(frozen=True)
class LoopRates:
    control_hz: float = 600.0
    physics_substeps: int = 10
    pose_hz: float = 50.0

    def __post_init__(self):
        _positive(self, "control_hz", "pose_hz")
        if isinstance(self.physics_substeps, bool) or int(self.physics_substeps) != self.physics_substeps \
                or self.physics_substeps < 1:
            raise ValidationError(f"physics_substeps must be an integer >= 1 (got {self.physics_substeps!r})")
        object.__setattr__(self, "physics_substeps", int(self.physics_substeps))

    @property
    def control_dt(self) -> float:
        return 1.0 / self.control_hz


@dataclass(frozen=True)
class ControllerParams:
    """Gains and filter settings shared by every wheel controller."""

    kp: float = 0.05656854249492381
    ki: float = 0.0002
    fir_taps: int = 8
    fir_coefficients: tuple[float, ...] | None = None
    anti_windup: bool = True
    omega_clamp_fraction: float = 0.95
    encoder_cpr: int = 360
    converter: str = "inverse"

    def __post_init__(self):
        _nonnegative(self, "kp", "ki")
        if self.converter not in ("inverse", "ratio"):
            raise ValidationError(f"converter must be 'inverse' or 'ratio' (got {self.converter!r})")
        if self.fir_coefficients is not None:
            object.__setattr__(self, "fir_coefficients", tuple(float(c) for c in self.fir_coefficients))
            object.__setattr__(self, "fir_taps", len(self.fir_coefficients))
        if int(self.fir_taps) != self.fir_taps or self.fir_taps < 1:
            raise ValidationError(f"fir_taps must be an integer >= 1 (got {self.fir_taps!r})")
        if not 0 < self.omega_clamp_fraction < 1:
            raise ValidationError("omega_clamp_fraction must lie in (0, 1)")
        if int(self.encoder_cpr) != self.encoder_cpr or self.encoder_cpr < 1:
            raise ValidationError(f"encoder_cpr must be an integer > 0 (got {self.encoder_cpr!r})")

    def coefficients(self) -> np.ndarray:
        if self.fir_coefficients is not None:
            return np.array(self.fir_coefficients)
        return np.full(int(self.fir_taps), 1.0 / self.fir_taps)


# Preset test cases: (theta0 [deg], peak speed [m/s], acceleration [m/s^2]).
PRESET_CASES = {
    "1": (90.0, 2.0, 3.0),
    "2": (90.0, 1.5, 2.0),
    "3": (45.0, 0.8, 1.0),
    "4": (0.0, 0.8, 1.0),
}
DEFAULT_CRUISE = 2.0


def preset_case(number, cruise_duration=DEFAULT_CRUISE) -> ScenarioCase:
    theta0_deg, v_peak, accel = PRESET_CASES[str(number)]
    return ScenarioCase(theta0_deg, TrapezoidProfile(v_peak, accel, cruise_duration), name=str(number))


@dataclass(frozen=True)
class ParamsBundle:
    robot: RobotParams = field(default_factory=RobotParams)
    motor: MotorParams = field(default_factory=MotorParams)
    surfaces: tuple[SurfaceParams, ...] = ()
    loop: LoopRates = field(default_factory=LoopRates)
    controller: ControllerParams = field(default_factory=ControllerParams)
    cases: tuple[ScenarioCase, ...] = ()

    def __iter__(self):
        # unpacks as (robot, motor, surfaces, loop)
        return iter((self.robot, self.motor, list(self.surfaces), self.loop))

    @property
    def surface_names(self) -> list[str]:
        return [s.name for s in self.surfaces]

    def surface(self, name) -> SurfaceParams:
        for s in self.surfaces:
            if s.name == name:
                return s
        raise KeyError(f"unknown surface {name!r}; available: {', '.join(self.surface_names)}")

    def case(self, name) -> ScenarioCase:
        for c in self.cases:
            if c.name == str(name):
                return c
        if str(name) in PRESET_CASES:
            return preset_case(name)
        known = sorted(set(PRESET_CASES) | {c.name for c in self.cases})
        raise KeyError(f"unknown case {name!r}; available: {', '.join(known)}")


_SECTION_KEYS = {
    "robot": {"mass_M", "inertia_J", "wheel_offset_d", "wheel_angles", "wheel_radius_r", "gear_ratio"},
    "motor": {"supply_Vcc", "torque_per_volt_a", "damping_b"},
    "surface": {"mu_linear", "mu_rotational", "gravity_g", "regularization_eps", "regularization_eps_rot"},
    "loop": {"control_hz", "physics_substeps", "pose_hz"},
    "controller": {"kp", "ki", "fir_taps", "fir_coefficients", "anti_windup", "omega_clamp_fraction",
                   "encoder_cpr", "converter"},
    "case": {"theta0", "v_peak", "accel", "cruise_duration", "heading"},
}


def _check_keys(table, kind, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    unknown = set(table) - _SECTION_KEYS[kind]
    if unknown:
        raise ConfigError(f"[{where}] has unknown key(s): {', '.join(sorted(unknown))}")


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"[{where}] {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def load_params(config_source: str | None = None) -> ParamsBundle:
    """Parse and validate config text. ``None`` loads the shipped defaults.

    Missing keys fall back to the dataclass defaults; at least one surface is
    required.
    """
    if config_source is None:
        config_source = default_config_text()
    try:
        doc = tomllib.loads(config_source)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    unknown = set(doc) - {"robot", "motor", "surfaces", "loop", "controller", "cases"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    robot_doc = dict(doc.get("robot", {}))
    _check_keys(robot_doc, "robot", "robot")
    if "wheel_angles" in robot_doc:
        robot_doc["wheel_angles_deg"] = tuple(robot_doc.pop("wheel_angles"))
    robot = _build(RobotParams, robot_doc, "robot")

    motor_doc = doc.get("motor", {})
    _check_keys(motor_doc, "motor", "motor")
    motor = _build(MotorParams, motor_doc, "motor")

    surfaces_doc = doc.get("surfaces", {})
    if not isinstance(surfaces_doc, dict) or not surfaces_doc:
        raise ConfigError("at least one [surfaces.<name>] section is required")
    surfaces = []
    for name, table in surfaces_doc.items():
        _check_keys(table, "surface", f"surfaces.{name}")
        if "mu_linear" not in table:
            raise ConfigError(f"[surfaces.{name}] missing required key mu_linear")
        table = dict(table)
        table.setdefault("mu_rotational", table["mu_linear"])
        surfaces.append(_build(SurfaceParams, {"name": name, **table}, f"surfaces.{name}"))

    loop_doc = doc.get("loop", {})
    _check_keys(loop_doc, "loop", "loop")
    loop = _build(LoopRates, loop_doc, "loop")

    ctrl_doc = doc.get("controller", {})
    _check_keys(ctrl_doc, "controller", "controller")
    controller = _build(ControllerParams, ctrl_doc, "controller")

    cases = []
    for name, table in doc.get("cases", {}).items():
        _check_keys(table, "case", f"cases.{name}")
        missing = {"v_peak", "accel"} - set(table)
        if missing:
            raise ConfigError(f"[cases.{name}] missing required key(s): {', '.join(sorted(missing))}")
        try:
            profile = TrapezoidProfile(table["v_peak"], table["accel"],
                                       table.get("cruise_duration", DEFAULT_CRUISE))
            case = ScenarioCase(float(table.get("theta0", 0.0)), profile,
                                heading_deg=float(table.get("heading", 0.0)), name=name)
        except ValueError as exc:
            raise ValidationError(f"[cases.{name}] {exc}") from None
        cases.append(case)

    return ParamsBundle(robot, motor, tuple(surfaces), loop, controller, tuple(cases))


def read_params(path) -> ParamsBundle:
    return load_params(Path(path).read_text())


def default_config_text() -> str:
    return resources.files("omnisim").joinpath("default.toml").read_text()


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return "[" + ", ".join(_fmt(v) for v in value) + "]"


def dump_params(bundle: ParamsBundle) -> str:
    """Serialize a bundle to config text that reloads to identical values."""
    lines = ["[robot]"]
    for f in fields(RobotParams):
        value = getattr(bundle.robot, f.name)
        key = "wheel_angles" if f.name == "wheel_angles_deg" else f.name
        lines.append(f"{key} = {_fmt(value)}")
    lines += ["", "[motor]"]
    lines += [f"{f.name} = {_fmt(getattr(bundle.motor, f.name))}" for f in fields(MotorParams)]
    for s in bundle.surfaces:
        lines += ["", f"[surfaces.{s.name}]"]
        lines += [f"{f.name} = {_fmt(getattr(s, f.name))}" for f in fields(SurfaceParams) if f.name != "name"]
    lines += ["", "[loop]"]
    lines += [f"{f.name} = {_fmt(getattr(bundle.loop, f.name))}" for f in fields(LoopRates)]
    lines += ["", "[controller]"]
    for f in fields(ControllerParams):
        value = getattr(bundle.controller, f.name)
        if value is not None:
            lines.append(f"{f.name} = {_fmt(value)}")
    for c in bundle.cases:
        lines += ["", f"[cases.{c.name}]",
                  f"theta0 = {_fmt(c.theta0_deg)}",
                  f"v_peak = {_fmt(c.profile.v_peak)}",
                  f"accel = {_fmt(c.profile.accel)}",
                  f"cruise_duration = {_fmt(c.profile.cruise_duration)}",
                  f"heading = {_fmt(c.heading_deg)}"]
    return "\n".join(lines) + "\n"
