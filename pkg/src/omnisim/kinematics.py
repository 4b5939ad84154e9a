"""Wheel/body coupling of the four-wheel omni base and trapezoidal speed profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Twist:
    """Planar body velocity (vx, vy in m/s, omega in rad/s)."""

    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.vx, self.vy, self.omega)):
            raise ValueError("twist components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.omega])


def coupling_matrix(robot) -> np.ndarray:
    """3x4 matrix mapping wheel drive forces to body force and torque.

    Column i is ``(-sin a_i, cos a_i, d)``: the drive direction of wheel i in
    the body frame plus its moment arm.  Absolute angles reproduce the
    explicit-sign form written with acute reference angles.
    """
    angles = robot.wheel_angles
    G = np.empty((3, 4))
    G[0] = -np.sin(angles)
    G[1] = np.cos(angles)
    G[2] = robot.wheel_offset_d
    return G


def wheel_speeds_from_twist(v, robot) -> np.ndarray:
    """Inverse kinematics: wheel angular speeds (rad/s, wheel side) for a body twist.

    ``w_i = (-sin a_i * vx + cos a_i * vy + d * omega) / r``.  Multiply by
    ``robot.gear_ratio`` for motor shaft speed.
    """
    if isinstance(v, Twist):
        v = v.as_array()
    return coupling_matrix(robot).T @ np.asarray(v, dtype=float) / robot.wheel_radius_r


@dataclass(frozen=True)
class TrapezoidProfile:
    v_peak: float
    accel: float
    cruise_duration: float = 2.0

    def __post_init__(self):
        if not self.v_peak > 0:
            raise ValueError(f"v_peak must be > 0 (got {self.v_peak!r})")
        if not self.accel > 0:
            raise ValueError(f"accel must be > 0 (got {self.accel!r})")
        if not self.cruise_duration >= 0:
            raise ValueError(f"cruise_duration must be >= 0 (got {self.cruise_duration!r})")

    @property
    def ramp_duration(self) -> float:
        return self.v_peak / self.accel

    @property
    def duration(self) -> float:
        return 2.0 * self.v_peak / self.accel + self.cruise_duration

    @property
    def distance(self) -> float:
        return self.v_peak * (self.cruise_duration + self.v_peak / self.accel)


def trapezoid_speed(profile: TrapezoidProfile, t: float) -> float:
    """Speed along the profile at time ``t``; zero before 0 and after the end."""
    ramp = profile.ramp_duration
    cruise_end = ramp + profile.cruise_duration
    if t <= 0.0 or t >= profile.duration:
        return 0.0
    if t < ramp:
        return profile.accel * t
    if t <= cruise_end:
        return profile.v_peak
    return max(0.0, profile.v_peak - profile.accel * (t - cruise_end))


@dataclass(frozen=True)
class ScenarioCase:
    """Initial orientation plus a trapezoidal speed along a body-frame heading.

    Angles are stored in degrees (as configured); ``theta0`` and ``heading``
    give radians and a unit vector.
    """

    theta0_deg: float
    profile: TrapezoidProfile
    heading_deg: float = 0.0
    name: str = "custom"

    @property
    def theta0(self) -> float:
        return self.theta0_deg * math.pi / 180.0

    @property
    def heading(self) -> tuple[float, float]:
        h = self.heading_deg * math.pi / 180.0
        return math.cos(h), math.sin(h)

    def twist(self, t) -> Twist:
        speed = trapezoid_speed(self.profile, t)
        hx, hy = self.heading
        return Twist(speed * hx, speed * hy, 0.0)


def case_wheel_profiles(case: ScenarioCase, robot, t: float) -> np.ndarray:
    """Desired wheel speeds (rad/s, wheel side) at time ``t``.

    Depends only on the body-frame profile; the initial orientation only
    changes the world-frame path.
    """
    return wheel_speeds_from_twist(case.twist(t), robot)
