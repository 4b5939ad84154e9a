"""Rigid-body chassis dynamics driven by the four wheel torques.

The state carries the world pose and the body-frame twist.  Wheel forces and
friction act in the body frame; the pose rate is the body velocity rotated
into the world.  Coulomb friction is smoothed with ``tanh`` so the right-hand
side stays differentiable for RK4.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from omnisim.kinematics import coupling_matrix

STATE_FIELDS = ("x", "y", "theta", "vx_b", "vy_b", "omega")


class IntegrationDiverged(ArithmeticError):
    def __init__(self, field, tick=None):
        self.field = field
        self.tick = tick
        where = f" at tick {tick}" if tick is not None else ""
        super().__init__(f"integration diverged{where}: {field} is not finite")


@dataclass(frozen=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    vx_b: float = 0.0
    vy_b: float = 0.0
    omega: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))

    @property
    def world_velocity(self) -> tuple[float, float]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return c * self.vx_b - s * self.vy_b, s * self.vx_b + c * self.vy_b

    def kinetic_energy(self, robot) -> float:
        return 0.5 * robot.mass_M * (self.vx_b ** 2 + self.vy_b ** 2) + 0.5 * robot.inertia_J * self.omega ** 2


@dataclass(frozen=True)
class StateDerivative:
    x: float
    y: float
    theta: float
    vx_b: float
    vy_b: float
    omega: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))


def _friction_constants(surface, robot):
    return (
        surface.mu_linear * surface.gravity_g,
        surface.regularization_eps,
        surface.mu_rotational * robot.mass_M * surface.gravity_g * robot.wheel_offset_d,
        surface.regularization_eps_rot,
    )


def _linear_friction_gain(vx, vy, mug, eps):
    # tanh(|v|/eps)/|v|, with its limit 1/eps at the origin
    speed = math.hypot(vx, vy)
    if speed < 1e-9 * eps:
        return mug / eps
    return mug * math.tanh(speed / eps) / speed


def friction_wrench(state, surface, robot):
    """Friction as ``(ax, ay, torque)``: body-frame deceleration in m/s^2 and
    the traction torque in N m, each opposing the current motion."""
    mug, eps, rot, eps_rot = _friction_constants(surface, robot)
    k = _linear_friction_gain(state.vx_b, state.vy_b, mug, eps)
    return -k * state.vx_b, -k * state.vy_b, -rot * math.tanh(state.omega / eps_rot)


def wheel_wrench(wheel_torques, robot, coupling=None):
    """Body accelerations ``(ax, ay, omega_dot)`` produced by motor shaft torques."""
    G = coupling_matrix(robot) if coupling is None else coupling
    forces = robot.gear_ratio * np.asarray(wheel_torques, dtype=float) / robot.wheel_radius_r
    fx, fy, tz = G @ forces
    return fx / robot.mass_M, fy / robot.mass_M, tz / robot.inertia_J


def _rhs(s, ax, ay, wd, mug, eps, rot_acc, eps_rot):
    # s = (x, y, theta, vx, vy, omega, sx, sy, sth); the last three integrate the body twist
    th, vx, vy, w = s[2], s[3], s[4], s[5]
    c, sn = math.cos(th), math.sin(th)
    k = _linear_friction_gain(vx, vy, mug, eps)
    return (
        c * vx - sn * vy,
        sn * vx + c * vy,
        w,
        ax - k * vx + w * vy,
        ay - k * vy - w * vx,
        wd - rot_acc * math.tanh(w / eps_rot),
        vx,
        vy,
        w,
    )


def _integrate(s, accel, h, n, consts):
    ax, ay, wd = accel
    mug, eps, rot_acc, eps_rot = consts
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(n):
        k1 = _rhs(s, ax, ay, wd, mug, eps, rot_acc, eps_rot)
        s2 = tuple(si + half * ki for si, ki in zip(s, k1))
        k2 = _rhs(s2, ax, ay, wd, mug, eps, rot_acc, eps_rot)
        s3 = tuple(si + half * ki for si, ki in zip(s, k2))
        k3 = _rhs(s3, ax, ay, wd, mug, eps, rot_acc, eps_rot)
        s4 = tuple(si + h * ki for si, ki in zip(s, k3))
        k4 = _rhs(s4, ax, ay, wd, mug, eps, rot_acc, eps_rot)
        s = tuple(si + sixth * (a + 2.0 * b + 2.0 * c + d)
                  for si, a, b, c, d in zip(s, k1, k2, k3, k4))
    return s


def _check_finite(s, tick=None):
    for name, value in zip(STATE_FIELDS, s):
        if not math.isfinite(value):
            raise IntegrationDiverged(name, tick)


def state_derivative(state, wheel_torques, robot, surface, coupling=None) -> StateDerivative:
    """Time derivative of ``state`` under the given motor shaft torques."""
    consts = _friction_constants(surface, robot)
    consts = consts[:2] + (consts[2] / robot.inertia_J,) + consts[3:]
    accel = wheel_wrench(wheel_torques, robot, coupling)
    d = _rhs(astuple(state) + (0.0, 0.0, 0.0), *accel, *consts)
    return StateDerivative(*d[:6])


class Plant:
    """Fixed-step RK4 integrator for one robot on one surface.

    Also tracks the body-frame displacement so wheel rotation over a step can
    be recovered exactly for the encoders.
    """

    def __init__(self, robot, surface, coupling=None):
        self.robot = robot
        self.surface = surface
        self.coupling = coupling_matrix(robot) if coupling is None else coupling
        mug, eps, rot, eps_rot = _friction_constants(surface, robot)
        self._consts = (mug, eps, rot / robot.inertia_J, eps_rot)

    def step(self, state, wheel_torques, dt, substeps=1, tick=None):
        """Advance by ``dt`` holding ``wheel_torques`` constant.

        Returns ``(new_state, (dx_b, dy_b, dtheta))`` where the second item
        is the body-frame displacement accumulated over the step.
        """
        if not dt > 0:
            raise ValueError("dt must be > 0")
        if substeps < 1:
            raise ValueError("substeps must be >= 1")
        accel = wheel_wrench(wheel_torques, self.robot, self.coupling)
        for name, value in zip(("vx_b", "vy_b", "omega"), accel):
            if not math.isfinite(value):
                raise IntegrationDiverged(name, tick)
        s0 = astuple(state) + (0.0, 0.0, 0.0)
        try:
            s = _integrate(s0, accel, dt / substeps, int(substeps), self._consts)
        except (ValueError, OverflowError):
            # math.cos/sin reject an infinite heading
            raise IntegrationDiverged("theta", tick) from None
        _check_finite(s, tick)
        return RobotState(*s[:6]), s[6:]


def rk4_step(state, wheel_torques_held, dt, substeps, robot, surface, coupling=None) -> RobotState:
    """Classical RK4 over ``dt`` split into ``substeps`` equal steps (zero-order-hold torques).

    Raises :class:`IntegrationDiverged` if the result is not finite; the input
    state is never modified.
    """
    return Plant(robot, surface, coupling).step(state, wheel_torques_held, dt, substeps)[0]

