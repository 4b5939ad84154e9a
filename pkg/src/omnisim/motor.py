"""Brushless motor torque law, its power balance, and encoder speed sampling.

Every function here works on the motor shaft side; gear reduction is applied
by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


def torque_from_duty(duty, motor_omega, m):
    """Shaft torque for a PWM duty in [-1, 1] at shaft speed ``motor_omega``.

    ``tau = a * duty * Vcc - b * omega`` with ``a = km/R`` and
    ``b = km/(R kn)``.  Works elementwise on numpy arrays.
    """
    return m.torque_per_volt_a * (duty * m.supply_Vcc) - m.damping_b * motor_omega


def torque_from_voltage(u, motor_omega, m):
    return m.torque_per_volt_a * u - m.damping_b * motor_omega


def energy_balance_residual(u, motor_omega, m):
    """Electrical input minus (mechanical output + copper loss), in watts.

    Zero up to rounding whenever the torque law holds, since with
    ``km * kn = 1`` it is the same relation multiplied through by current.
    """
    km = m.torque_constant_km
    R = m.resistance_R
    tau = torque_from_voltage(u, motor_omega, m)
    i = tau / km
    return u * i - (motor_omega * tau + i * i * R)


def power_terms(u, motor_omega, m):
    """(electrical, mechanical, copper loss) power in watts."""
    tau = torque_from_voltage(u, motor_omega, m)
    i = tau / m.torque_constant_km
    return u * i, motor_omega * tau, i * i * m.resistance_R


@dataclass
class Encoder:
    """Incremental encoder sampled once per control tick.

    Shaft angle accumulates into ``residual_angle``; whole counts are taken
    out (truncated toward zero) and the remainder carried to the next sample,
    so no angle is ever lost.  Count quantization is the only measurement
    noise.
    """

    counts_per_rev: int = 360
    residual_angle: float = 0.0
    last_measured: float = 0.0
    total_counts: int = 0

    def __post_init__(self):
        if self.counts_per_rev <= 0:
            raise ValueError("counts_per_rev must be > 0")

    @property
    def count_angle(self) -> float:
        return 2.0 * math.pi / self.counts_per_rev

    def advance(self, delta_angle, dt):
        """Accumulate a shaft rotation over ``dt`` seconds and return the speed estimate."""
        if not dt > 0:
            raise ValueError("dt must be > 0")
        step = self.count_angle
        self.residual_angle += delta_angle
        q = self.residual_angle / step
        counts = math.trunc(q)
        nearest = round(q)
        # rounding can leave a whole count a few ulps short
        if nearest != counts and abs(q - nearest) < 1e-9:
            counts = nearest
        self.residual_angle -= counts * step
        self.total_counts += counts
        self.last_measured = counts * step / dt
        return self.last_measured

    def measure(self, true_motor_omega, dt):
        return self.advance(true_motor_omega * dt, dt)


def encoder_measure(state: Encoder, true_motor_omega, dt):
    """Advance ``state`` in place by ``true_motor_omega * dt``; returns ``(state, measured)``."""
    measured = state.measure(true_motor_omega, dt)
    return state, measured
