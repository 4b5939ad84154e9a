"""Per-wheel discrete speed controllers running at the control rate.

Two variants share the same front end (FIR-filtered encoder speed, PI law):

* ``TORQUE``: the PI output is a torque demand, converted to a PWM duty
  through the motor torque law at the filtered speed.
* ``PLAIN_PI``: the PI output is used as the duty directly.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class ControllerKind(enum.Enum):
    TORQUE = "torque"
    PLAIN_PI = "pi"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        aliases = {"torque": cls.TORQUE, "tc": cls.TORQUE, "pi": cls.PLAIN_PI, "plain": cls.PLAIN_PI,
                   "plain_pi": cls.PLAIN_PI}
        try:
            return aliases[str(text).lower()]
        except KeyError:
            raise ValueError(f"unknown controller kind {text!r}; use 'torque' or 'pi'") from None


class FIRFilter:
    """Moving FIR filter with zero-initialized history.

    Coefficients are normalized to unity DC gain.  The default is an 8-tap
    boxcar, whose first null sits at 600/8 = 75 Hz for a 600 Hz loop.
    """

    def __init__(self, coefficients=None, taps=8):
        if coefficients is None:
            coefficients = [1.0 / taps] * taps
        c = [float(v) for v in coefficients]
        total = math.fsum(c)
        if not c or total == 0:
            raise ValueError("FIR coefficients must have a nonzero sum")
        if total != 1.0:
            c = [v / total for v in c]
        self.coefficients = tuple(c)
        self.history = deque([0.0] * len(c), maxlen=len(c))

    def step(self, sample):
        self.history.appendleft(float(sample))
        return math.fsum(ck * hk for ck, hk in zip(self.coefficients, self.history))

    def reset(self):
        self.history.extend([0.0] * len(self.coefficients))


def fir_step(state: FIRFilter, sample):
    out = state.step(sample)
    return state, out


@dataclass
class PIState:
    """Discrete PI law ``out = kp * err + ki * sum(err)``.

    The running sum is per-sample (no dt factor).  With ``anti_windup`` on,
    the sum is frozen while the actuator saturated on the previous tick in
    the direction the new error would push further.
    """

    kp: float = 0.0
    ki: float = 0.0
    error_sum: float = 0.0
    anti_windup: bool = True
    saturation: int = 0

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0:
            raise ValueError("PI gains must be >= 0")

    def step(self, err):
        if not (self.anti_windup and self.saturation and err * self.saturation > 0):
            self.error_sum += err
        return self.kp * err + self.ki * self.error_sum


def pi_step(state: PIState, err):
    out = state.step(err)
    return state, out


def torque_to_duty(tau_d, filtered_omega_motor, m, mode="inverse", clamp_fraction=0.95):
    """PWM duty in [-1, 1] that makes the motor deliver ``tau_d``.

    ``mode="inverse"`` solves the motor torque law exactly for the duty,
    ``(tau_d + b * omega) / (a * Vcc)``.  ``mode="ratio"`` divides the demand
    by the torque available at full duty, ``tau_d / (a Vcc - b |omega|)``,
    with ``|omega|`` clamped to ``clamp_fraction`` of the no-load speed so
    the denominator stays positive.  Either way the result is saturated.
    """
    return float(np.clip(_raw_duty(tau_d, filtered_omega_motor, m, mode, clamp_fraction), -1.0, 1.0))


def _raw_duty(tau_d, omega, m, mode, clamp_fraction):
    a_vcc = m.torque_per_volt_a * m.supply_Vcc
    if mode == "inverse":
        return (tau_d + m.damping_b * omega) / a_vcc
    if mode == "ratio":
        limit = clamp_fraction * m.no_load_speed
        w = min(abs(omega), limit)
        return tau_d / (a_vcc - m.damping_b * w)
    raise ValueError(f"unknown converter mode {mode!r}")


class Diagnostics(NamedTuple):
    err: float
    filtered_omega: float
    tau_d: float
    duty_unsaturated: float
    duty: float


class WheelController:
    """One wheel's speed loop: filter, PI, then torque conversion or direct duty."""

    def __init__(self, kind, kp, ki, motor, fir_coefficients=None, anti_windup=True,
                 converter="inverse", clamp_fraction=0.95):
        self.kind = ControllerKind.parse(kind)
        self.motor = motor
        self.fir = FIRFilter(fir_coefficients)
        self.pi = PIState(kp, ki, anti_windup=anti_windup)
        self.converter = converter
        self.clamp_fraction = clamp_fraction

    def step(self, desired_omega, raw_measured_omega):
        filtered = self.fir.step(raw_measured_omega)
        err = desired_omega - filtered
        out = self.pi.step(err)
        if self.kind is ControllerKind.TORQUE:
            raw = _raw_duty(out, filtered, self.motor, self.converter, self.clamp_fraction)
        else:
            raw = out
        duty = min(1.0, max(-1.0, raw))
        self.pi.saturation = 1 if raw > 1.0 else (-1 if raw < -1.0 else 0)
        return duty, Diagnostics(err, filtered, out, raw, duty)


def controller_step(kind, state: WheelController, desired_omega, raw_measured_omega):
    """Run one control tick; returns ``(state, duty, diagnostics)``."""
    if ControllerKind.parse(kind) is not state.kind:
        raise ValueError("controller state was built for a different kind")
    duty, diag = state.step(desired_omega, raw_measured_omega)
    return state, duty, diag
