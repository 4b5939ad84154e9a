"""Motor model walkthrough: torque-speed line, power bookkeeping, encoder quantization.

Run: python demos/01_motor_model.py
"""
import numpy as np

from omnisim import Encoder, load_params, torque_from_duty
from omnisim.motor import power_terms

motor = load_params().motor

print(f"derived constants: kn={motor.speed_constant_kn:.3f} rad/(s V), km={motor.torque_constant_km:.6f} N m/A, "
      f"R={motor.resistance_R:.4f} ohm")
print(f"stall torque {motor.stall_torque:.5f} N m, no-load speed {motor.no_load_speed:.2f} rad/s\n")

# Torque falls linearly with speed; lower duty shifts the line down.
print("duty   omega=0    omega=200  omega=400 (N m)")
for duty in (1.0, 0.5, 0.25):
    row = [torque_from_duty(duty, w, motor) for w in (0.0, 200.0, 400.0)]
    print(f"{duty:4.2f}  " + "  ".join(f"{t:9.5f}" for t in row))

# Electrical power splits exactly into shaft power plus copper loss.
elec, mech, loss = power_terms(motor.supply_Vcc, 100.0, motor)
print(f"\nat full voltage and 100 rad/s: {elec:.4f} W in = {mech:.4f} W shaft + {loss:.4f} W heat")

# A 360-count encoder sampled at 600 Hz resolves speed in steps of 2*pi/360*600 ~ 10.47 rad/s.
enc = Encoder(360)
readings = [enc.measure(30.0, 1 / 600) for _ in range(12)]
print("\nencoder readings for a steady 30 rad/s:", np.round(readings, 2))
print(f"mean {np.mean(readings):.3f} rad/s; the 8-tap filter in the controller averages this chatter")
