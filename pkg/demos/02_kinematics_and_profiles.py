"""Wheel coupling and the four preset speed profiles.

Run: python demos/02_kinematics_and_profiles.py
"""
import numpy as np

from omnisim import Twist, coupling_matrix, load_params, preset_case, wheel_speeds_from_twist
from omnisim.kinematics import case_wheel_profiles

robot = load_params().robot
np.set_printoptions(precision=4, suppress=True)

print("coupling matrix G (rows: fx, fy, torque per unit wheel force)")
print(coupling_matrix(robot))

for twist in (Twist(1, 0, 0), Twist(0, 1, 0), Twist(0, 0, 1)):
    print(f"{twist} -> wheel speeds {wheel_speeds_from_twist(twist, robot)} rad/s")

# The front pair sits closer to the x axis, so driving along x loads wheels 3 and 4 harder.
print("\npreset cases: theta0, peak, accel, duration, peak |wheel speed|")
for n in "1234":
    case = preset_case(n)
    p = case.profile
    t = np.linspace(0, p.duration, 2001)
    speeds = np.array([case_wheel_profiles(case, robot, ti) for ti in t])
    print(f"  case {n}: {case.theta0_deg:5.1f} deg  {p.v_peak:.1f} m/s  {p.accel:.1f} m/s^2  "
          f"{p.duration:.3f} s  {np.abs(speeds).max(axis=0)}")
print("cases 3 and 4 share the body-frame profile; only the starting orientation differs")
