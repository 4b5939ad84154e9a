"""One closed-loop run with the torque controller, summarised from the log.

Run: python demos/03_closed_loop_run.py
"""
import numpy as np

from omnisim import Scenario, load_params, preset_case, run_scenario

bundle = load_params()
case = preset_case(1)
log = run_scenario(Scenario(case, "carpet1", "torque"), bundle)

t0, t1 = log.cruise_window()
print(f"case 1 on carpet1: {log.ticks} control ticks, cruise window {t0:.3f}-{t1:.3f} s")
print(f"whole-run tracking RMS {log.tracking_rms():.4f} rad/s, cruise {log.cruise_rms():.4f} rad/s")
print("per-wheel cruise RMS:", np.round(log.cruise_rms(per_wheel=True), 4))

for t in (0.2, 0.6, 1.5, 3.0, 3.8):
    j = int(round(t * 600))
    print(f"t={t:3.1f}s  desired {np.round(log.desired_omega[j], 2)}  true {np.round(log.true_omega[j], 2)}  "
          f"duty {np.round(log.duty[j], 3)}")

x, y, th = log.pose[-1]
print(f"\nfinal pose x={x:.4f} m, y={y:.4f} m, theta={np.degrees(th):.2f} deg "
      f"(commanded travel {case.profile.distance:.3f} m along +y)")
