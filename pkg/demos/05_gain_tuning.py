"""Grid-search the shared PI gains on the low-friction carpet.

Run: python demos/05_gain_tuning.py          (coarse 3x3 grid, a few seconds)
     python demos/05_gain_tuning.py --full   (the 9x9 default grid, about a minute)
"""
import sys

from omnisim import GridSearch, Scenario, load_params, preset_case, run_scenario, tune_gains
from omnisim.sim import DEFAULT_TUNING_GRID

bundle = load_params()
case = preset_case(1)
if "--full" in sys.argv:
    grid = DEFAULT_TUNING_GRID
else:
    grid = GridSearch((0.02, 0.04, 0.08), (1e-4, 2e-4, 4e-4))

kp, ki, score = tune_gains(case, "carpet1", "torque", grid, bundle)
print(f"best of {len(grid.points())} points: kp={kp:.5g} ki={ki:.5g}, tracking RMS {score:.4f} rad/s")

# The same pair then drives both controllers on every surface.
for kind in ("torque", "pi"):
    for surface in ("carpet1", "carpet3"):
        log = run_scenario(Scenario(case, surface, kind, (kp, ki)), bundle)
        print(f"  {kind:6s} on {surface}: whole-run RMS {log.tracking_rms():.4f}, cruise {log.cruise_rms():.4f} rad/s")
