"""Replay each preset case on three carpets with both controllers and compare paths.

Run: python demos/04_surface_comparison.py   (about 15 s)
"""
from omnisim import compare_surfaces, load_params, preset_case

bundle = load_params()
surfaces = [s.name for s in bundle.surfaces]
gains = (bundle.controller.kp, bundle.controller.ki)
print(f"surfaces {surfaces}, shared gains kp={gains[0]:.5g} ki={gains[1]:.5g}\n")

for n in "1234":
    case = preset_case(n)
    reps = {k: compare_surfaces(case, k, gains, surfaces, bundle) for k in ("torque", "pi")}
    t, p = reps["torque"].max_deviation, reps["pi"].max_deviation
    print(f"case {n}: worst cross-surface path RMS deviation torque {t * 1000:6.1f} mm, "
          f"plain PI {p * 1000:6.1f} mm (ratio {p / t:.2f})")
    for k, rep in reps.items():
        ends = "  ".join(f"{name}=({x:.3f}, {y:.3f})" for name, (x, y, _) in rep.final_poses.items())
        print(f"    {k:6s} end points {ends}")

# Back-EMF compensation means a friction change shows up as a smaller speed error,
# so the torque controller's paths stay closer together.
