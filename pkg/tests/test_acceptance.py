"""Acceptance criteria, one test each.  Each test records a PASS/FAIL line
(shown in the terminal summary) before asserting."""
import hashlib
import math
import time

import numpy as np
import pytest

from omnisim.cli import main
from omnisim.control import torque_to_duty
from omnisim.dynamics import RobotState, rk4_step
from omnisim.kinematics import Twist, coupling_matrix, wheel_speeds_from_twist
from omnisim.motor import energy_balance_residual, torque_from_duty
from omnisim.params import SurfaceParams, preset_case
from omnisim.sim import DEFAULT_TUNING_GRID, Scenario, compare_surfaces, run_scenario, tune_gains

SURFACES = ["carpet1", "carpet2", "carpet3"]


def test_surfaces_are_the_three_carpets(bundle):
    assert [bundle.surface(s).mu_linear for s in SURFACES] == [0.30, 0.45, 0.60]


@pytest.fixture(scope="module")
def tuned_gains(bundle):
    kp, ki, score = tune_gains(preset_case(1), "carpet1", "torque", DEFAULT_TUNING_GRID, bundle)
    print(f"tuned on carpet1 case 1: kp={kp!r} ki={ki!r} score={score:.5f} rad/s")
    return kp, ki


def test_c1_motor_anchors(motor, verdict):
    stall = 0.02125 * 14.8
    no_load = 14.8 * 0.02125 / 0.0005426
    s_err = abs(motor.stall_torque - stall) / stall
    n_err = abs(motor.no_load_speed - no_load) / no_load
    ok = s_err <= 1e-9 and n_err <= 1e-9 and round(stall, 5) == 0.31450 and round(no_load, 2) == 579.62
    assert verdict(1, ok, f"stall {motor.stall_torque:.5f} N m (rel err {s_err:.1e}), "
                          f"no-load {motor.no_load_speed:.2f} rad/s (rel err {n_err:.1e})")


def test_c2_energy_balance(motor, verdict):
    u = np.linspace(-motor.supply_Vcc, motor.supply_Vcc, 100)
    w = np.linspace(-motor.no_load_speed, motor.no_load_speed, 100)
    worst = max(abs(energy_balance_residual(ui, wi, motor)) for ui in u for wi in w)
    assert verdict(2, worst <= 1e-9, f"max |residual| {worst:.2e} W over 100x100 (u, omega) grid")


def test_c3_converter_inversion(motor, verdict):
    rng = np.random.default_rng(3)
    worst, n = 0.0, 0
    while n < 10_000:
        w = rng.uniform(-motor.no_load_speed, motor.no_load_speed)
        tau = rng.uniform(-0.4, 0.4)
        if tau == 0 or abs((tau + motor.damping_b * w) / (motor.torque_per_volt_a * motor.supply_Vcc)) >= 1:
            continue
        back = torque_from_duty(torque_to_duty(tau, w, motor), w, motor)
        worst = max(worst, abs(back - tau) / abs(tau))
        n += 1
    assert verdict(3, worst <= 1e-12, f"max rel error {worst:.2e} over {n} unsaturated cases")


def test_c4_kinematic_duality(robot, verdict):
    rng = np.random.default_rng(4)
    G = coupling_matrix(robot)
    worst = 0.0
    for _ in range(10_000):
        v = rng.uniform(-3, 3, 3)
        f = rng.uniform(-10, 10, 4)
        lhs = (G @ f) @ v
        rhs = f @ (robot.wheel_radius_r * wheel_speeds_from_twist(v, robot))
        worst = max(worst, abs(lhs - rhs) / (np.abs(f) @ (np.abs(G.T) @ np.abs(v))))
    speeds = wheel_speeds_from_twist(Twist(1.0, 0.0, 0.0), robot)
    target = np.array([-21.4425, -21.4425, 27.8388, 27.8388])
    vec_err = np.abs(speeds - target).max()
    ok = worst <= 1e-12 and vec_err <= 1e-4
    assert verdict(4, ok, f"duality rel err {worst:.1e}; unit-x wheel speeds "
                          f"{np.array2string(speeds, precision=4)} (max dev {vec_err:.1e})")


def test_c5_integrator_order(robot, verdict):
    start = RobotState(0.0, 0.0, 0.3, 0.6, 0.25, 1.0)
    torques = list(0.1 * np.array([-0.5446, -0.5446, 0.7071, 0.7071]) + 0.03)
    surface = SurfaceParams("carpet", mu_linear=0.3, mu_rotational=0.3)
    t0 = time.perf_counter()
    ref = rk4_step(start, torques, 1.0, 6400, robot, surface).as_array()
    errs = [np.linalg.norm(rk4_step(start, torques, 1.0, n, robot, surface).as_array() - ref) for n in (10, 20, 40)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    elapsed = time.perf_counter() - t0
    ok = all(3.7 <= p <= 4.3 for p in orders) and elapsed < 5
    assert verdict(5, ok, f"observed orders {', '.join(f'{p:.3f}' for p in orders)} ({elapsed:.2f} s)")


def test_c6_cruise_rms_spread(bundle, tuned_gains, verdict):
    case = preset_case(1)
    t0 = time.perf_counter()
    reps = {k: compare_surfaces(case, k, tuned_gains, SURFACES, bundle) for k in ("torque", "pi")}
    elapsed = time.perf_counter() - t0
    spread = {k: r.cruise_rms_spread for k, r in reps.items()}
    ratio = spread["pi"] / spread["torque"] if spread["torque"] > 0 else math.inf
    whole = {k: float(np.ptp(np.sqrt(np.mean(r.tracking_rms ** 2, axis=1)))) for k, r in reps.items()}
    print("cruise RMS per surface: " + "; ".join(
        f"{k} {np.array2string(r.cruise_rms, precision=4)}" for k, r in reps.items()))
    print(f"info: whole-run tracking RMS spread ratio pi/torque = {whole['pi'] / whole['torque']:.3f}")
    ok = ratio >= 2.0 and elapsed < 30
    assert verdict(6, ok, f"cruise RMS spread torque {spread['torque']:.4f} vs pi {spread['pi']:.4f} rad/s, "
                          f"ratio pi/torque {ratio:.3f} (need >= 2); six runs {elapsed:.1f} s")


def test_c7_path_deviation(bundle, tuned_gains, verdict):
    t0 = time.perf_counter()
    ratios, ok = {}, True
    for n in "1234":
        dev = {k: compare_surfaces(preset_case(n), k, tuned_gains, SURFACES, bundle).max_deviation
               for k in ("torque", "pi")}
        ratios[n] = dev["pi"] / dev["torque"] if dev["torque"] > 0 else math.inf
        ok &= dev["torque"] < dev["pi"]
        print(f"case {n}: max path deviation torque {dev['torque']:.5f} m, pi {dev['pi']:.5f} m")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    assert verdict(7, ok, "ratio pi/torque per case " + ", ".join(f"{n}: {r:.3f}" for n, r in ratios.items())
                   + f" (24 runs, {elapsed:.1f} s)")


def _pipeline(out):
    args = ["--case", "1", "--cruise", "0.5"]
    assert main(["profiles", "--out", str(out / "profiles"), *args]) == 0
    assert main(["run", "--out", str(out / "run"), *args]) == 0
    assert main(["compare", "--out", str(out / "compare"), *args]) == 0
    return {p.relative_to(out).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out.rglob("*")) if p.is_file()}


def test_c8_determinism(tmp_path, verdict):
    a, b = _pipeline(tmp_path / "a"), _pipeline(tmp_path / "b")
    csvs = [k for k in a if k.endswith(".csv")]
    ok = a == b and len(csvs) >= 8
    assert verdict(8, ok, f"{len(a)} files ({len(csvs)} CSVs) hash-identical across two pipeline runs")


def test_c9_open_loop_invariance(bundle, verdict):
    c3 = run_scenario(Scenario(preset_case(3), "carpet2", "torque"), bundle)
    c4 = run_scenario(Scenario(preset_case(4), "carpet2", "torque"), bundle)
    channels = ("desired_omega", "raw_omega", "filtered_omega", "err", "tau_d", "duty", "torque")
    same = all(np.array_equal(getattr(c3, k), getattr(c4, k)) for k in channels)
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rotated = c4.pose[:, :2] @ np.array([[c, s], [-s, c]])
    path_err = float(np.abs(rotated - c3.pose[:, :2]).max())
    ok = same and path_err <= 1e-9
    assert verdict(9, ok, f"wheel channels identical: {same}; max path deviation after 45 deg rotation {path_err:.1e} m")
