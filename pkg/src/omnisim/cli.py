"""Command line front end.

Exit codes: 0 success, 1 config or usage error, 2 simulation divergence.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

import numpy as np

from omnisim import __version__
from omnisim.control import ControllerKind
from omnisim.dynamics import IntegrationDiverged
from omnisim.kinematics import ScenarioCase, TrapezoidProfile, case_wheel_profiles
from omnisim.output import (fmt, write_json, write_kv, write_plot_stub, write_pose_csv, write_profiles_csv,
                            write_wheels_csv)
from omnisim.params import ConfigError, dump_params, load_params
from omnisim.sim import GridSearch, Scenario, compare_surfaces, run_scenario, tune_gains

ENV_PARAMS = "OMNISIM_PARAMS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    if any(not (v >= 0 and math.isfinite(v)) for v in values):
        raise argparse.ArgumentTypeError(f"gains must be finite and >= 0, got {text!r}")
    return values


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be > 0 (got {text})")
    return value


def _gains(text):
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError("--gains takes kp,ki")
    return tuple(values)


def _names(text):
    names = [v.strip() for v in text.split(",") if v.strip()]
    if not names:
        raise argparse.ArgumentTypeError("list must not be empty")
    return names


def build_parser():
    parser = _Parser(prog="omnisim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out=True):
        p.add_argument("--params", help=f"config file (default: ${ENV_PARAMS} or the shipped defaults)")
        p.add_argument("--case", default="1", help="preset 1..4 or a [cases.<name>] from the config")
        p.add_argument("--cruise", type=float, help="override the cruise duration in seconds")
        if out:
            p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("run", help="simulate one scenario")
    common(p)
    p.add_argument("--surface", default=None)
    p.add_argument("--controller", default="torque", choices=["torque", "pi"])
    p.add_argument("--gains", type=_gains, help="kp,ki (default: from the config)")
    p.add_argument("--duration", type=_positive)

    p = sub.add_parser("compare", help="replay a case on several surfaces")
    common(p)
    p.add_argument("--controller", default="both", choices=["both", "torque", "pi"])
    p.add_argument("--surfaces", type=_names, help="comma-separated surface names (default: all)")
    p.add_argument("--gains", type=_gains)
    p.add_argument("--duration", type=_positive)
    p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("tune", help="grid-search PI gains on one surface")
    common(p)
    p.add_argument("--surface", default=None)
    p.add_argument("--controller", default="torque", choices=["torque", "pi"])
    p.add_argument("--kp-grid", type=_float_list, required=True)
    p.add_argument("--ki-grid", type=_float_list, required=True)
    p.add_argument("--duration", type=_positive)
    p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("profiles", help="write the desired wheel speed profiles")
    common(p)

    p = sub.add_parser("validate", help="load and check a config")
    p.add_argument("--params")
    return parser


def _load(args):
    path = args.params or os.environ.get(ENV_PARAMS)
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read params file: {exc}") from None
        return load_params(text), str(path)
    return load_params(), "<defaults>"


def _case(args, bundle) -> ScenarioCase:
    try:
        case = bundle.case(args.case)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    if args.cruise is not None:
        p = case.profile
        try:
            case = dataclasses.replace(case, profile=TrapezoidProfile(p.v_peak, p.accel, args.cruise))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return case


def _surface(bundle, name):
    if name is None:
        return bundle.surfaces[0].name
    try:
        bundle.surface(name)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    return name


def _case_dict(case):
    return {
        "name": case.name,
        "theta0_deg": case.theta0_deg,
        "heading_deg": case.heading_deg,
        "v_peak": case.profile.v_peak,
        "accel": case.profile.accel,
        "cruise_duration": case.profile.cruise_duration,
        "profile_duration": case.profile.duration,
    }


def _out_dir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc}") from None
    return out


def _write_manifest(out, command, bundle, source, **extra):
    (out / "params.toml").write_text(dump_params(bundle))
    write_json(_manifest(command, bundle, source, **extra), out / "manifest.json")


def _finite_or_none(value):
    return value if math.isfinite(value) else None


def _manifest(command, bundle, source, **extra):
    return {
        "command": command,
        "omnisim_version": __version__,
        "params_source": source,
        "effective_params": dump_params(bundle),
        **extra,
    }


def cmd_run(args):
    bundle, source = _load(args)
    case = _case(args, bundle)
    surface = _surface(bundle, args.surface)
    gains = args.gains or (bundle.controller.kp, bundle.controller.ki)
    scenario = Scenario(case, surface, args.controller, gains, args.duration)
    out = _out_dir(args)
    log = run_scenario(scenario, bundle)
    write_wheels_csv(log, out / "wheels.csv")
    write_pose_csv(log, out / "pose.csv")
    _write_manifest(out, "run", bundle, source, case=_case_dict(case), surface=surface,
                    controller=scenario.controller.value, gains=list(gains),
                    duration=scenario.effective_duration(),
                    tracking_rms=log.tracking_rms(), cruise_rms=_finite_or_none(log.cruise_rms()),
                    final_pose=[log.final_state.x, log.final_state.y, log.final_state.theta])
    write_plot_stub(out)
    print(f"wrote {out}/wheels.csv, pose.csv, manifest.json "
          f"(tracking RMS {log.tracking_rms():.4g} rad/s, final pose "
          f"x={log.final_state.x:.4g} y={log.final_state.y:.4g})")
    return 0


def cmd_compare(args):
    bundle, source = _load(args)
    case = _case(args, bundle)
    surfaces = args.surfaces or bundle.surface_names
    if len(surfaces) < 2:
        raise ConfigError("need >= 2 surfaces to compare")
    for name in surfaces:
        _surface(bundle, name)
    kinds = ["torque", "pi"] if args.controller == "both" else [args.controller]
    gains = args.gains or (bundle.controller.kp, bundle.controller.ki)
    out = _out_dir(args)
    (out / "paths").mkdir(exist_ok=True)

    kv, lines, reports = [], [], {}
    lines.append(f"case {case.name}: theta0={case.theta0_deg:g} deg, v_peak={case.profile.v_peak:g} m/s, "
                 f"accel={case.profile.accel:g} m/s^2; gains kp={gains[0]:g} ki={gains[1]:g}")
    for kind in kinds:
        rep = compare_surfaces(case, kind, gains, surfaces, bundle, args.duration, args.workers)
        reports[kind] = rep
        for name, log in zip(surfaces, rep.logs):
            write_pose_csv(log, out / "paths" / f"{kind}_{name}.csv")
        for i, a in enumerate(surfaces):
            for j, b in enumerate(surfaces):
                kv.append((f"{kind}.deviation.{a}.{b}", rep.deviation[i, j]))
        for i, name in enumerate(surfaces):
            for w in range(4):
                kv.append((f"{kind}.tracking_rms.{name}.wheel{w + 1}", rep.tracking_rms[i, w]))
            kv.append((f"{kind}.cruise_rms.{name}", rep.cruise_rms[i]))
            fx, fy, fth = rep.final_poses[name]
            kv += [(f"{kind}.final.{name}.x", fx), (f"{kind}.final.{name}.y", fy),
                   (f"{kind}.final.{name}.theta", fth)]
        kv.append((f"{kind}.max_deviation", rep.max_deviation))
        kv.append((f"{kind}.cruise_rms_spread", rep.cruise_rms_spread))

        lines.append("")
        lines.append(f"[{kind}] path RMS deviation between surfaces (m)")
        width = max(len(s) for s in surfaces) + 2
        lines.append(" " * width + "".join(f"{s:>{width + 8}}" for s in surfaces))
        for i, a in enumerate(surfaces):
            lines.append(f"{a:<{width}}" + "".join(f"{rep.deviation[i, j]:>{width + 8}.5f}"
                                                   for j in range(len(surfaces))))
        lines.append(f"max deviation {rep.max_deviation:.5f} m; "
                     f"cruise RMS spread {rep.cruise_rms_spread:.5f} rad/s")
    if len(kinds) == 2:
        t, p = reports["torque"].max_deviation, reports["pi"].max_deviation
        ratio = p / t if t > 0 else math.inf
        verdict = "torque" if t < p else ("pi" if p < t else "tie")
        kv += [("verdict", verdict), ("deviation_ratio_pi_over_torque", ratio)]
        lines.append("")
        lines.append(f"verdict: {verdict} controller more surface-robust "
                     f"(max deviation torque {t:.5f} m vs pi {p:.5f} m, ratio {ratio:.3f})")
    write_kv(kv, out / "report.kv")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    _write_manifest(out, "compare", bundle, source, case=_case_dict(case), surfaces=surfaces,
                    controllers=kinds, gains=list(gains),
                    duration=Scenario(case, surfaces[0], "torque", gains, args.duration).effective_duration())
    write_plot_stub(out)
    print("\n".join(lines))
    return 0


def cmd_tune(args):
    bundle, source = _load(args)
    case = _case(args, bundle)
    surface = _surface(bundle, args.surface)
    grid = GridSearch(tuple(args.kp_grid), tuple(args.ki_grid))
    out = _out_dir(args)
    kp, ki, score = tune_gains(case, surface, args.controller, grid, bundle, args.duration, args.workers)
    if not math.isfinite(score):
        print("every grid point diverged", file=sys.stderr)
        return 2
    write_kv([("kp", kp), ("ki", ki), ("score", score), ("surface", surface),
              ("controller", ControllerKind.parse(args.controller).value), ("case", case.name)],
             out / "tune.kv")
    _write_manifest(out, "tune", bundle, source, case=_case_dict(case), surface=surface,
                    controller=args.controller, kp_grid=sorted(set(args.kp_grid)),
                    ki_grid=sorted(set(args.ki_grid)), result={"kp": kp, "ki": ki, "score": score})
    print(f"kp={fmt(kp)} ki={fmt(ki)} score={score:.6g} rad/s")
    return 0


def cmd_profiles(args):
    bundle, source = _load(args)
    case = _case(args, bundle)
    out = _out_dir(args)
    dt = bundle.loop.control_dt
    n = int(round(case.profile.duration / dt)) + 1
    t = np.arange(n) * dt
    speeds = np.array([bundle.robot.gear_ratio * case_wheel_profiles(case, bundle.robot, ti) for ti in t])
    write_profiles_csv(t, speeds, out / "profiles.csv")
    write_plot_stub(out)
    peaks = np.max(np.abs(speeds), axis=0)
    print(f"wrote {out}/profiles.csv; peak |wheel speed| " + ", ".join(f"{p:.4f}" for p in peaks) + " rad/s")
    return 0


def cmd_validate(args):
    bundle, source = _load(args)
    print(f"{source}: ok")
    print(f"  robot: M={bundle.robot.mass_M} kg, J={bundle.robot.inertia_J} kg m^2, "
          f"wheel angles {list(bundle.robot.wheel_angles_deg)} deg")
    m = bundle.motor
    print(f"  motor: kn={m.speed_constant_kn:.6g} rad/(s V), km={m.torque_constant_km:.6g} N m/A, "
          f"R={m.resistance_R:.6g} ohm, stall {m.stall_torque:.6g} N m, no-load {m.no_load_speed:.6g} rad/s")
    print("  surfaces: " + ", ".join(f"{s.name} (mu={s.mu_linear:g})" for s in bundle.surfaces))
    return 0


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "tune": cmd_tune, "profiles": cmd_profiles,
            "validate": cmd_validate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"omnisim: config error: {exc}", file=sys.stderr)
        return 1
    except IntegrationDiverged as exc:
        print(f"omnisim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
