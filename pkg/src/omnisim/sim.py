"""Closed-loop runs, cross-surface comparison and gain tuning.

A run couples four wheel controllers at the control rate to the chassis
plant integrated with RK4 at ``physics_substeps`` times that rate.  There is
no pose feedback: the desired wheel speeds are replayed open loop at the
chassis level.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from omnisim.control import ControllerKind, WheelController
from omnisim.dynamics import IntegrationDiverged, Plant, RobotState
from omnisim.kinematics import ScenarioCase, case_wheel_profiles, coupling_matrix
from omnisim.motor import Encoder, torque_from_duty

SETTLE_TIME = 0.5
WHEEL_CHANNELS = ("desired_omega", "raw_omega", "filtered_omega", "err", "tau_d", "duty", "torque")


@dataclass(frozen=True)
class Scenario:
    case: ScenarioCase
    surface_name: str
    controller: ControllerKind = ControllerKind.TORQUE
    gains: tuple[float, float] | None = None
    duration: float | None = None
    rates: object = None

    def __post_init__(self):
        object.__setattr__(self, "controller", ControllerKind.parse(self.controller))
        if self.duration is not None and not self.duration > 0:
            raise ValueError("duration must be > 0")

    def effective_duration(self):
        if self.duration is not None:
            return self.duration
        return self.case.profile.duration + SETTLE_TIME


@dataclass
class TrajectoryLog:
    """Time series of one run.

    Wheel channels are ``(ticks, 4)`` arrays sampled every control tick;
    ``true_omega`` is the simulator's exact motor speed at the tick.  The
    pose channel is sampled at ``pose_hz``.
    """

    t: np.ndarray
    desired_omega: np.ndarray
    raw_omega: np.ndarray
    filtered_omega: np.ndarray
    err: np.ndarray
    tau_d: np.ndarray
    duty: np.ndarray
    torque: np.ndarray
    true_omega: np.ndarray
    pose_t: np.ndarray
    pose: np.ndarray
    final_state: RobotState
    scenario: Scenario | None = None

    @property
    def ticks(self):
        return len(self.t)

    def tracking_rms(self, t0=None, t1=None, per_wheel=False):
        """RMS of desired minus true motor speed over ``t0 <= t <= t1``; NaN if no tick falls inside."""
        mask = np.ones(len(self.t), dtype=bool)
        if t0 is not None:
            mask &= self.t >= t0 - 1e-12
        if t1 is not None:
            mask &= self.t <= t1 + 1e-12
        if not mask.any():
            return np.full(4, math.nan) if per_wheel else math.nan
        e = self.desired_omega[mask] - self.true_omega[mask]
        if per_wheel:
            return np.sqrt(np.mean(e ** 2, axis=0))
        return float(np.sqrt(np.mean(e ** 2)))

    def cruise_window(self):
        p = self.scenario.case.profile
        return p.ramp_duration, p.ramp_duration + p.cruise_duration

    def cruise_rms(self, per_wheel=False):
        return self.tracking_rms(*self.cruise_window(), per_wheel=per_wheel)


def _controller_settings(bundle, gains):
    c = bundle.controller
    kp, ki = (c.kp, c.ki) if gains is None else gains
    return kp, ki, c


def run_scenario(s: Scenario, bundle) -> TrajectoryLog:
    robot, motor = bundle.robot, bundle.motor
    rates = s.rates or bundle.loop
    surface = bundle.surface(s.surface_name)
    kp, ki, cfg = _controller_settings(bundle, s.gains)

    dt = 1.0 / rates.control_hz
    n_ticks = int(round(s.effective_duration() * rates.control_hz))
    pose_every = max(1, int(round(rates.control_hz / rates.pose_hz)))

    G = coupling_matrix(robot)
    to_motor = robot.gear_ratio * G.T / robot.wheel_radius_r
    plant = Plant(robot, surface, G)
    coeffs = cfg.coefficients()
    controllers = [
        WheelController(s.controller, kp, ki, motor, coeffs, cfg.anti_windup,
                        cfg.converter, cfg.omega_clamp_fraction)
        for _ in range(4)
    ]
    encoders = [Encoder(cfg.encoder_cpr) for _ in range(4)]

    chan = {name: np.zeros((n_ticks, 4)) for name in WHEEL_CHANNELS + ("true_omega",)}
    t_arr = np.arange(n_ticks) * dt
    pose_t, pose = [], []
    raw = [0.0] * 4

    state = RobotState(theta=s.case.theta0)
    for j in range(n_ticks):
        t = j * dt
        if j % pose_every == 0:
            pose_t.append(t)
            pose.append((state.x, state.y, state.theta))
        desired = robot.gear_ratio * case_wheel_profiles(s.case, robot, t)
        true_omega = to_motor @ (state.vx_b, state.vy_b, state.omega)
        torques = np.empty(4)
        for i in range(4):
            duty, diag = controllers[i].step(desired[i], raw[i])
            torques[i] = torque_from_duty(duty, true_omega[i], motor)
            chan["desired_omega"][j, i] = desired[i]
            chan["raw_omega"][j, i] = raw[i]
            chan["filtered_omega"][j, i] = diag.filtered_omega
            chan["err"][j, i] = diag.err
            chan["tau_d"][j, i] = diag.tau_d
            chan["duty"][j, i] = duty
        chan["torque"][j] = torques
        chan["true_omega"][j] = true_omega
        state, displacement = plant.step(state, torques, dt, rates.physics_substeps, tick=j)
        turned = to_motor @ displacement
        raw = [enc.advance(turned[i], dt) for i, enc in enumerate(encoders)]
    if n_ticks % pose_every == 0:
        pose_t.append(n_ticks * dt)
        pose.append((state.x, state.y, state.theta))

    return TrajectoryLog(t=t_arr, pose_t=np.array(pose_t), pose=np.array(pose).reshape(-1, 3),
                         final_state=state, scenario=s, **chan)


def path_rms_deviation(a: TrajectoryLog, b: TrajectoryLog) -> float:
    """RMS of the Euclidean distance between two paths at matched pose timestamps."""
    n = min(len(a.pose_t), len(b.pose_t))
    if not np.allclose(a.pose_t[:n], b.pose_t[:n], rtol=0, atol=1e-9):
        raise ValueError("pose channels are not sampled at matching timestamps")
    d = a.pose[:n, :2] - b.pose[:n, :2]
    return float(np.sqrt(np.mean(np.sum(d ** 2, axis=1))))


@dataclass
class RobustnessReport:
    controller: ControllerKind
    case: ScenarioCase
    surfaces: list[str]
    gains: tuple[float, float]
    logs: list[TrajectoryLog] = field(repr=False)
    deviation: np.ndarray
    tracking_rms: np.ndarray
    cruise_rms: np.ndarray

    @property
    def final_poses(self):
        return {name: tuple(log.pose[-1]) for name, log in zip(self.surfaces, self.logs)}

    @property
    def paths(self):
        return {name: log.pose[:, :2] for name, log in zip(self.surfaces, self.logs)}

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max())

    @property
    def cruise_rms_spread(self) -> float:
        return float(self.cruise_rms.max() - self.cruise_rms.min())


def _run_job(args):
    scenario, bundle = args
    return run_scenario(scenario, bundle)


def run_many(scenarios, bundle, workers=1):
    """Run scenarios, optionally in worker processes; results keep input order."""
    jobs = [(s, bundle) for s in scenarios]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


def compare_surfaces(case, controller, gains, surfaces, bundle, duration=None, workers=1) -> RobustnessReport:
    """Replay one case on each surface with everything else fixed."""
    surfaces = list(surfaces)
    if len(surfaces) < 2:
        raise ValueError("need >= 2 surfaces to compare")
    for name in surfaces:
        bundle.surface(name)
    kind = ControllerKind.parse(controller)
    if gains is None:
        gains = (bundle.controller.kp, bundle.controller.ki)
    scenarios = [Scenario(case, name, kind, gains, duration) for name in surfaces]
    logs = run_many(scenarios, bundle, workers)
    n = len(logs)
    dev = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        dev[i, j] = dev[j, i] = path_rms_deviation(logs[i], logs[j])
    return RobustnessReport(
        controller=kind, case=case, surfaces=surfaces, gains=tuple(gains), logs=logs,
        deviation=dev,
        tracking_rms=np.array([log.tracking_rms(per_wheel=True) for log in logs]),
        cruise_rms=np.array([log.cruise_rms() for log in logs]),
    )


@dataclass(frozen=True)
class GridSearch:
    kp_values: tuple[float, ...]
    ki_values: tuple[float, ...]

    def points(self):
        return [(kp, ki) for kp in sorted(set(self.kp_values)) for ki in sorted(set(self.ki_values))]


# Half-octave log grid: kp 0.01..0.16 N m s/rad, ki 1e-4..1.6e-3 N m s/rad per sample.
DEFAULT_TUNING_GRID = GridSearch(
    tuple(0.01 * 2 ** (k / 2) for k in range(9)),
    tuple(1e-4 * 2 ** (k / 2) for k in range(9)),
)


def tune_gains(case, surface, controller, search_spec: GridSearch, bundle, duration=None, workers=1):
    """Grid search minimizing whole-run wheel-speed tracking RMS on one surface.

    Ties go to the smaller kp, then the smaller ki.  Runs that diverge score
    ``inf``.  Returns ``(kp, ki, score)``.
    """
    points = search_spec.points()
    if not points:
        raise ValueError("empty gain search space")
    kind = ControllerKind.parse(controller)
    scores = _score_points(case, surface, kind, points, bundle, duration, workers)
    best = None
    for (kp, ki), score in zip(points, scores):
        if best is None or score < best[2]:
            best = (kp, ki, score)
    return best


def _score_job(args):
    scenario, bundle = args
    try:
        return run_scenario(scenario, bundle).tracking_rms()
    except IntegrationDiverged:
        return math.inf


def _score_points(case, surface, kind, points, bundle, duration, workers):
    jobs = [(Scenario(case, surface, kind, p, duration), bundle) for p in points]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_score_job, jobs))
    else:
        scores = [_score_job(j) for j in jobs]
    return [s if math.isfinite(s) else math.inf for s in scores]
