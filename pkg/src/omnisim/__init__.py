"""Closed-loop simulation of a four-wheel omni-directional robot driven by
brushless motors under a torque controller or a plain PI speed controller."""

__version__ = "0.1.0"

from omnisim.control import ControllerKind, FIRFilter, PIState, WheelController, controller_step, torque_to_duty
from omnisim.dynamics import IntegrationDiverged, Plant, RobotState, friction_wrench, rk4_step, state_derivative
from omnisim.kinematics import (ScenarioCase, TrapezoidProfile, Twist, case_wheel_profiles, coupling_matrix,
                                trapezoid_speed, wheel_speeds_from_twist)
from omnisim.motor import Encoder, encoder_measure, energy_balance_residual, torque_from_duty
from omnisim.params import (ConfigError, ControllerParams, LoopRates, MotorParams, ParamsBundle, RobotParams,
                            SurfaceParams, ValidationError, derive_motor_constants, dump_params, load_params,
                            preset_case, read_params)
from omnisim.sim import (GridSearch, RobustnessReport, Scenario, TrajectoryLog, compare_surfaces, run_scenario,
                         tune_gains)
