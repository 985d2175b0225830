"""Kinematics, actuation and motion-script simulation for the MOFU expand/contract robot."""

from .actuation import LeadScrew, MotorState, PidGains, height_to_motor_angle, pid_step, screw_displacement
from .calibration import (
    MeasurementSample,
    fit_clearance,
    fit_height_offset,
    read_measurements,
    rmse_angle,
    rmse_by_trial,
    synthetic_samples,
)
from .drive import (
    DriveGeometry,
    Pose,
    WheelRates,
    body_to_wheels,
    compensation_yaw_rate,
    integrate_pose,
    wheels_to_body,
)
from .errors import (
    DataFormatError,
    EmptyDatasetError,
    InvalidConditionError,
    InvalidParamsError,
    MofuError,
    OutOfDomainError,
)
from .jitterbug import (
    JitterbugParams,
    LookupTable,
    base_yaw,
    build_lookup,
    forward_height,
    grid_thetas,
    intermediate_radii,
    inverse_angle,
    mu_zero,
)
from .scripting import (
    Kind,
    MotionCondition,
    MotionScript,
    ScriptParams,
    Setpoint,
    dual_periods,
    generate_script,
    read_script,
    triangular_wave,
)
from .sim import RobotState, SimConfig, Trace, net_yaw, run, step

__version__ = "0.1.0"
