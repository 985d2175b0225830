"""Deterministic robot simulator driven by a ``MotionScript``.

One tick:

1. the lift motor moves toward the script's motor target (PID or ideal);
2. carriage height ``z = z_min + lead * angle / 2pi`` is clipped to the
   lookup range and mapped to ``Theta`` through the interpolated table;
3. the Jitterbug rotates the base by ``sign * dTheta / 2``;
4. when compensation is on, the wheels add the opposite rotation computed
   from the *commanded* ``Theta`` profile over the current script interval
   (feedforward: the script is known in advance);
5. ``v`` and the wheel yaw rate integrate the pose along an exact arc.

Setpoints are held over each script interval; ``SimConfig.dt`` may be any
integer fraction of the script spacing.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .actuation import (
    DEFAULT_INTEGRAL_LIMIT,
    DEFAULT_RATE_LIMIT,
    LeadScrew,
    MotorState,
    PidGains,
    height_to_motor_angle,
    ideal_step,
    pid_step,
    screw_displacement,
)
from .drive import (
    DriveGeometry,
    Pose,
    body_to_wheels,
    compensation_yaw_rate,
    integrate_pose,
    normalize_angle,
)
from .errors import InvalidParamsError, MofuError
from .jitterbug import (
    DEFAULT_TABLE_SIZE,
    DEFAULT_THETA_MAX,
    JitterbugParams,
    LookupTable,
    cached_lookup,
    inverse_angle,
)
from .scripting import MotionScript, Setpoint, sidecar_path

log = logging.getLogger(__name__)

TRACE_FORMAT_VERSION = 1
TRACE_HEADER = ["t_s", "x_mm", "y_mm", "yaw_rad", "z_mm", "theta_rad", "overall_height_mm"]
OVERALL_HEIGHT_MIN = 210.0  # mm, fully contracted, wheels and frame included


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    height_offset: float | None = None  # None: place the contracted robot at 210 mm
    geometry: DriveGeometry = field(default_factory=DriveGeometry)
    params: JitterbugParams = field(default_factory=JitterbugParams)
    gains: PidGains = field(default_factory=PidGains)
    screw: LeadScrew = field(default_factory=LeadScrew)
    rate_limit: float = DEFAULT_RATE_LIMIT
    integral_limit: float = DEFAULT_INTEGRAL_LIMIT
    ideal_lift: bool = False
    yaw_sign: float = 1.0  # +1: expansion turns the base counter-clockwise
    theta_max: float = DEFAULT_THETA_MAX
    table_n: int = DEFAULT_TABLE_SIZE

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParamsError(f"dt must be > 0, got {self.dt}")
        if self.height_offset is not None and self.height_offset < 0:
            raise InvalidParamsError("height_offset must be >= 0")
        if self.yaw_sign not in (1.0, -1.0):
            raise InvalidParamsError("yaw_sign must be +1 or -1")
        if not (self.rate_limit > 0 and self.integral_limit > 0):
            raise InvalidParamsError("rate_limit and integral_limit must be > 0")

    @property
    def table(self) -> LookupTable:
        return cached_lookup(self.params, self.theta_max, self.table_n)

    @property
    def resolved_height_offset(self) -> float:
        if self.height_offset is not None:
            return self.height_offset
        return OVERALL_HEIGHT_MIN - self.table.z_min


@dataclass(frozen=True)
class RobotState:
    pose: Pose
    z: float
    theta_cap: float
    lift_motor: MotorState
    left_motor: MotorState
    right_motor: MotorState
    t: float = 0.0
    theta_cmd: float = 0.0  # commanded Theta at this instant
    lift_command: float = 0.0  # rad/s, held between controller ticks
    saturated: bool = False


def initial_state(config: SimConfig, pose: Pose | None = None) -> RobotState:
    table = config.table
    return RobotState(
        pose=pose or Pose(),
        z=table.z_min,
        theta_cap=table.thetas[0],
        lift_motor=MotorState(),
        left_motor=MotorState(),
        right_motor=MotorState(),
    )


def _commanded_theta(config, target):
    table = config.table
    return inverse_angle(table, table.z_min + screw_displacement(config.screw, target), "interpolated").theta


def _clip_target(config, target):
    table = config.table
    angle_max = height_to_motor_angle(config.screw, table.z_max, table.z_min)
    return min(max(target, 0.0), angle_max)


def step(
    state: RobotState,
    setpoint: Setpoint,
    config: SimConfig,
    next_setpoint: Setpoint | None = None,
    substep: int = 0,
    substeps: int = 1,
) -> RobotState:
    """Advance ``state`` by ``config.dt`` inside the script interval that starts at ``setpoint``.

    ``next_setpoint`` is the sample that closes the interval (the script is
    known ahead of time).  The PID ticks once per interval (at ``substep == 0``) and holds
    ``setpoint``'s target; the ideal
    actuator and the feedforward compensation both follow the commanded
    profile linearly toward ``next_setpoint``.  ``substep``/``substeps``
    locate this tick inside the interval.
    """
    dt = config.dt
    table = config.table
    nxt = next_setpoint if next_setpoint is not None else setpoint
    target = _clip_target(config, setpoint.motor_target)
    target_next = _clip_target(config, nxt.motor_target)
    saturated = target != setpoint.motor_target

    frac = (substep + 1) / substeps
    lift_command = state.lift_command
    if config.ideal_lift:
        lift = ideal_step(state.lift_motor, target + frac * (target_next - target))
    elif substep == 0:
        # the controller ticks at the script rate; finer sim steps only refine the plant
        lift, lift_command = pid_step(
            config.gains, state.lift_motor, target, dt * substeps, config.rate_limit, config.integral_limit
        )
        lift = replace(lift, angle=state.lift_motor.angle + lift_command * dt)
    else:
        lift = replace(state.lift_motor, angle=state.lift_motor.angle + lift_command * dt)

    z_raw = table.z_min + screw_displacement(config.screw, lift.angle)
    z = min(max(z_raw, table.z_min), table.z_max)
    saturated = saturated or z != z_raw
    theta = inverse_angle(table, z, "interpolated").theta
    induced = config.yaw_sign * (theta - state.theta_cap) / 2.0

    cmd_now = _commanded_theta(config, target)
    cmd_delta = _commanded_theta(config, target_next) - cmd_now
    theta_cmd = cmd_now + frac * cmd_delta
    omega_wheels = setpoint.omega_extra
    if setpoint.compensation:
        omega_wheels += config.yaw_sign * compensation_yaw_rate(cmd_delta / (dt * substeps))

    wheels = body_to_wheels(config.geometry, setpoint.v, omega_wheels)
    left = replace(state.left_motor, angle=state.left_motor.angle + wheels.omega_left * dt)
    right = replace(state.right_motor, angle=state.right_motor.angle + wheels.omega_right * dt)

    pose = integrate_pose(state.pose, setpoint.v, omega_wheels + induced / dt, dt)
    return RobotState(pose, z, theta, lift, left, right, state.t + dt, theta_cmd, lift_command, saturated)


@dataclass
class Trace:
    states: list[RobotState]
    setpoints: list[Setpoint]
    dt: float
    height_offset: float
    saturation_count: int = 0

    def __len__(self):
        return len(self.states)

    @property
    def yaws(self) -> list[float]:
        return [s.pose.yaw for s in self.states]

    @property
    def overall_heights(self) -> list[float]:
        return [s.z + self.height_offset for s in self.states]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for s in self.states:
                w.writerow(
                    [f"{v:.12g}" for v in (s.t, s.pose.x, s.pose.y, s.pose.yaw, s.z, s.theta_cap, s.z + self.height_offset)]
                )


def _substeps(script_dt: float, dt: float) -> int:
    m = round(script_dt / dt)
    if m < 1 or abs(m * dt - script_dt) > 1e-9:
        raise InvalidParamsError(f"sim dt={dt} must divide the script spacing {script_dt}")
    return m


def run_samples(samples: list[Setpoint], config: SimConfig, script_dt: float, pose: Pose | None = None) -> Trace:
    """Simulate one robot's setpoint list; the trace has one state per sample."""
    m = _substeps(script_dt, config.dt)
    state = initial_state(config, pose)
    states = [state]
    sat = 0
    for k, sp in enumerate(samples[:-1]):
        for j in range(m):
            try:
                state = step(state, sp, config, samples[k + 1], j, m)
            except MofuError as exc:
                raise MofuError(f"t={sp.t:.6g} s: {exc}") from exc
            sat += state.saturated
        # re-anchor the clock on the sample grid so it never drifts
        state = replace(state, t=samples[k + 1].t)
        states.append(state)
    if sat:
        log.info("lift command clipped to the lookup range on %d ticks", sat)
    return Trace(states, list(samples), config.dt, config.resolved_height_offset, sat)


def run(script: MotionScript, config: SimConfig | None = None) -> list[Trace]:
    """One ``Trace`` per robot in ``script``."""
    config = config or SimConfig(dt=script.dt)
    return [run_samples(samples, config, script.dt) for samples in script.robots]


def net_yaw(trace: Trace) -> float:
    if not trace.states:
        raise ValueError("empty trace")
    return normalize_angle(trace.states[-1].pose.yaw - trace.states[0].pose.yaw)


def stroke(trace: Trace) -> float:
    zs = [s.z for s in trace.states]
    return max(zs) - min(zs)


def trace_paths(path, n_robots: int) -> list[Path]:
    """Robot 0 writes to ``path``; robot i>0 to ``<stem>_robot<i><suffix>``."""
    path = Path(path)
    return [path] + [path.with_name(f"{path.stem}_robot{i}{path.suffix}") for i in range(1, n_robots)]


def run_metadata(trace: Trace, config: SimConfig, robot: int, script: MotionScript | None = None) -> dict:
    cfg = asdict(config)
    cfg["height_offset"] = config.resolved_height_offset
    final = trace.states[-1]
    meta = {
        "format": "mofu-trace",
        "version": TRACE_FORMAT_VERSION,
        "columns": TRACE_HEADER,
        "robot": robot,
        "config": cfg,
        "samples": len(trace),
        "saturated_ticks": trace.saturation_count,
        "net_yaw_rad": net_yaw(trace),
        "stroke_mm": stroke(trace),
        "final_pose": {"x_mm": final.pose.x, "y_mm": final.pose.y, "yaw_rad": final.pose.yaw},
    }
    if script is not None:
        meta["script"] = script.metadata()
    return meta


def write_traces(traces: list[Trace], path, config: SimConfig, script: MotionScript | None = None) -> list[Path]:
    paths = trace_paths(path, len(traces))
    for i, (tr, p) in enumerate(zip(traces, paths)):
        tr.to_csv(p)
        meta = run_metadata(tr, config, i, script)
        sidecar_path(p).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def peak_base_yaw(trace: Trace) -> float:
    return max(s.theta_cap for s in trace.states) / 2.0

