"""Direct-drive motor under discrete PID position control, and the lead screw.

The motor is modelled as an ideal velocity source: the PID output is a
velocity command (rad/s), saturated to ``rate_limit`` and integrated over
``dt``.  Gains therefore read as kp [1/s], ki [1/s^2], kd [-].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidParamsError, OutOfDomainError

DEFAULT_RATE_LIMIT = 50.0  # rad/s
DEFAULT_INTEGRAL_LIMIT = 10.0  # rad*s


@dataclass(frozen=True)
class PidGains:
    kp: float = 5.0
    ki: float = 10.0
    kd: float = 0.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise InvalidParamsError("PID gains must be non-negative")


@dataclass(frozen=True)
class MotorState:
    angle: float = 0.0
    integral_error: float = 0.0
    prev_error: float = 0.0


@dataclass(frozen=True)
class LeadScrew:
    lead: float = 20.0  # mm/rev

    def __post_init__(self):
        if not self.lead > 0:
            raise InvalidParamsError(f"lead must be > 0, got {self.lead}")


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def pid_step(
    gains: PidGains,
    state: MotorState,
    target: float,
    dt: float,
    rate_limit: float = DEFAULT_RATE_LIMIT,
    integral_limit: float = DEFAULT_INTEGRAL_LIMIT,
) -> tuple[MotorState, float]:
    """One control tick. Returns the new motor state and the velocity command."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e = target - state.angle
    integral = _clamp(state.integral_error + e * dt, -integral_limit, integral_limit)
    cmd = gains.kp * e + gains.ki * integral
    if gains.kd:
        cmd += gains.kd * (e - state.prev_error) / dt
    cmd = _clamp(cmd, -rate_limit, rate_limit)
    return MotorState(state.angle + cmd * dt, integral, e), cmd


def ideal_step(state: MotorState, target: float) -> MotorState:
    """Zero-lag actuator: the motor lands exactly on ``target``."""
    return replace(state, angle=target, prev_error=0.0)


def screw_displacement(screw: LeadScrew, motor_angle: float) -> float:
    return screw.lead * motor_angle / (2.0 * math.pi)


def height_to_motor_angle(screw: LeadScrew, z: float, z_min: float) -> float:
    if z < z_min - 1e-6:
        raise OutOfDomainError(f"height {z} mm is below the contracted height {z_min} mm", value=z)
    return 2.0 * math.pi * (z - z_min) / screw.lead
