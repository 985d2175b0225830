"""Differential two-wheel drive kinematics and pose integration."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParamsError

STRAIGHT_EPS = 1e-9  # rad, below this |omega*dt| the arc is treated as a line


@dataclass(frozen=True)
class DriveGeometry:
    wheel_radius: float = 29.0  # mm (58 mm tyres)
    track: float = 90.0  # mm between wheel contact points

    def __post_init__(self):
        if not (self.wheel_radius > 0 and self.track > 0):
            raise InvalidParamsError("wheel_radius and track must be > 0")


def normalize_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    if -math.pi < a <= math.pi:
        return a
    return math.pi - (math.pi - a) % (2.0 * math.pi)


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))


@dataclass(frozen=True)
class WheelRates:
    omega_left: float
    omega_right: float


def body_to_wheels(geom: DriveGeometry, v: float, omega: float) -> WheelRates:
    half = omega * geom.track / 2.0
    return WheelRates((v - half) / geom.wheel_radius, (v + half) / geom.wheel_radius)


def wheels_to_body(geom: DriveGeometry, rates: WheelRates) -> tuple[float, float]:
    v = geom.wheel_radius * (rates.omega_left + rates.omega_right) / 2.0
    omega = geom.wheel_radius * (rates.omega_right - rates.omega_left) / geom.track
    return v, omega


def integrate_pose(pose: Pose, v: float, omega: float, dt: float) -> Pose:
    """Advance ``pose`` along the constant-twist arc for ``dt`` seconds."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    dyaw = omega * dt
    yaw0 = pose.yaw
    if abs(dyaw) < STRAIGHT_EPS:
        # second-order midpoint keeps the limit smooth as omega -> 0
        mid = yaw0 + dyaw / 2.0
        dx = v * dt * math.cos(mid)
        dy = v * dt * math.sin(mid)
    else:
        r = v / omega
        dx = r * (math.sin(yaw0 + dyaw) - math.sin(yaw0))
        dy = -r * (math.cos(yaw0 + dyaw) - math.cos(yaw0))
    return Pose(pose.x + dx, pose.y + dy, yaw0 + dyaw)


def compensation_yaw_rate(dtheta_cap_dt: float) -> float:
    """Body yaw rate that cancels the base rotation caused by ``dTheta/dt``."""
    return -dtheta_cap_dt / 2.0
