"""Layered configuration: built-in defaults < JSON config file < CLI flags.

The file mirrors ``default_config()``; any section or key not listed there is
rejected.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .actuation import LeadScrew, PidGains
from .drive import DriveGeometry
from .jitterbug import JitterbugParams
from .scripting import ScriptParams
from .sim import SimConfig

ENV_VAR = "MOFU_CONFIG"


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    return {
        "jitterbug": {"r_a": 56.6, "r_b": 46.2, "theta_dh": 0.956, "clearance_c": 13.0},
        "table": {"theta_max": 1.0, "n": 45},
        "drive": {"wheel_radius": 29.0, "track": 90.0},
        "pid": {"kp": 5.0, "ki": 10.0, "kd": 0.0, "rate_limit": 50.0, "integral_limit": 10.0},
        "screw": {"lead": 20.0},
        "script": {
            "period": 6.0,
            "amplitude": 7 * math.pi,
            "control_freq": 10.0,
            "duration": 20.0,
            "dual_period_range": [5.0, 7.0],
            "loc_move": 1.5,
            "loc_stop": 0.5,
            "cruise_speed": 100.0,
            "seed": 0,
        },
        "sim": {"dt": None, "height_offset": None, "ideal_lift": False, "yaw_sign": 1.0},
    }


def merge(base: dict, update: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for section, values in update.items():
        if section not in out:
            raise ConfigError(f"{where}unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{where}section {section!r} must be an object")
        for key, value in values.items():
            if key not in out[section]:
                raise ConfigError(f"{where}unknown key {section}.{key}")
            out[section][key] = value
    return out


def load_file(path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def parse_override(text: str) -> dict:
    """``section.key=value`` with a JSON value (bare words fall back to strings)."""
    name, sep, value = text.partition("=")
    section, dot, key = name.strip().partition(".")
    if not (sep and dot and section and key):
        raise ConfigError(f"override {text!r} must look like section.key=value")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return {section: {key: parsed}}


@dataclass(frozen=True)
class Settings:
    raw: dict

    @property
    def jitterbug(self) -> JitterbugParams:
        return JitterbugParams(**self.raw["jitterbug"])

    @property
    def theta_max(self) -> float:
        return float(self.raw["table"]["theta_max"])

    @property
    def table_n(self) -> int:
        return int(self.raw["table"]["n"])

    @property
    def drive(self) -> DriveGeometry:
        return DriveGeometry(**self.raw["drive"])

    @property
    def gains(self) -> PidGains:
        p = self.raw["pid"]
        return PidGains(p["kp"], p["ki"], p["kd"])

    @property
    def screw(self) -> LeadScrew:
        return LeadScrew(**self.raw["screw"])

    @property
    def script(self) -> ScriptParams:
        s = dict(self.raw["script"])
        s["dual_period_range"] = tuple(s["dual_period_range"])
        s["seed"] = int(s["seed"])
        return ScriptParams(**s)

    def sim(self, script_dt: float | None = None) -> SimConfig:
        s = self.raw["sim"]
        p = self.raw["pid"]
        dt = s["dt"] if s["dt"] is not None else (script_dt or self.script.dt)
        return SimConfig(
            dt=float(dt),
            height_offset=s["height_offset"],
            geometry=self.drive,
            params=self.jitterbug,
            gains=self.gains,
            screw=self.screw,
            rate_limit=float(p["rate_limit"]),
            integral_limit=float(p["integral_limit"]),
            ideal_lift=bool(s["ideal_lift"]),
            yaw_sign=float(s["yaw_sign"]),
            theta_max=self.theta_max,
            table_n=self.table_n,
        )

    def validate(self) -> "Settings":
        """Build every component once so invalid values surface early."""
        try:
            self.jitterbug, self.drive, self.gains, self.screw, self.script, self.sim()
            if self.table_n < 2 or not self.theta_max > 0:
                raise ValueError("table.n must be >= 2 and table.theta_max > 0")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        return self


def resolve(config_path=None, overrides=(), env=None) -> Settings:
    raw = default_config()
    if config_path is None and env is not None:
        config_path = env.get(ENV_VAR) or None
    if config_path is not None:
        raw = merge(raw, load_file(config_path), where=f"{config_path}: ")
    for upd in overrides:
        raw = merge(raw, upd)
    return Settings(raw).validate()
