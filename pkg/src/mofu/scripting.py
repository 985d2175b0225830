"""Deterministic setpoint scripts for the ten experimental motion conditions.

Every script is sampled at ``control_freq`` with a zero-order hold: the values
in sample ``k`` apply over ``[t_k, t_k + 1/control_freq)``.

Random dual-robot periods come from ``numpy.random.default_rng(seed)``
(PCG64 bit generator, ``uniform(low, high, size=2)``).  numpy guarantees that
stream to be reproducible across platforms for a given version of PCG64.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .actuation import LeadScrew, screw_displacement
from .errors import DataFormatError, InvalidConditionError, InvalidParamsError
from .jitterbug import (
    DEFAULT_TABLE_SIZE,
    DEFAULT_THETA_MAX,
    JitterbugParams,
    base_yaw,
    cached_lookup,
    inverse_angle,
)

SCRIPT_FORMAT_VERSION = 1
SCRIPT_HEADER = ["t_s", "robot", "motor_target_rad", "v_mm_s", "omega_extra_rad_s", "compensation"]


class Kind(str, enum.Enum):
    NBM = "NBM"
    RM = "RM"
    EC = "EC"
    RM_EC = "RM_EC"
    LOC = "LOC"
    LOC_RM_EC = "LOC_RM_EC"


@dataclass(frozen=True)
class MotionCondition:
    kind: Kind
    robots: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.robots not in (1, 2):
            raise InvalidConditionError(f"robots must be 1 or 2, got {self.robots}")
        if self.kind in (Kind.LOC, Kind.LOC_RM_EC) and self.robots != 1:
            raise InvalidConditionError(f"{self.kind.value} is a single-robot condition")

    @property
    def name(self) -> str:
        base = self.kind.value.replace("_", "+")
        return base if self.robots == 1 else f"{base} (2 robots)"

    @classmethod
    def parse(cls, text: str, robots: int = 1) -> "MotionCondition":
        """Accept ``RM+EC``, ``rm_ec``, ``LOC+RM+EC`` and friends."""
        key = text.strip().upper().replace("+", "_").replace("-", "_")
        try:
            kind = Kind(key)
        except ValueError:
            names = ", ".join(k.value.replace("_", "+") for k in Kind)
            raise InvalidConditionError(f"unknown condition {text!r} (expected one of {names})")
        return cls(kind, robots)


ALL_CONDITIONS = tuple(
    [MotionCondition(k, 1) for k in Kind if k not in (Kind.LOC, Kind.LOC_RM_EC)]
    + [MotionCondition(k, 2) for k in Kind if k not in (Kind.LOC, Kind.LOC_RM_EC)]
    + [MotionCondition(Kind.LOC, 1), MotionCondition(Kind.LOC_RM_EC, 1)]
)


@dataclass(frozen=True)
class ScriptParams:
    period: float = 6.0  # s
    amplitude: float = 7 * math.pi  # rad of lift-motor rotation
    control_freq: float = 10.0  # Hz
    duration: float = 20.0  # s
    dual_period_range: tuple[float, float] = (5.0, 7.0)
    loc_move: float = 1.5  # s
    loc_stop: float = 0.5  # s
    cruise_speed: float = 100.0  # mm/s
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dual_period_range", tuple(float(x) for x in self.dual_period_range))
        if not (self.period > 0 and self.control_freq > 0 and self.duration > 0):
            raise InvalidParamsError("period, control_freq and duration must be > 0")
        if self.amplitude < 0:
            raise InvalidParamsError("amplitude must be >= 0")
        lo, hi = self.dual_period_range
        if not 0 < lo < hi:
            raise InvalidParamsError(f"dual_period_range needs 0 < min < max, got {self.dual_period_range}")
        if not (self.loc_move > 0 and self.loc_stop >= 0):
            raise InvalidParamsError("loc_move must be > 0 and loc_stop >= 0")
        for name in ("duration", "loc_move", "loc_stop"):
            n = getattr(self, name) * self.control_freq
            if abs(n - round(n)) > 1e-9:
                raise InvalidParamsError(f"{name} must be a whole number of control ticks")

    @property
    def dt(self) -> float:
        return 1.0 / self.control_freq

    @property
    def n_samples(self) -> int:
        return round(self.duration * self.control_freq) + 1


@dataclass(frozen=True)
class Setpoint:
    t: float
    motor_target: float = 0.0
    v: float = 0.0
    omega_extra: float = 0.0
    compensation: bool = False


@dataclass
class MotionScript:
    condition: MotionCondition | None
    params: ScriptParams
    robots: list[list[Setpoint]]
    periods: list[float] = field(default_factory=list)

    @property
    def dt(self) -> float:
        return self.params.dt

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCRIPT_HEADER)
            for r, samples in enumerate(self.robots):
                for s in samples:
                    w.writerow([repr(s.t), r, repr(s.motor_target), repr(s.v), repr(s.omega_extra), int(s.compensation)])

    def metadata(self) -> dict:
        p = asdict(self.params)
        p["dual_period_range"] = list(self.params.dual_period_range)
        return {
            "format": "mofu-script",
            "version": SCRIPT_FORMAT_VERSION,
            "condition": self.condition.name if self.condition else None,
            "kind": self.condition.kind.value if self.condition else None,
            "robots": len(self.robots),
            "params": p,
            "seed": self.params.seed,
            "periods_s": list(self.periods),
            "rng": "numpy PCG64 default_rng(seed).uniform(low, high, 2)",
        }

    def write(self, path) -> Path:
        """Write the CSV and its ``.meta.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        self.to_csv(path)
        meta = sidecar_path(path)
        meta.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return meta


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def triangular_wave(t: float, period: float, amplitude: float) -> float:
    """0 at t=0, ``amplitude`` at period/2, back to 0 at period; periodic."""
    phase = (t % period) / period
    return amplitude * (2.0 * phase if phase < 0.5 else 2.0 * (1.0 - phase))


def dual_periods(period_range=(5.0, 7.0), seed: int = 0) -> tuple[float, float]:
    lo, hi = period_range
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(lo, hi, size=2)
    return float(a), float(b)


def _theta_for_motor(angle, table, screw):
    return inverse_angle(table, table.z_min + screw_displacement(screw, angle), "interpolated").theta


def _triangle_samples(params, period, kind, jitterbug, screw, table_n, theta_max):
    n, dt = params.n_samples, params.dt
    ts = [k / params.control_freq for k in range(n)]
    motor = [triangular_wave(t, period, params.amplitude) for t in ts]
    if kind is Kind.NBM:
        return [Setpoint(t) for t in ts]
    if kind is Kind.RM:
        # wheels replay the yaw the Jitterbug would induce for the same stroke
        table = cached_lookup(jitterbug, theta_max, table_n)
        yaw = [base_yaw(_theta_for_motor(m, table, screw)) for m in motor]
        yaw.append(base_yaw(_theta_for_motor(triangular_wave(n * dt, period, params.amplitude), table, screw)))
        return [Setpoint(t, 0.0, 0.0, (yaw[k + 1] - yaw[k]) / dt) for k, t in enumerate(ts)]
    comp = kind is Kind.EC
    return [Setpoint(t, m, 0.0, 0.0, comp) for t, m in zip(ts, motor)]


def _locomotion_samples(params, with_ec):
    move = round(params.loc_move * params.control_freq)
    cycle = move + round(params.loc_stop * params.control_freq)
    out = []
    for k in range(params.n_samples):
        t = k / params.control_freq
        n_cycle, idx = divmod(k, cycle)
        moving = idx < move
        target = 0.0
        if with_ec:
            frac = min(idx / move, 1.0)
            # cycle 0 expands, cycle 1 contracts, and so on
            target = params.amplitude * (frac if n_cycle % 2 == 0 else 1.0 - frac)
        out.append(Setpoint(t, target, params.cruise_speed if moving else 0.0, 0.0, False))
    return out


def generate_script(
    condition: MotionCondition,
    params: ScriptParams | None = None,
    jitterbug: JitterbugParams | None = None,
    screw: LeadScrew | None = None,
    table_n: int = DEFAULT_TABLE_SIZE,
    theta_max: float = DEFAULT_THETA_MAX,
) -> MotionScript:
    params = params or ScriptParams()
    jitterbug = jitterbug or JitterbugParams()
    screw = screw or LeadScrew()
    if not isinstance(condition, MotionCondition):
        raise InvalidConditionError(f"not a MotionCondition: {condition!r}")
    kind = condition.kind
    if kind in (Kind.LOC, Kind.LOC_RM_EC):
        return MotionScript(condition, params, [_locomotion_samples(params, kind is Kind.LOC_RM_EC)], [])
    if condition.robots == 2:
        periods = list(dual_periods(params.dual_period_range, params.seed))
    else:
        periods = [params.period]
    robots = [_triangle_samples(params, p, kind, jitterbug, screw, table_n, theta_max) for p in periods]
    return MotionScript(condition, params, robots, periods)


def read_script(path) -> MotionScript:
    """Load a script CSV, taking condition and params from the sidecar when present."""
    path = Path(path)
    meta_file = sidecar_path(path)
    meta = None
    if meta_file.exists():
        try:
            meta = json.loads(meta_file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"bad metadata JSON: {exc}", meta_file, exc.lineno)
    by_robot: dict[int, list[Setpoint]] = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(str(exc.strerror or exc), path)
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCRIPT_HEADER:
            raise DataFormatError(f"expected header {','.join(SCRIPT_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SCRIPT_HEADER):
                raise DataFormatError(f"expected {len(SCRIPT_HEADER)} fields, got {len(row)}", path, lineno)
            try:
                t, r, m, v, om = float(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4])
                comp = {"0": False, "1": True}[row[5].strip()]
            except (ValueError, KeyError):
                raise DataFormatError(f"unparseable row {row!r}", path, lineno)
            by_robot.setdefault(r, []).append(Setpoint(t, m, v, om, comp))
    if not by_robot:
        raise DataFormatError("script has no samples", path)
    if sorted(by_robot) != list(range(len(by_robot))):
        raise DataFormatError(f"robot indices must be 0..n-1, got {sorted(by_robot)}", path)
    robots = [by_robot[r] for r in range(len(by_robot))]
    lengths = {len(s) for s in robots}
    if len(lengths) != 1 or lengths.pop() < 2:
        raise DataFormatError("every robot needs the same number (>= 2) of samples", path)
    dt = robots[0][1].t - robots[0][0].t
    for samples in robots:
        if samples[0].t != 0.0:
            raise DataFormatError("scripts must start at t=0", path)
        for a, b in zip(samples, samples[1:]):
            if abs((b.t - a.t) - dt) > 1e-9:
                raise DataFormatError(f"non-uniform spacing at t={b.t}", path)
    if meta is not None:
        try:
            p = dict(meta["params"])
            params = ScriptParams(**p)
            condition = MotionCondition(Kind(meta["kind"]), int(meta["robots"]))
            periods = [float(x) for x in meta.get("periods_s", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad metadata: {exc}", meta_file)
    else:
        n = len(robots[0])
        freq = round(1.0 / dt, 9)
        params = ScriptParams(control_freq=freq, duration=(n - 1) / freq)
        condition = None  # unknown without a sidecar
        periods = []
    if abs(params.dt - dt) > 1e-9 or params.n_samples != len(robots[0]):
        raise DataFormatError("samples disagree with the sidecar's control_freq/duration", path)
    return MotionScript(condition, params, robots, periods)
