"""Forward/inverse height kinematics of the Jitterbug expansion mechanism.

The structure height ``Z`` is a function of the top-face rotation ``Theta``
(relative to the base).  With ``theta = Theta / 2`` and
``mu = mu0 - theta`` the three component radii are::

    r_x = R_A cos(mu)
    r_y = R_A sin(mu)
    r_z = (R_A cos(th_dh) cos(mu) + sqrt(R_B^2 - R_A^2 sin^2(mu))) / sin(th_dh)

and ``Z = 2 |(r_x, r_y, r_z)| + C``.

Sign convention: ``mu`` *decreases* from ``mu0 = asin(R_B / R_A)`` as the
mechanism expands.  At ``mu0`` the square-root radicand is exactly zero, so
``mu0 + theta`` would leave the real domain for any ``theta > 0``.  Going
the other way keeps the radicand non-negative and makes ``Z`` increase from
the contracted to the expanded state.

There is no closed-form inverse, so control goes through a sampled
``LookupTable`` (45 points over ``[0, 1.0]`` rad by default).
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidParamsError, OutOfDomainError

DEFAULT_THETA_MAX = 1.0
DEFAULT_TABLE_SIZE = 45
RADICAND_EPS = 1e-9  # mm^2


@dataclass(frozen=True)
class JitterbugParams:
    r_a: float = 56.6  # mm
    r_b: float = 46.2  # mm
    theta_dh: float = 0.956  # rad, 54.74 deg
    clearance_c: float = 13.0  # mm

    def __post_init__(self):
        for name in ("r_a", "r_b", "theta_dh", "clearance_c"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParamsError(f"{name} must be finite")
        if not 0.0 < self.r_b < self.r_a:
            raise InvalidParamsError(
                f"need 0 < r_b < r_a, got r_a={self.r_a}, r_b={self.r_b}"
            )
        if not 0.0 < self.theta_dh < math.pi / 2:
            raise InvalidParamsError(f"theta_dh must lie in (0, pi/2), got {self.theta_dh}")
        if self.clearance_c < 0.0:
            raise InvalidParamsError(f"clearance_c must be >= 0, got {self.clearance_c}")

    def with_clearance(self, c: float) -> "JitterbugParams":
        return JitterbugParams(self.r_a, self.r_b, self.theta_dh, c)


def mu_zero(params: JitterbugParams) -> float:
    # r_b >= r_a is already rejected at construction; re-check for duck-typed inputs
    if not 0.0 < params.r_b < params.r_a:
        raise InvalidParamsError(f"need 0 < r_b < r_a, got r_a={params.r_a}, r_b={params.r_b}")
    return math.asin(params.r_b / params.r_a)


def intermediate_radii(params: JitterbugParams, mu: float) -> tuple[float, float, float]:
    """Return ``(r_x, r_y, r_z)`` in mm at the linkage angle ``mu``."""
    r_a, r_b, th = params.r_a, params.r_b, params.theta_dh
    s, c = math.sin(mu), math.cos(mu)
    radicand = r_b * r_b - r_a * r_a * s * s
    if radicand < 0.0:
        if radicand < -RADICAND_EPS:
            raise OutOfDomainError(
                f"mu={mu!r} rad is outside the mechanism domain (radicand {radicand:.6g} mm^2)",
                value=mu,
            )
        radicand = 0.0
    r_x = r_a * c
    r_y = r_a * s
    r_z = (r_a * math.cos(th) * c + math.sqrt(radicand)) / math.sin(th)
    return r_x, r_y, r_z


def forward_height(
    params: JitterbugParams, theta_cap: float, theta_max: float = DEFAULT_THETA_MAX
) -> float:
    """Structure height ``Z`` (mm) for top-face rotation ``theta_cap`` (rad)."""
    if not (0.0 <= theta_cap <= theta_max):
        raise OutOfDomainError(
            f"theta={theta_cap!r} rad outside [0, {theta_max}]", value=theta_cap
        )
    mu = mu_zero(params) - theta_cap / 2.0
    r_x, r_y, r_z = intermediate_radii(params, mu)
    return 2.0 * math.sqrt(r_x * r_x + r_y * r_y + r_z * r_z) + params.clearance_c


def height_slope(params: JitterbugParams, theta_cap: float) -> float:
    """dZ/dTheta (mm/rad); ``inf`` where the square-root radicand vanishes."""
    mu = mu_zero(params) - theta_cap / 2.0
    r_a, r_b, th = params.r_a, params.r_b, params.theta_dh
    s, c = math.sin(mu), math.cos(mu)
    radicand = r_b * r_b - r_a * r_a * s * s
    if radicand <= 0.0:
        return math.inf
    r_x, r_y, r_z = intermediate_radii(params, mu)
    drz = (-r_a * math.cos(th) * s - r_a * r_a * s * c / math.sqrt(radicand)) / math.sin(th)
    norm = math.sqrt(r_x * r_x + r_y * r_y + r_z * r_z)
    # dmu/dTheta = -1/2
    return -(r_x * -r_a * s + r_y * r_a * c + r_z * drz) / norm


def base_yaw(theta_cap: float) -> float:
    """Magnitude of the base rotation induced by a top-face rotation ``theta_cap``."""
    return theta_cap / 2.0


@dataclass(frozen=True)
class LookupTable:
    """Sampled Theta -> Z correspondence.

    Besides the nodes, a table built from the model carries the height at
    each interval's Theta-midpoint (so ``nearest`` can pick the node closest
    in Theta) and dTheta/dZ at every node (for Hermite interpolation).  A
    table assembled by hand without them falls back to z-midpoints and
    secant slopes.
    """

    thetas: tuple[float, ...]
    zs: tuple[float, ...]
    theta_max: float
    z_mids: tuple[float, ...] | None = None
    slopes: tuple[float, ...] | None = None  # dTheta/dZ, rad/mm

    def __post_init__(self):
        if len(self.thetas) != len(self.zs):
            raise InvalidParamsError("thetas and zs differ in length")
        if len(self.thetas) < 2:
            raise InvalidParamsError("a lookup table needs at least 2 entries")
        if any(b <= a for a, b in zip(self.zs, self.zs[1:])):
            raise InvalidParamsError("z must be strictly increasing across the table")
        if self.z_mids is None:
            object.__setattr__(self, "z_mids", tuple((a + b) / 2.0 for a, b in zip(self.zs, self.zs[1:])))
        if self.slopes is None:
            sec = [(t1 - t0) / (z1 - z0) for t0, t1, z0, z1 in zip(self.thetas, self.thetas[1:], self.zs, self.zs[1:])]
            mid = [(a + b) / 2.0 for a, b in zip(sec, sec[1:])]
            object.__setattr__(self, "slopes", tuple([sec[0]] + mid + [sec[-1]]))
        if len(self.z_mids) != self.n - 1 or len(self.slopes) != self.n:
            raise InvalidParamsError("z_mids/slopes do not match the number of entries")

    @property
    def n(self) -> int:
        return len(self.thetas)

    @property
    def entries(self) -> list[tuple[float, float]]:
        return list(zip(self.thetas, self.zs))

    @property
    def step(self) -> float:
        return self.theta_max / (self.n - 1)

    @property
    def z_min(self) -> float:
        return self.zs[0]

    @property
    def z_max(self) -> float:
        return self.zs[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta_rad", "z_mm"])
            for th, z in zip(self.thetas, self.zs):
                w.writerow([f"{th:.9g}", f"{z:.9g}"])


def grid_thetas(theta_max: float = DEFAULT_THETA_MAX, n: int = DEFAULT_TABLE_SIZE) -> tuple[float, ...]:
    # index-based spacing keeps both endpoints exact
    return tuple(theta_max * i / (n - 1) for i in range(n))


def build_lookup(
    params: JitterbugParams,
    theta_max: float = DEFAULT_THETA_MAX,
    n: int = DEFAULT_TABLE_SIZE,
) -> LookupTable:
    if n < 2:
        raise InvalidParamsError(f"n must be >= 2, got {n}")
    if not theta_max > 0.0:
        raise InvalidParamsError(f"theta_max must be > 0, got {theta_max}")
    thetas = grid_thetas(theta_max, n)
    zs = tuple(forward_height(params, th, theta_max) for th in thetas)
    z_mids = tuple(forward_height(params, (a + b) / 2.0, theta_max) for a, b in zip(thetas, thetas[1:]))
    slopes = tuple(1.0 / height_slope(params, th) for th in thetas)  # 1/inf -> 0 at the branch point
    return LookupTable(thetas, zs, theta_max, z_mids, slopes)


@lru_cache(maxsize=32)
def cached_lookup(params: JitterbugParams, theta_max: float, n: int) -> LookupTable:
    return build_lookup(params, theta_max, n)


class InverseResult(NamedTuple):
    theta: float
    saturated: bool


INVERSE_MODES = ("nearest", "interpolated", "nearest_z", "linear")


def _hermite(table, k, z):
    z0, z1 = table.zs[k], table.zs[k + 1]
    h = z1 - z0
    s = (z - z0) / h
    s2, s3 = s * s, s * s * s
    return (
        (2 * s3 - 3 * s2 + 1) * table.thetas[k]
        + (s3 - 2 * s2 + s) * h * table.slopes[k]
        + (-2 * s3 + 3 * s2) * table.thetas[k + 1]
        + (s3 - s2) * h * table.slopes[k + 1]
    )


def inverse_angle(table: LookupTable, z_target: float, mode: str = "nearest") -> InverseResult:
    """Top-face rotation for a target height.

    Modes:

    ``nearest``
        the table entry closest in Theta to the true inverse, decided by
        comparing against the height at each interval's Theta-midpoint.
    ``interpolated``
        cubic Hermite interpolation of Theta(Z) through the nodes with the
        model's slopes.  Theta(Z) is smooth even at the contracted end,
        where Z(Theta) has a square-root branch point.
    ``nearest_z``
        the entry whose height is closest to ``z_target``.
    ``linear``
        piecewise-linear interpolation between nodes.

    Ties go to the lower index.  Targets outside the table clamp to the
    nearer endpoint with ``saturated=True``.
    """
    if mode not in INVERSE_MODES:
        raise ValueError(f"unknown inverse mode {mode!r}")
    zs, thetas = table.zs, table.thetas
    if z_target <= zs[0]:
        return InverseResult(thetas[0], z_target < zs[0])
    if z_target >= zs[-1]:
        return InverseResult(thetas[-1], z_target > zs[-1])
    hi = bisect.bisect_left(zs, z_target)
    if zs[hi] == z_target:
        return InverseResult(thetas[hi], False)
    lo = hi - 1
    if mode == "nearest":
        return InverseResult(thetas[lo if z_target <= table.z_mids[lo] else hi], False)
    if mode == "nearest_z":
        k = lo if z_target - zs[lo] <= zs[hi] - z_target else hi
        return InverseResult(thetas[k], False)
    if mode == "linear":
        frac = (z_target - zs[lo]) / (zs[hi] - zs[lo])
        return InverseResult(thetas[lo] + frac * (thetas[hi] - thetas[lo]), False)
    th = _hermite(table, lo, z_target)
    return InverseResult(min(max(th, thetas[lo]), thetas[hi]), False)


def inverse_angle_many(table: LookupTable, z_targets, mode: str = "nearest") -> np.ndarray:
    """Vectorised ``inverse_angle`` (angles only, no saturation flags)."""
    if mode not in INVERSE_MODES:
        raise ValueError(f"unknown inverse mode {mode!r}")
    zs = np.asarray(table.zs)
    thetas = np.asarray(table.thetas)
    z = np.clip(np.asarray(z_targets, dtype=float), zs[0], zs[-1])
    if mode == "linear":
        return np.interp(z, zs, thetas)
    hi = np.clip(np.searchsorted(zs, z, side="left"), 1, len(zs) - 1)
    lo = hi - 1
    exact_hi = zs[hi] == z
    if mode == "nearest":
        pick_lo = z <= np.asarray(table.z_mids)[lo]
    elif mode == "nearest_z":
        pick_lo = (z - zs[lo]) <= (zs[hi] - z)
    else:
        m = np.asarray(table.slopes)
        h = zs[hi] - zs[lo]
        s = (z - zs[lo]) / h
        th = ((2 * s**3 - 3 * s**2 + 1) * thetas[lo] + (s**3 - 2 * s**2 + s) * h * m[lo]
              + (-2 * s**3 + 3 * s**2) * thetas[hi] + (s**3 - s**2) * h * m[hi])
        th = np.clip(th, thetas[lo], thetas[hi])
        return np.where(exact_hi, thetas[hi], th)
    return np.where(pick_lo & ~exact_hi, thetas[lo], thetas[hi])
