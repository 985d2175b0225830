"""Clearance / height-offset fitting and the angle-RMSE validation pipeline.

Measurement files are CSV with the header ``trial,z_mm,theta_rad``; blank
lines and lines starting with ``#`` are ignored.

``synthetic_samples`` fabricates data on the model curve (plus optional
seeded Gaussian noise).  It exists so the pipeline can be exercised end to
end; it is not measured data.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, EmptyDatasetError, OutOfDomainError
from .jitterbug import (
    JitterbugParams,
    LookupTable,
    build_lookup,
    forward_height,
    grid_thetas,
    inverse_angle,
    inverse_angle_many,
)

MEASUREMENT_HEADER = ["trial", "z_mm", "theta_rad"]
Z_BOUNDS = (50.0, 400.0)
THETA_BOUNDS = (-0.2, 1.2)


@dataclass(frozen=True)
class MeasurementSample:
    z_measured: float
    theta_measured: float
    trial: int = 0

    def __post_init__(self):
        if not Z_BOUNDS[0] <= self.z_measured <= Z_BOUNDS[1]:
            raise OutOfDomainError(f"z={self.z_measured} mm outside {Z_BOUNDS}", self.z_measured)
        if not THETA_BOUNDS[0] <= self.theta_measured <= THETA_BOUNDS[1]:
            raise OutOfDomainError(f"theta={self.theta_measured} rad outside {THETA_BOUNDS}", self.theta_measured)


def fit_clearance(samples, params: JitterbugParams, theta_max: float = 1.0) -> float:
    """Least-squares clearance ``C``.

    ``Z`` is affine in ``C`` with unit slope, so the estimate is the mean
    residual against the zero-clearance model.
    """
    samples = list(samples)
    if not samples:
        raise EmptyDatasetError("no samples to fit")
    bare = params.with_clearance(0.0)
    residuals = []
    for s in samples:
        if not 0.0 <= s.theta_measured <= theta_max:
            raise OutOfDomainError(
                f"trial {s.trial}: theta={s.theta_measured} rad outside the model range [0, {theta_max}]",
                s.theta_measured,
            )
        residuals.append(s.z_measured - forward_height(bare, s.theta_measured, theta_max))
    return math.fsum(residuals) / len(residuals)


def _rmse(pred, meas) -> float:
    d = np.asarray(pred) - np.asarray(meas)
    return float(np.sqrt(np.mean(d * d)))


def rmse_angle(samples, table: LookupTable) -> float:
    """Pooled RMSE (rad) between table-selected and measured ``Theta``."""
    samples = list(samples)
    if not samples:
        raise EmptyDatasetError("no samples")
    pred = [inverse_angle(table, s.z_measured, "nearest").theta for s in samples]
    return _rmse(pred, [s.theta_measured for s in samples])


def rmse_by_trial(samples, table: LookupTable) -> dict[int, float]:
    groups = defaultdict(list)
    for s in samples:
        groups[s.trial].append(s)
    if not groups:
        raise EmptyDatasetError("no samples")
    return {trial: rmse_angle(group, table) for trial, group in sorted(groups.items())}


def rmse_many(z, theta, table: LookupTable) -> np.ndarray:
    """Row-wise RMSE for stacked datasets ``z, theta`` of shape (reps, n)."""
    pred = inverse_angle_many(table, z, "nearest")
    d = pred - np.asarray(theta)
    return np.sqrt(np.mean(d * d, axis=-1))


def fit_height_offset(z_min_model: float, z_max_model: float, overall_min: float, overall_max: float):
    """Offset between mechanism height and overall robot height.

    Returns ``(offset, residual)``; the residual is half the mismatch between
    model stroke and measured stroke.
    """
    if not z_max_model > z_min_model:
        raise ValueError("z_max_model must exceed z_min_model")
    if not overall_max > overall_min:
        raise ValueError("overall_max must exceed overall_min")
    lo = overall_min - z_min_model
    hi = overall_max - z_max_model
    return (lo + hi) / 2.0, abs(lo - hi) / 2.0


def synthetic_samples(
    params: JitterbugParams,
    n: int = 45,
    trials: int = 3,
    theta_max: float = 1.0,
    theta_noise: float = 0.0,
    z_noise: float = 0.0,
    placement: str = "nodes",
    seed: int = 0,
) -> list[MeasurementSample]:
    """Samples on the model curve, optionally perturbed.

    ``placement``: ``nodes`` puts Theta on the lookup grid
    ``grid_thetas(theta_max, n)``; ``midpoints`` halfway between grid points
    (n-1 of them); ``uniform`` draws Theta uniformly.
    """
    rng = np.random.default_rng(seed)
    out = []
    for trial in range(1, trials + 1):
        if placement == "nodes":
            thetas = np.array(grid_thetas(theta_max, n))
        elif placement == "midpoints":
            g = np.array(grid_thetas(theta_max, n))
            thetas = (g[:-1] + g[1:]) / 2.0
        elif placement == "uniform":
            thetas = rng.uniform(0.0, theta_max, n)
        else:
            raise ValueError(f"unknown placement {placement!r}")
        for th in thetas:
            z = forward_height(params, float(th), theta_max)
            if z_noise:
                z += rng.normal(0.0, z_noise)
            meas = float(th) + (rng.normal(0.0, theta_noise) if theta_noise else 0.0)
            out.append(MeasurementSample(z, min(max(meas, THETA_BOUNDS[0]), THETA_BOUNDS[1]), trial))
    return out


def write_measurements(samples, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEASUREMENT_HEADER)
        for s in samples:
            w.writerow([s.trial, repr(s.z_measured), repr(s.theta_measured)])


def read_measurements(path) -> list[MeasurementSample]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFormatError(str(exc), path)
    header = None
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        row = [c.strip() for c in next(csv.reader(io.StringIO(line)))]
        if header is None:
            if row != MEASUREMENT_HEADER:
                raise DataFormatError(f"expected header {','.join(MEASUREMENT_HEADER)}, got {line!r}", path, lineno)
            header = row
            continue
        if len(row) != 3:
            raise DataFormatError(f"expected 3 fields, got {len(row)}", path, lineno)
        try:
            out.append(MeasurementSample(float(row[1]), float(row[2]), int(row[0])))
        except ValueError as exc:
            raise DataFormatError(str(exc), path, lineno)
    if header is None:
        raise DataFormatError("missing header", path)
    if not out:
        raise EmptyDatasetError(f"{path}: no measurement rows")
    return out


def calibration_report(samples, params: JitterbugParams, table_n: int = 45, theta_max: float = 1.0,
                       overall=(210.0, 280.0)) -> dict:
    c = fit_clearance(samples, params, theta_max)
    fitted = params.with_clearance(max(c, 0.0))
    table = build_lookup(fitted, theta_max, table_n)
    offset, resid = fit_height_offset(table.z_min, table.z_max, *overall)
    bare = params.with_clearance(0.0)
    residuals = [s.z_measured - c - forward_height(bare, s.theta_measured, theta_max) for s in samples]
    return {
        "clearance_c_mm": c,
        "height_offset_mm": offset,
        "height_offset_residual_mm": resid,
        "model_z_min_mm": table.z_min,
        "model_z_max_mm": table.z_max,
        "rmse_by_trial_rad": {str(k): v for k, v in rmse_by_trial(samples, table).items()},
        "rmse_pooled_rad": rmse_angle(samples, table),
        "z_residual_rms_mm": math.sqrt(math.fsum(r * r for r in residuals) / len(residuals)),
        "z_residual_max_abs_mm": max(abs(r) for r in residuals),
        "n_samples": len(samples),
    }


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
