"""``mofu`` command-line front end.

Exit codes: 0 ok, 1 data/domain error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import calibration, config as cfgmod
from .errors import InvalidConditionError, MofuError
from .jitterbug import base_yaw, build_lookup, forward_height, inverse_angle
from .scripting import ALL_CONDITIONS, MotionCondition, generate_script, read_script
from .sim import net_yaw, run, stroke, write_traces


class UsageError(Exception):
    pass


def _settings(args):
    overrides = [cfgmod.parse_override(s) for s in args.set or ()]
    return cfgmod.resolve(args.config, overrides, env=os.environ)


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def cmd_fk(args, st):
    theta = _angle(args.theta, args.degrees)
    z = forward_height(st.jitterbug, theta, st.theta_max)
    print(f"theta_rad={theta:.6f} z_mm={z:.6f} base_yaw_rad={base_yaw(theta):.6f}")


def cmd_ik(args, st):
    table = build_lookup(st.jitterbug, st.theta_max, st.table_n)
    res = inverse_angle(table, args.z, args.mode)
    extra = f" theta_deg={math.degrees(res.theta):.6f}" if args.degrees else ""
    print(f"z_mm={args.z:.6f} theta_rad={res.theta:.6f}{extra} saturated={int(res.saturated)}")


def cmd_table(args, st):
    table = build_lookup(st.jitterbug, st.theta_max, st.table_n)
    if args.out:
        table.to_csv(args.out)
        print(f"wrote {args.out} n={table.n} z_min_mm={table.z_min:.6f} z_max_mm={table.z_max:.6f}")
    else:
        print("theta_rad,z_mm")
        for th, z in table.entries:
            print(f"{th:.9g},{z:.9g}")


def _condition(args):
    try:
        return MotionCondition.parse(args.condition, args.robots)
    except InvalidConditionError as exc:
        raise UsageError(str(exc)) from exc


def _script_params(args, st):
    p = st.script
    if args.seed is not None:
        p = replace(p, seed=args.seed)
    return p


def _generate(condition, st, params):
    return generate_script(condition, params, st.jitterbug, st.screw, st.table_n, st.theta_max)


def cmd_script(args, st):
    script = _generate(_condition(args), st, _script_params(args, st))
    meta = script.write(args.out)
    periods = " ".join(f"{p:.6f}" for p in script.periods)
    print(f"wrote {args.out} ({meta.name}) condition={script.condition.name!r} "
          f"samples={len(script.robots[0])} robots={len(script.robots)} periods_s=[{periods}]")


def _summaries(traces):
    lines = []
    for i, tr in enumerate(traces):
        f = tr.states[-1].pose
        lines.append(
            f"robot={i} net_yaw_rad={net_yaw(tr):.6f} stroke_mm={stroke(tr):.6f} "
            f"max_overall_height_mm={max(tr.overall_heights):.6f} "
            f"final_x_mm={f.x:.6f} final_y_mm={f.y:.6f} final_yaw_rad={f.yaw:.6f}"
        )
    return lines


def _simulate_one(condition, raw, seed, out):
    st = cfgmod.Settings(raw)
    params = st.script
    if seed is not None:
        params = replace(params, seed=seed)
    script = _generate(condition, st, params)
    conf = st.sim(script.dt)
    traces = run(script, conf)
    write_traces(traces, out, conf, script)
    return [f"condition={condition.name!r} " + s for s in _summaries(traces)]


def _slug(condition):
    base = condition.kind.value.lower()
    return base if condition.robots == 1 else f"{base}_2robots"


def cmd_simulate(args, st):
    if args.all_conditions:
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = [(c, st.raw, args.seed, out_dir / f"trace_{_slug(c)}.csv") for c in ALL_CONDITIONS]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                results = list(ex.map(_simulate_one, *zip(*jobs)))
        else:
            results = [_simulate_one(*j) for j in jobs]
        for lines in results:
            print("\n".join(lines))
        return
    if not args.out:
        raise UsageError("simulate needs --out (or --all-conditions)")
    if args.script:
        script = read_script(args.script)
    elif args.condition:
        script = _generate(_condition(args), st, _script_params(args, st))
    else:
        raise UsageError("simulate needs --script, --condition or --all-conditions")
    conf = st.sim(script.dt)
    traces = run(script, conf)
    paths = write_traces(traces, args.out, conf, script)
    print("wrote " + " ".join(str(p) for p in paths))
    print("\n".join(_summaries(traces)))


def cmd_calibrate(args, st):
    samples = calibration.read_measurements(args.data)
    report = calibration.calibration_report(
        samples, st.jitterbug, st.table_n, st.theta_max, (args.overall_min, args.overall_max)
    )
    if args.report:
        calibration.write_report(report, args.report)
    print(
        f"clearance_c_mm={report['clearance_c_mm']:.6f} height_offset_mm={report['height_offset_mm']:.6f} "
        f"offset_residual_mm={report['height_offset_residual_mm']:.6f} "
        f"z_residual_rms_mm={report['z_residual_rms_mm']:.6f}"
    )
    for trial, r in report["rmse_by_trial_rad"].items():
        print(f"trial={trial} rmse_rad={r:.6f}")


def cmd_validate(args, st):
    samples = calibration.read_measurements(args.data)
    table = build_lookup(st.jitterbug, st.theta_max, st.table_n)
    for trial, r in calibration.rmse_by_trial(samples, table).items():
        print(f"trial={trial} rmse_rad={r:.6f}")
    print(f"pooled rmse_rad={calibration.rmse_angle(samples, table):.6f} half_step_rad={table.step / 2:.6f}")


def cmd_synth(args, st):
    samples = calibration.synthetic_samples(
        st.jitterbug, n=args.n, trials=args.trials, theta_max=st.theta_max,
        theta_noise=args.theta_noise, z_noise=args.z_noise, placement=args.placement,
        seed=args.seed if args.seed is not None else 0,
    )
    calibration.write_measurements(samples, args.out)
    print(f"wrote {args.out} samples={len(samples)} (synthetic, not measured data)")


def cmd_config(args, st):
    print(json.dumps(st.raw, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${cfgmod.ENV_VAR})")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config value")

    p = argparse.ArgumentParser(prog="mofu", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fk", parents=[common], help="height and base yaw for a top rotation")
    s.add_argument("theta", type=float)
    s.add_argument("--degrees", action="store_true", help="theta is given in degrees")
    s.set_defaults(func=cmd_fk)

    s = sub.add_parser("ik", parents=[common], help="top rotation for a structure height (lookup table)")
    s.add_argument("z", type=float, help="height in mm")
    s.add_argument("--mode", choices=["nearest", "interpolated"], default="nearest")
    s.add_argument("--degrees", action="store_true", help="also report degrees")
    s.set_defaults(func=cmd_ik)

    s = sub.add_parser("table", parents=[common], help="export the lookup table")
    s.add_argument("--out")
    s.set_defaults(func=cmd_table)

    for name, func, hlp in (("script", cmd_script, "generate a motion script"),
                            ("simulate", cmd_simulate, "simulate a script and write a trace")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--condition", required=(name == "script"),
                       help="NBM, RM, EC, RM+EC, LOC or LOC+RM+EC")
        s.add_argument("--robots", type=int, choices=[1, 2], default=1)
        s.add_argument("--seed", type=int)
        s.add_argument("--out", required=(name == "script"))
        s.set_defaults(func=func)
    s.add_argument("--script", help="script CSV written by `mofu script`")
    s.add_argument("--all-conditions", action="store_true")
    s.add_argument("--out-dir")
    s.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("calibrate", parents=[common], help="fit clearance and height offset")
    s.add_argument("--data", required=True)
    s.add_argument("--report")
    s.add_argument("--overall-min", type=float, default=210.0)
    s.add_argument("--overall-max", type=float, default=280.0)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("validate", parents=[common], help="per-trial angle RMSE")
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("synth", parents=[common], help="write synthetic measurement data")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, default=45)
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--theta-noise", type=float, default=0.0)
    s.add_argument("--z-noise", type=float, default=0.0)
    s.add_argument("--placement", choices=["nodes", "midpoints", "uniform"], default="nodes")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("config", parents=[common], help="print the resolved configuration")
    s.set_defaults(func=cmd_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        st = _settings(args)
        args.func(args, st)
    except (cfgmod.ConfigError, UsageError) as exc:
        print(f"mofu: error: {exc}", file=sys.stderr)
        return 2
    except (MofuError, OSError) as exc:
        print(f"mofu: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
