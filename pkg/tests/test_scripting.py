import filecmp
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mofu.errors import DataFormatError, InvalidConditionError, InvalidParamsError
from mofu.scripting import (
    ALL_CONDITIONS,
    SCRIPT_HEADER,
    Kind,
    MotionCondition,
    ScriptParams,
    dual_periods,
    generate_script,
    read_script,
    triangular_wave,
)

A = 7 * math.pi


def test_ten_conditions():
    names = [c.name for c in ALL_CONDITIONS]
    assert names == [
        "NBM", "RM", "EC", "RM+EC",
        "NBM (2 robots)", "RM (2 robots)", "EC (2 robots)", "RM+EC (2 robots)",
        "LOC", "LOC+RM+EC",
    ]


@pytest.mark.parametrize("text,kind", [("RM+EC", Kind.RM_EC), ("loc+rm+ec", Kind.LOC_RM_EC), ("nbm", Kind.NBM)])
def test_parse(text, kind):
    assert MotionCondition.parse(text).kind is kind


def test_invalid_conditions():
    with pytest.raises(InvalidConditionError):
        MotionCondition(Kind.LOC, 2)
    with pytest.raises(InvalidConditionError):
        MotionCondition(Kind.EC, 3)
    with pytest.raises(InvalidConditionError):
        MotionCondition.parse("dance")
    with pytest.raises(InvalidConditionError):
        generate_script("EC")


def test_script_params_defaults():
    p = ScriptParams()
    assert (p.period, p.control_freq, p.duration, p.dual_period_range) == (6.0, 10.0, 20.0, (5.0, 7.0))
    assert p.amplitude == A and (p.loc_move, p.loc_stop) == (1.5, 0.5)
    assert p.n_samples == 201


@pytest.mark.parametrize("kw", [dict(period=0), dict(dual_period_range=(7, 5)), dict(loc_move=0.15 + 1e-3),
                                dict(amplitude=-1), dict(duration=-1)])
def test_bad_script_params(kw):
    with pytest.raises(InvalidParamsError):
        ScriptParams(**kw)


def test_triangular_values():
    assert triangular_wave(0.0, 6.0, A) == 0.0
    assert triangular_wave(3.0, 6.0, A) == pytest.approx(A)
    assert triangular_wave(1.5, 6.0, A) == pytest.approx(A / 2)
    assert triangular_wave(4.5, 6.0, A) == pytest.approx(A / 2)
    for k in range(5):
        assert triangular_wave(6.0 * k, 6.0, A) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0, 100), st.floats(0.5, 10), st.floats(0, 30))
def test_triangular_bounded_and_periodic(t, period, amp):
    v = triangular_wave(t, period, amp)
    assert -1e-12 <= v <= amp + 1e-12
    assert triangular_wave(t + period, period, amp) == pytest.approx(v, abs=1e-9 * max(1, amp))


def test_dual_periods_deterministic_and_in_range():
    assert dual_periods((5, 7), 42) == dual_periods((5, 7), 42)
    pairs = {dual_periods((5, 7), s) for s in range(100)}
    assert len(pairs) >= 99
    for s in range(10_000):
        a, b = dual_periods((5.0, 7.0), s)
        assert 5.0 <= a <= 7.0 and 5.0 <= b <= 7.0


def test_nbm_all_zero():
    sc = generate_script(MotionCondition(Kind.NBM))
    assert all((s.motor_target, s.v, s.omega_extra, s.compensation) == (0, 0, 0, False) for s in sc.robots[0])


@pytest.mark.parametrize("cond", ALL_CONDITIONS, ids=lambda c: c.name)
def test_sample_grid(cond):
    sc = generate_script(cond)
    assert len(sc.robots) == cond.robots
    for samples in sc.robots:
        assert len(samples) == 201
        assert [s.t for s in samples] == [k / 10 for k in range(201)]
        assert samples[0].motor_target == 0.0


def test_ec_and_rm_ec_share_motor_profile():
    ec = generate_script(MotionCondition(Kind.EC)).robots[0]
    rmec = generate_script(MotionCondition(Kind.RM_EC)).robots[0]
    assert [s.motor_target for s in ec] == [s.motor_target for s in rmec]
    assert all(s.compensation for s in ec) and not any(s.compensation for s in rmec)
    assert all(s.omega_extra == 0 and s.v == 0 for s in ec + rmec)


def test_rm_reproduces_base_yaw_profile():
    from mofu.actuation import LeadScrew, screw_displacement
    from mofu.jitterbug import JitterbugParams, base_yaw, build_lookup, inverse_angle

    table = build_lookup(JitterbugParams())
    rm = generate_script(MotionCondition(Kind.RM)).robots[0]
    assert all(s.motor_target == 0 and not s.compensation for s in rm)
    yaw = np.concatenate([[0.0], np.cumsum([s.omega_extra * 0.1 for s in rm[:-1]])])
    for k, t in enumerate(s.t for s in rm):
        z = table.z_min + screw_displacement(LeadScrew(), triangular_wave(t, 6.0, A))
        assert yaw[k] == pytest.approx(base_yaw(inverse_angle(table, z, "interpolated").theta), abs=1e-12)


def test_loc_duty_cycle():
    loc = generate_script(MotionCondition(Kind.LOC)).robots[0]
    v = [s.v for s in loc[:-1]]
    for c in range(10):
        cycle = v[20 * c: 20 * c + 20]
        assert cycle == [100.0] * 15 + [0.0] * 5
    assert all(s.motor_target == 0 for s in loc)


def test_loc_rm_ec_alternates_starting_with_expansion():
    loc = generate_script(MotionCondition(Kind.LOC)).robots[0]
    sc = generate_script(MotionCondition(Kind.LOC_RM_EC)).robots[0]
    assert [s.v for s in sc] == [s.v for s in loc]
    by_t = {round(s.t, 6): s.motor_target for s in sc}
    assert by_t[1.5] == pytest.approx(A)
    assert by_t[2.0] == pytest.approx(A)  # held during the stop
    assert by_t[3.5] == pytest.approx(0.0)
    assert by_t[5.5] == pytest.approx(A)
    # nothing moves while stopped
    for a, b in zip(sc, sc[1:]):
        if a.v == 0:
            assert b.motor_target == a.motor_target


def test_dual_ec_uses_seeded_periods():
    p = ScriptParams(seed=11)
    sc = generate_script(MotionCondition(Kind.EC, 2), p)
    assert tuple(sc.periods) == dual_periods((5.0, 7.0), 11)
    for samples, period in zip(sc.robots, sc.periods):
        assert [s.motor_target for s in samples] == [triangular_wave(s.t, period, A) for s in samples]


def test_csv_and_sidecar(tmp_path):
    sc = generate_script(MotionCondition(Kind.RM_EC, 2), ScriptParams(seed=5))
    path = tmp_path / "s.csv"
    meta = sc.write(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SCRIPT_HEADER)
    assert len(lines) == 1 + 2 * 201
    m = json.loads(meta.read_text())
    assert m["condition"] == "RM+EC (2 robots)" and m["seed"] == 5 and len(m["periods_s"]) == 2

    back = read_script(path)
    assert back.robots == sc.robots
    assert back.condition == sc.condition and back.params == sc.params


def test_byte_identical(tmp_path):
    for i in (1, 2):
        generate_script(MotionCondition(Kind.EC, 2), ScriptParams(seed=3)).write(tmp_path / f"{i}.csv")
    assert filecmp.cmp(tmp_path / "1.csv", tmp_path / "2.csv", shallow=False)
    assert filecmp.cmp(tmp_path / "1.csv.meta.json", tmp_path / "2.csv.meta.json", shallow=False)


def test_read_script_without_sidecar(tmp_path):
    p = tmp_path / "bare.csv"
    p.write_text("t_s,robot,motor_target_rad,v_mm_s,omega_extra_rad_s,compensation\n"
                 "0.0,0,0.0,0.0,0.0,0\n0.1,0,1.0,0.0,0.0,1\n0.2,0,2.0,0.0,0.0,1\n")
    sc = read_script(p)
    assert sc.condition is None and sc.dt == pytest.approx(0.1) and len(sc.robots[0]) == 3


@pytest.mark.parametrize(
    "body,line",
    [
        ("t,robot\n", 1),
        ("t_s,robot,motor_target_rad,v_mm_s,omega_extra_rad_s,compensation\n0.0,0,x,0,0,0\n", 2),
        ("t_s,robot,motor_target_rad,v_mm_s,omega_extra_rad_s,compensation\n0.0,0,0,0,0,0\n0.1,0,0,0,0\n", 3),
        ("t_s,robot,motor_target_rad,v_mm_s,omega_extra_rad_s,compensation\n0.0,0,0,0,0,2\n", 2),
    ],
)
def test_read_script_errors_carry_line(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataFormatError) as info:
        read_script(p)
    assert info.value.line == line and str(p) in str(info.value)


def test_read_script_nonuniform(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t_s,robot,motor_target_rad,v_mm_s,omega_extra_rad_s,compensation\n"
                 "0.0,0,0,0,0,0\n0.1,0,0,0,0,0\n0.25,0,0,0,0,0\n")
    with pytest.raises(DataFormatError, match="non-uniform"):
        read_script(p)
