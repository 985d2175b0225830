import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mofu.errors import InvalidParamsError, OutOfDomainError
from mofu.jitterbug import (
    JitterbugParams,
    LookupTable,
    base_yaw,
    build_lookup,
    forward_height,
    height_slope,
    intermediate_radii,
    inverse_angle,
    inverse_angle_many,
    mu_zero,
)
from oracles import MU0, Z_AT_0, Z_AT_1, height_oracle, height_oracle_mp

P = JitterbugParams()
TABLE = build_lookup(P)


def test_defaults_are_table2():
    assert (P.r_a, P.r_b, P.theta_dh, P.clearance_c) == (56.6, 46.2, 0.956, 13.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(r_a=10, r_b=10), dict(r_a=10, r_b=12), dict(r_b=0), dict(theta_dh=0), dict(theta_dh=math.pi / 2),
     dict(clearance_c=-1), dict(r_a=float("nan"))],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParamsError):
        JitterbugParams(**kwargs)


def test_mu_zero():
    assert mu_zero(P) == pytest.approx(MU0, abs=1e-12)
    # exact radicals 80*sqrt(2)/2 and 80*sqrt(3)/3
    exact = JitterbugParams(r_a=80 * math.sqrt(2) / 2, r_b=80 * math.sqrt(3) / 3)
    assert mu_zero(exact) == pytest.approx(0.9553, abs=5e-5)
    r = 7.3
    assert mu_zero(JitterbugParams(r_a=r, r_b=r * math.sin(math.pi / 6))) == pytest.approx(math.pi / 6, abs=1e-14)


def test_radii_at_mu_zero_annihilates_root():
    m0 = mu_zero(P)
    r_x, r_y, r_z = intermediate_radii(P, m0)
    assert r_y == pytest.approx(P.r_b, abs=1e-12)
    assert r_z == pytest.approx(P.r_a * math.cos(P.theta_dh) * math.cos(m0) / math.sin(P.theta_dh), abs=1e-12)


def test_radii_interior():
    # mpmath at 40 digits
    r = intermediate_radii(P, 0.4553)
    assert r == pytest.approx((50.834109837059245, 24.888818314130473, 83.540583838706114), abs=1e-9)


def test_radii_out_of_domain_reports_mu():
    with pytest.raises(OutOfDomainError) as info:
        intermediate_radii(P, 1.4553)
    assert info.value.value == 1.4553
    assert "1.4553" in str(info.value)


def test_forward_height_endpoints_match_oracle():
    assert forward_height(P, 0.0) == pytest.approx(Z_AT_0, abs=1e-9)
    assert forward_height(P, 1.0) == pytest.approx(Z_AT_1, abs=1e-9)
    assert forward_height(P.with_clearance(0.0), 0.0) == pytest.approx(Z_AT_0 - 13.0, abs=1e-9)
    assert round(Z_AT_0, 1) in (135.2, 135.3) and abs(Z_AT_1 - 214.9) < 0.05


@pytest.mark.parametrize("theta", [0.0, 0.13, 0.37, 0.5, 0.81, 0.999, 1.0])
def test_forward_height_matches_mpmath(theta):
    assert forward_height(P, theta) == pytest.approx(height_oracle(theta), abs=1e-9)


@pytest.mark.parametrize("theta", [-0.01, 1.0001, 2.0])
def test_forward_height_domain(theta):
    with pytest.raises(OutOfDomainError):
        forward_height(P, theta)


def test_monotone_on_dense_sweep():
    z = [forward_height(P, t) for t in np.linspace(0.0, 1.0, 1000)]
    assert all(b > a for a, b in zip(z, z[1:]))


def test_stroke_in_range():
    assert 60.0 <= forward_height(P, 1.0) - forward_height(P, 0.0) <= 85.0


@given(st.floats(0.0, 1.0), st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_clearance_additivity(theta, c1, c2):
    d = forward_height(P.with_clearance(c1), theta) - forward_height(P.with_clearance(c2), theta)
    assert d == pytest.approx(c1 - c2, abs=1e-9)


def test_radicand_nonnegative_on_domain():
    m0 = mu_zero(P)
    for t in np.linspace(0.0, 1.0, 1001):
        mu = m0 - t / 2
        assert P.r_b ** 2 - P.r_a ** 2 * math.sin(mu) ** 2 >= -1e-9


@pytest.mark.parametrize("theta,expected", [(1.0, 0.5), (0.0, 0.0), (0.4, 0.2)])
def test_base_yaw(theta, expected):
    assert base_yaw(theta) == expected


def test_base_yaw_full_stroke_degrees():
    assert abs(math.degrees(base_yaw(1.0)) - 28.6) < 0.2


def test_build_lookup_45():
    assert TABLE.n == 45
    assert TABLE.thetas[0] == 0.0 and TABLE.thetas[-1] == 1.0
    steps = np.diff(TABLE.thetas)
    assert np.allclose(steps, 1.0 / 44, atol=1e-15)
    assert TABLE.zs[0] == pytest.approx(Z_AT_0, abs=1e-9)
    assert TABLE.zs[44] == pytest.approx(Z_AT_1, abs=1e-9)


def test_build_lookup_two_entries():
    t = build_lookup(P, 0.7, 2)
    assert t.thetas == (0.0, 0.7)
    assert t.zs == (forward_height(P, 0.0), forward_height(P, 0.7))


def test_build_lookup_rejects_bad_args():
    with pytest.raises(InvalidParamsError):
        build_lookup(P, 1.0, 1)
    with pytest.raises(OutOfDomainError):
        build_lookup(P, 4.0, 10)  # |mu0 - 2.0| > mu0: radicand goes negative


def test_lookup_rejects_nonmonotone():
    with pytest.raises(InvalidParamsError):
        LookupTable((0.0, 0.5, 1.0), (1.0, 3.0, 2.0), 1.0)


@pytest.mark.parametrize("theta", [0.05, 0.3, 0.6, 0.95])
def test_height_slope_matches_numeric_derivative(theta):
    from mpmath import diff

    assert height_slope(P, theta) == pytest.approx(float(diff(height_oracle_mp, theta)), rel=1e-9)


def test_height_slope_singular_at_contracted_end():
    assert height_slope(P, 0.0) == math.inf
    assert TABLE.slopes[0] == 0.0


@pytest.mark.parametrize("mode", ["nearest", "interpolated", "nearest_z", "linear"])
def test_inverse_exact_hits(mode):
    for th, z in TABLE.entries:
        res = inverse_angle(TABLE, z, mode)
        assert res.theta == th and not res.saturated


def test_inverse_tie_goes_to_lower_index():
    t = LookupTable((0.0, 0.5, 1.0), (10.0, 20.0, 30.0), 1.0)
    for mode in ("nearest", "nearest_z"):
        assert inverse_angle(t, 15.0, mode).theta == 0.0
        assert inverse_angle(t, 25.0, mode).theta == 0.5
        assert inverse_angle_many(t, [15.0, 25.0], mode).tolist() == [0.0, 0.5]


def test_nearest_at_z_midpoint_of_model_table():
    # Z is concave, so the z-midpoint sits below the Theta-midpoint height: lower entry wins
    for k in range(TABLE.n - 1):
        zm = (TABLE.zs[k] + TABLE.zs[k + 1]) / 2
        assert inverse_angle(TABLE, zm, "nearest").theta == TABLE.thetas[k]


def test_nearest_picks_closest_theta_node():
    # just either side of each Theta-midpoint
    for k in range(TABLE.n - 1):
        mid = (TABLE.thetas[k] + TABLE.thetas[k + 1]) / 2
        below = inverse_angle(TABLE, forward_height(P, mid - 1e-6), "nearest").theta
        above = inverse_angle(TABLE, forward_height(P, mid + 1e-6), "nearest").theta
        assert (below, above) == (TABLE.thetas[k], TABLE.thetas[k + 1])


def test_literal_modes_degrade_at_branch_point():
    # z-distance selection and straight-line interpolation both suffer in the first interval
    t = 0.008
    z = forward_height(P, t)
    assert abs(inverse_angle(TABLE, z, "nearest_z").theta - t) > TABLE.step / 2
    lin = inverse_angle(TABLE, z, "linear").theta
    assert abs(forward_height(P, lin) - z) > 0.25
    herm = inverse_angle(TABLE, z, "interpolated").theta
    assert abs(forward_height(P, herm) - z) < 0.25


def test_inverse_saturates():
    lo = inverse_angle(TABLE, 100.0)
    hi = inverse_angle(TABLE, 400.0, "interpolated")
    assert lo == (0.0, True) and hi == (1.0, True)


def test_inverse_bad_mode():
    with pytest.raises(ValueError):
        inverse_angle(TABLE, 150.0, "cubic")
    with pytest.raises(ValueError):
        inverse_angle_many(TABLE, [150.0], "cubic")


def test_hand_built_table_fallbacks():
    t = LookupTable((0.0, 0.5, 1.0), (10.0, 20.0, 40.0), 1.0)
    assert t.z_mids == (15.0, 30.0)
    assert t.slopes == pytest.approx((0.05, 0.0375, 0.025))
    with pytest.raises(InvalidParamsError):
        LookupTable((0.0, 1.0), (1.0, 2.0), 1.0, z_mids=(1.5, 1.6))


def test_roundtrip_nearest_brute_force():
    rng = np.random.default_rng(1234)
    thetas = rng.uniform(0.0, 1.0, 1000)
    half_step = 1.0 / 44 / 2
    for t in thetas:
        got = inverse_angle(TABLE, forward_height(P, t), "nearest").theta
        # brute force: closest node in theta must be within half a step
        assert abs(got - t) <= half_step + 1e-12


def test_roundtrip_interpolated_height():
    for t in np.linspace(0.0, 1.0, 2001):
        th = inverse_angle(TABLE, forward_height(P, t), "interpolated").theta
        assert abs(forward_height(P, th) - forward_height(P, t)) <= 0.25


@settings(max_examples=200)
@given(st.floats(100.0, 250.0))
def test_vectorised_inverse_agrees(z):
    for mode in ("nearest", "interpolated", "nearest_z", "linear"):
        assert inverse_angle_many(TABLE, [z], mode)[0] == pytest.approx(inverse_angle(TABLE, z, mode).theta, abs=1e-12)


def test_table_csv(tmp_path):
    p = tmp_path / "table.csv"
    TABLE.to_csv(p)
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["theta_rad", "z_mm"]
    assert len(rows) == 46
    assert rows[1] == ["0", "135.255012"]
    assert float(rows[-1][1]) == pytest.approx(Z_AT_1, rel=1e-8)
