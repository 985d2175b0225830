import json

import pytest

from mofu.config import ConfigError, default_config, merge, parse_override, resolve


def test_defaults_build():
    st = resolve()
    assert st.jitterbug.r_a == 56.6 and st.table_n == 45 and st.theta_max == 1.0
    assert st.sim().dt == pytest.approx(0.1)
    assert st.script.seed == 0


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown config section"):
        merge(default_config(), {"motor": {}})
    with pytest.raises(ConfigError, match="unknown key pid.kx"):
        merge(default_config(), {"pid": {"kx": 1}})
    with pytest.raises(ConfigError):
        merge(default_config(), {"pid": 3})


def test_override_parsing():
    assert parse_override("pid.kp=2.5") == {"pid": {"kp": 2.5}}
    assert parse_override("sim.ideal_lift=true") == {"sim": {"ideal_lift": True}}
    assert parse_override("script.dual_period_range=[4,8]") == {"script": {"dual_period_range": [4, 8]}}
    for bad in ("pid", "kp=1", ".kp=1"):
        with pytest.raises(ConfigError):
            parse_override(bad)


def test_layering(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"pid": {"kp": 3.0}, "script": {"seed": 7}}))
    st = resolve(f, [parse_override("pid.kp=4")])
    assert st.gains.kp == 4.0 and st.script.seed == 7
    env_st = resolve(None, (), env={"MOFU_CONFIG": str(f)})
    assert env_st.gains.kp == 3.0


def test_invalid_values(tmp_path):
    with pytest.raises(ConfigError):
        resolve(None, [parse_override("drive.track=-1")])
    with pytest.raises(ConfigError):
        resolve(None, [parse_override("table.n=1")])
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match=":1:"):
        resolve(bad)
    with pytest.raises(ConfigError):
        resolve(tmp_path / "missing.json")
