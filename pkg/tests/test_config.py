import pytest

from femtocoop.config import ConfigError, from_dict, load_config, parse_env, to_dict


def _write(tmp_path, text):
    p = tmp_path / "s.yaml"
    p.write_text(text)
    return p


def test_missing_required_key(tmp_path):
    with pytest.raises(ConfigError, match="N: required key is missing"):
        load_config(_write(tmp_path, "M: 3\n"), environ={})


def test_errors_name_key_and_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, "N: 2\nM: 3\ndelta: 1.5\n"), environ={})
    assert exc.value.key == "delta" and exc.value.line == 3
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, "N: 2\nM: 3\ncooperation:\n  d2d_range: -1\n"), environ={})
    assert exc.value.key == "cooperation.d2d_range" and exc.value.line == 4
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(_write(tmp_path, "N: 2\nM: 3\nbogus: 1\n"), environ={})


def test_syntax_error_reports_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, "N: 2\nM: [3\n"), environ={})
    assert exc.value.line is not None


def test_env_overrides_file(tmp_path):
    path = _write(tmp_path, "N: 2\nM: 3\ncooperation:\n  d2d_range: 80\n")
    env = {"FEMTOCOOP_N": "4", "FEMTOCOOP_COOPERATION__D2D_RANGE": "50", "OTHER": "x"}
    cfg = load_config(path, environ=env)
    assert cfg.N == 4 and cfg.cooperation.d2d_range == 50.0
    assert parse_env(env) == {"N": 4, "cooperation.d2d_range": 50}


def test_axes_validation():
    with pytest.raises(ConfigError, match="unknown axis"):
        from_dict({"N": 1, "M": 1, "axes": {"speed": [1]}})
    with pytest.raises(ConfigError, match="non-empty list"):
        from_dict({"N": 1, "M": 1, "axes": {"M": []}})
    assert from_dict({"N": 1, "M": 1, "axes": {"M": [1, 2]}}).axes == {"M": [1, 2]}


def test_policy_aliases_and_choices():
    assert from_dict({"N": 1, "M": 1, "access_policy": "coop"}).access_policy == "cooperative"
    with pytest.raises(ConfigError, match="access_policy"):
        from_dict({"N": 1, "M": 1, "access_policy": "hybrid"})


def test_roundtrip_and_overrides():
    cfg = from_dict({"N": 2, "M": 3, "cluster": [800, 0, 80], "lease": {"beta_step": 0.02}})
    assert from_dict(to_dict(cfg)) == cfg
    assert cfg.with_overrides(**{"cooperation.group_candidates": 2}).cooperation.group_candidates == 2
    assert cfg.p_max == pytest.approx(0.1)
    assert cfg.gamma_m == pytest.approx(10.0)


def test_subchannel_pool_must_cover_mues():
    with pytest.raises(ConfigError, match="n_subchannels"):
        from_dict({"N": 1, "M": 5, "n_subchannels": 4})
