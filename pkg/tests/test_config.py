import pytest

from ecganno.config import ServerConfig, load_config


def test_defaults():
    cfg = load_config(env={})
    assert cfg == ServerConfig()
    assert cfg.port == 8000
    assert cfg.session_hours == 24.0


def test_file_values(tmp_path):
    p = tmp_path / "conf.toml"
    p.write_text('data_dir = "/srv/ecg"\nport = 9001\nsession_hours = 8.5\n')
    cfg = load_config(str(p), env={})
    assert cfg.data_dir == "/srv/ecg"
    assert cfg.port == 9001
    assert cfg.session_hours == 8.5
    assert cfg.host == "127.0.0.1"


def test_env_beats_file(tmp_path):
    p = tmp_path / "conf.toml"
    p.write_text('port = 9001\nhost = "10.0.0.1"\n')
    cfg = load_config(str(p), env={"ECGANNO_PORT": "7777"})
    assert cfg.port == 7777
    assert cfg.host == "10.0.0.1"


def test_flags_beat_env(tmp_path):
    cfg = load_config(env={"ECGANNO_PORT": "7777"}, port=1234)
    assert cfg.port == 1234


def test_none_override_is_ignored():
    cfg = load_config(env={"ECGANNO_DATA_DIR": "/from/env"}, data_dir=None)
    assert cfg.data_dir == "/from/env"


def test_config_env_var_points_at_file(tmp_path):
    p = tmp_path / "conf.toml"
    p.write_text("port = 4242\n")
    cfg = load_config(env={"ECGANNO_CONFIG": str(p)})
    assert cfg.port == 4242


def test_missing_file_is_loud(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "nope.toml"), env={})


def test_unknown_keys_are_loud(tmp_path):
    p = tmp_path / "conf.toml"
    p.write_text("listen_port = 1\n")
    with pytest.raises(ValueError):
        load_config(str(p), env={})
    with pytest.raises(ValueError):
        load_config(env={}, bogus=1)
