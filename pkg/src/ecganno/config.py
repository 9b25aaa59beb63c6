"""Server configuration: TOML file, environment, explicit overrides.

Precedence, lowest to highest: built-in defaults, config file,
ECGANNO_* environment variables, explicit flag overrides.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import tomli

ENV_PREFIX = "ECGANNO_"
CONFIG_ENV_VAR = "ECGANNO_CONFIG"


@dataclass(frozen=True)
class ServerConfig:
    data_dir: str = "./data"
    host: str = "127.0.0.1"
    port: int = 8000
    session_hours: float = 24.0
    static_dir: str | None = None


_FIELD_TYPES = {f.name: f.type for f in fields(ServerConfig)}


def _coerce(name: str, value):
    if name == "port":
        return int(value)
    if name == "session_hours":
        return float(value)
    return str(value)


def load_config(
    config_path: str | None = None,
    env: dict | None = None,
    **overrides,
) -> ServerConfig:
    """Resolve the effective configuration.

    config_path falls back to $ECGANNO_CONFIG; a path given either way
    must exist. Unknown keys in the file are rejected loudly.
    """
    env = dict(os.environ if env is None else env)
    values: dict = {}

    path = config_path or env.get(CONFIG_ENV_VAR)
    if path:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file {path} does not exist")
        with open(p, "rb") as f:
            doc = tomli.load(f)
        for key, value in doc.items():
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r} in {path}")
            values[key] = _coerce(key, value)

    for name in _FIELD_TYPES:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = _coerce(name, env[env_key])

    for name, value in overrides.items():
        if name not in _FIELD_TYPES:
            raise ValueError(f"unknown config override {name!r}")
        if value is not None:
            values[name] = _coerce(name, value)

    return ServerConfig(**values)
