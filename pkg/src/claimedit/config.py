"""Run configuration: defaults, JSON config file, env vars, CLI flags.

Precedence is CLI flag > environment > config file > default. Unknown
keys anywhere in the config file are rejected rather than ignored, so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .clients import ClientBundle, ClientConfig, make_fixture_clients, make_http_clients
from .errors import ConfigError

ENV_PREFIX = "CLAIMEDIT_"
SERVICE_NAMES = ("generation", "fused", "scorer", "nli", "search")

_KNOB_TYPES: dict[str, type] = {
    "budget": int,
    "slots": int,
    "gold_cap": int,
    "threshold": float,
    "query_cap": int,
    "top_pages": int,
    "window": int,
    "stride": int,
    "parallelism": int,
    "seed": int,
    "fixtures": str,
}

_CLIENT_FIELD_TYPES: dict[str, type] = {
    "base_url": str,
    "api_key": str,
    "timeout": float,
    "max_retries": int,
    "backoff_base": float,
    "parallelism_limit": int,
}


@dataclass
class RunConfig:
    budget: int = 5
    slots: int = 4
    gold_cap: int = 4
    threshold: float = 0.5
    query_cap: int = 5
    top_pages: int = 5
    window: int = 128
    stride: int = 64
    parallelism: int = 4
    seed: int = 0
    fixtures: str | None = None
    clients: dict[str, dict[str, Any]] | None = None

    def validate(self) -> "RunConfig":
        checks = [
            (1 <= self.budget <= 5, "budget must be in 1..5"),
            (self.slots >= 1, "slots must be >= 1"),
            (1 <= self.gold_cap <= 4, "gold_cap must be in 1..4"),
            (math.isfinite(self.threshold), "threshold must be finite"),
            (self.query_cap >= 1, "query_cap must be >= 1"),
            (self.top_pages >= 1, "top_pages must be >= 1"),
            (self.window >= self.stride >= 1, "window >= stride >= 1 required"),
            (self.parallelism >= 1, "parallelism must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self


def _coerce(name: str, value: Any, target: type) -> Any:
    try:
        if target is int:
            return int(value)
        if target is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def _load_config_file(path: str | Path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    for key in data:
        if key != "clients" and key not in _KNOB_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
    clients = data.get("clients", {})
    if not isinstance(clients, dict):
        raise ConfigError("'clients' must be an object")
    for service, cfg in clients.items():
        if service not in SERVICE_NAMES:
            raise ConfigError(f"unknown client service {service!r}")
        for key in cfg:
            if key not in _CLIENT_FIELD_TYPES:
                raise ConfigError(f"unknown client config key {service}.{key}")
    return data


def _env_knobs(environ: Mapping[str, str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in _KNOB_TYPES:
        env_name = ENV_PREFIX + name.upper()
        if env_name in environ:
            out[name] = environ[env_name]
    return out


def load_run_config(
    config_path: str | Path | None = None,
    flag_overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge defaults, config file, env vars, and CLI flags in that order."""
    environ = os.environ if environ is None else environ
    merged: dict[str, Any] = {}
    file_data = _load_config_file(config_path) if config_path else {}
    merged.update({k: v for k, v in file_data.items() if k != "clients"})
    merged.update(_env_knobs(environ))
    for key, value in (flag_overrides or {}).items():
        if value is not None:
            merged[key] = value

    config = RunConfig(clients=file_data.get("clients"))
    for f in fields(RunConfig):
        if f.name == "clients" or f.name not in merged:
            continue
        setattr(config, f.name, _coerce(f.name, merged[f.name], _KNOB_TYPES[f.name]))
    return config.validate()


def _service_config(service: str, config: RunConfig, environ: Mapping[str, str]) -> ClientConfig:
    settings: dict[str, Any] = {}
    if config.clients and service in config.clients:
        settings.update(config.clients[service])
    upper = service.upper()
    if ENV_PREFIX + upper + "_URL" in environ:
        settings["base_url"] = environ[ENV_PREFIX + upper + "_URL"]
    if ENV_PREFIX + upper + "_KEY" in environ:
        settings["api_key"] = environ[ENV_PREFIX + upper + "_KEY"]
    if not settings.get("base_url"):
        raise ConfigError(
            f"service {service!r} needs a base_url (config file clients.{service}.base_url "
            f"or {ENV_PREFIX}{upper}_URL) unless --fixtures is used"
        )
    typed = {k: _coerce(f"{service}.{k}", v, _CLIENT_FIELD_TYPES[k]) for k, v in settings.items()}
    return ClientConfig(**typed)


def build_clients(config: RunConfig, environ: Mapping[str, str] | None = None) -> ClientBundle:
    """Fixture clients when --fixtures is set, HTTP clients otherwise."""
    environ = os.environ if environ is None else environ
    if config.fixtures:
        path = Path(config.fixtures)
        if not path.exists():
            raise ConfigError(f"fixtures file not found: {path}")
        return make_fixture_clients(path)
    return make_http_clients({s: _service_config(s, config, environ) for s in SERVICE_NAMES})
