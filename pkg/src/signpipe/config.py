"""Pipeline configuration with layered sources.

Precedence, highest first: command-line flags, ``SIGNPIPE_*`` environment
variables, JSON config file, built-in defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

ENV_PREFIX = "SIGNPIPE_"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    multi_person_tolerance: float = 0.0
    target_resolution: int = 224
    decimate: bool = True
    shoulder_epsilon: float = 1e-6
    local_epsilon: float = 1e-9
    out_dir: str = "features"
    jobs: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.multi_person_tolerance <= 1.0:
            raise ConfigError(
                f"multi_person_tolerance {self.multi_person_tolerance} outside [0, 1]"
            )
        if self.target_resolution < 1:
            raise ConfigError(f"target_resolution {self.target_resolution} < 1")
        if not self.shoulder_epsilon > 0:
            raise ConfigError(f"shoulder_epsilon {self.shoulder_epsilon} not > 0")
        if not self.local_epsilon > 0:
            raise ConfigError(f"local_epsilon {self.local_epsilon} not > 0")
        if self.jobs < 1:
            raise ConfigError(f"jobs {self.jobs} < 1")

    def to_json(self) -> str:
        return json.dumps(
            {f.name: getattr(self, f.name) for f in fields(self)}, indent=2
        ) + "\n"


_FIELD_TYPES = {
    "multi_person_tolerance": float,
    "target_resolution": int,
    "decimate": bool,
    "shoulder_epsilon": float,
    "local_epsilon": float,
    "out_dir": str,
    "jobs": int,
}


def _coerce(name: str, value: Any) -> Any:
    want = _FIELD_TYPES[name]
    if want is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
        raise ConfigError(f"{name}: {value!r} is not a boolean")
    if want is int:
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ConfigError(f"{name}: {value!r} is not an integer")
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name}: {value!r} is not an integer")
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"{name}: {value!r} is not a number")
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{name}: {value!r} is not a number")
    return str(value)


def _from_file(path: str | Path) -> dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return {name: _coerce(name, value) for name, value in raw.items()}


def _from_env(environ: Mapping[str, str]) -> dict[str, Any]:
    values = {}
    for name in _FIELD_TYPES:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            values[name] = _coerce(name, environ[key])
    return values


def load_config(
    config_path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> PipelineConfig:
    """Build a config from defaults, then file, then environment, then
    explicit overrides (flag values), later layers winning."""
    merged: dict[str, Any] = {}
    if config_path is not None:
        merged.update(_from_file(config_path))
    merged.update(_from_env(os.environ if environ is None else environ))
    if overrides:
        unknown = set(overrides) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        merged.update(
            {name: _coerce(name, value) for name, value in overrides.items()
             if value is not None}
        )
    return PipelineConfig(**merged)
