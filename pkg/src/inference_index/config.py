"""Harness configuration: one JSON document covering indices, forecasting,
endpoints and the local service.

Layout::

    {
      "index":    { ... IndexConfig fields ... },
      "forecast": { ... ForecastConfig fields ... },
      "endpoints": { "<name>": { ... EndpointSpec fields ... }, ... },
      "service":  { "bind_address": "...", "port": 8377, "data_dir": "..." }
    }

Every section is optional; omitted fields take their defaults. CLI flags
override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .forecaster import ForecastConfig
from .indices import IndexConfig
from .llm_client import EndpointSpec


class ConfigError(Exception):
    """The configuration file is malformed or inconsistent."""


@dataclass
class ServiceConfig:
    bind_address: str = "127.0.0.1"
    port: int = 8377
    data_dir: Path = Path("ini-data")

    def __post_init__(self) -> None:
        if not 0 < self.port < 65536:
            raise ConfigError(f"port must be in (0, 65536), got {self.port}")
        self.data_dir = Path(self.data_dir)


@dataclass
class HarnessConfig:
    index: IndexConfig = field(default_factory=IndexConfig)
    forecast: ForecastConfig = field(default_factory=ForecastConfig)
    endpoints: dict[str, EndpointSpec] = field(default_factory=dict)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def endpoint(self, name: str) -> EndpointSpec:
        try:
            return self.endpoints[name]
        except KeyError:
            raise ConfigError(
                f"unknown endpoint {name!r}; configured endpoints: {sorted(self.endpoints)}"
            ) from None


def load_config(path: str | Path | None) -> HarnessConfig:
    """Load the harness config; a missing path means all defaults."""
    if path is None:
        return HarnessConfig()
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        index = IndexConfig.from_dict(raw.get("index", {}))
        forecast = ForecastConfig.from_dict(raw.get("forecast", {}))
        endpoints = {
            name: EndpointSpec.from_dict(spec) for name, spec in raw.get("endpoints", {}).items()
        }
        service_raw = raw.get("service", {})
        service = ServiceConfig(
            bind_address=service_raw.get("bind_address", "127.0.0.1"),
            port=service_raw.get("port", 8377),
            data_dir=Path(service_raw.get("data_dir", "ini-data")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return HarnessConfig(index=index, forecast=forecast, endpoints=endpoints, service=service)
