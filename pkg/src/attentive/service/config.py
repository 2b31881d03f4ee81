"""Service configuration: file + environment overrides.

The config file is JSON (TOML also accepted when the interpreter ships
``tomllib``, i.e. Python 3.11+).  Environment variables of the form
``ATTENTIVE_<FIELD>`` override file values; analytics thresholds nest
under "analytics".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from attentive.analytics.session import AnalyticsConfig

ENV_PREFIX = "ATTENTIVE_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    data_dir: str = "./attentive-data"
    cascade_path: str | None = None  # None: packaged reference cascade
    model_path: str | None = None  # None: fresh seeded (untrained) model
    model_seed: int = 42
    analytics: AnalyticsConfig = field(default_factory=AnalyticsConfig)
    max_ingest_hz: float = 4.0
    max_detect_side: int = 160
    update_interval_s: float = 1.0

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "port": self.port,
            "dataDir": self.data_dir,
            "cascadePath": self.cascade_path,
            "modelPath": self.model_path,
            "modelSeed": self.model_seed,
            "analytics": self.analytics.to_dict(),
            "maxIngestHz": self.max_ingest_hz,
            "maxDetectSide": self.max_detect_side,
            "updateIntervalS": self.update_interval_s,
        }


def _read_file(path: str) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError as exc:
            raise ValueError(
                "TOML config requires Python >= 3.11 (tomllib); use JSON instead"
            ) from exc
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_config(path: str | None = None, env: dict | None = None) -> ServiceConfig:
    env = os.environ if env is None else env
    raw = _read_file(path) if path else {}

    def pick(key: str, env_key: str, cast, default):
        if ENV_PREFIX + env_key in env:
            return cast(env[ENV_PREFIX + env_key])
        if key in raw and raw[key] is not None:
            return cast(raw[key])
        return default

    analytics_raw = dict(raw.get("analytics", {}))
    for env_key, json_key in (
        ("DISENGAGE_THRESHOLD", "disengageThreshold"),
        ("HYSTERESIS", "hysteresis"),
        ("COOLDOWN_MS", "cooldownMs"),
    ):
        if ENV_PREFIX + env_key in env:
            analytics_raw[json_key] = float(env[ENV_PREFIX + env_key])

    return ServiceConfig(
        host=pick("host", "HOST", str, "127.0.0.1"),
        port=pick("port", "PORT", int, 8077),
        data_dir=pick("dataDir", "DATA_DIR", str, "./attentive-data"),
        cascade_path=pick("cascadePath", "CASCADE_PATH", str, None),
        model_path=pick("modelPath", "MODEL_PATH", str, None),
        model_seed=pick("modelSeed", "MODEL_SEED", int, 42),
        analytics=AnalyticsConfig.from_dict(analytics_raw),
        max_ingest_hz=pick("maxIngestHz", "MAX_INGEST_HZ", float, 4.0),
        max_detect_side=pick("maxDetectSide", "MAX_DETECT_SIDE", int, 160),
        update_interval_s=pick("updateIntervalS", "UPDATE_INTERVAL_S", float, 1.0),
    )
