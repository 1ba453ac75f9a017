"""Engine defaults, config-file loading, and environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional


@dataclass
class EngineConfig:
    host: str = "127.0.0.1"
    port: int = 8642
    mode: str = "fast"  # "fast" | "realtime"
    tick_rate: int = 60
    poll_interval: float = 0.01
    position_tolerance: float = 10.0
    heading_tolerance: float = 45.0
    message_max_chars: int = 128
    map_path: Optional[str] = None
    task_path: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


_ENV_FIELDS = {
    "CITYNAV_HOST": ("host", str),
    "CITYNAV_PORT": ("port", int),
    "CITYNAV_MODE": ("mode", str),
    "CITYNAV_MAP": ("map_path", str),
    "CITYNAV_TASK": ("task_path", str),
}


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> EngineConfig:
    """Defaults, then config file, then CITYNAV_* env vars, then CLI overrides."""
    cfg = EngineConfig()
    if path:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key: {key!r}")
            setattr(cfg, key, value)
    for env, (attr, cast) in _ENV_FIELDS.items():
        if env in os.environ:
            setattr(cfg, attr, cast(os.environ[env]))
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    if cfg.mode not in ("fast", "realtime"):
        raise ValueError(f"mode must be 'fast' or 'realtime', got {cfg.mode!r}")
    return cfg
