"""Edge client configuration with file and environment loading."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

_ENV_PREFIX = "REMDIAL_EDGE_"


@dataclass
class EdgeConfig:
    """Validated tunables for sensing cadence, feedback, and retries."""

    host_base_url: str = "http://127.0.0.1:8000"
    poll_interval_s: float = 0.05
    frame_interval_s: float = 2.0
    frame_width: int = 640
    frame_height: int = 480
    sample_rate_hz: int = 16000
    repeat_slowdown: float = 0.15
    playback_chars_per_s: float = 20.0
    retry_initial_delay_s: float = 0.1
    retry_backoff: float = 2.0
    retry_max_attempts: int = 4

    def __post_init__(self) -> None:
        if not 0 < self.poll_interval_s <= 1.0:
            raise ValueError(f"poll_interval_s must lie in (0, 1], got {self.poll_interval_s}")
        if self.frame_interval_s <= 0:
            raise ValueError("frame_interval_s must be positive")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0.10 <= self.repeat_slowdown <= 0.25:
            raise ValueError(f"repeat_slowdown must lie in [0.10, 0.25], got {self.repeat_slowdown}")
        if self.playback_chars_per_s <= 0:
            raise ValueError("playback_chars_per_s must be positive")
        if self.retry_initial_delay_s < 0 or self.retry_backoff < 1.0 or self.retry_max_attempts < 1:
            raise ValueError("retry settings out of range")

    @property
    def speed_factor(self) -> float:
        return round(1.0 - self.repeat_slowdown, 6)

    @classmethod
    def from_file(cls, path: str | Path) -> "EdgeConfig":
        raw = json.loads(Path(path).read_text("utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown edge config keys: {sorted(unknown)}")
        return cls(**raw)

    def with_env_overrides(self, environ: dict[str, str] | None = None) -> "EdgeConfig":
        """Apply REMDIAL_EDGE_* environment overrides on top of this config."""
        environ = os.environ if environ is None else environ
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for f in fields(self):
            raw = environ.get(_ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.type in ("int",):
                values[f.name] = int(raw)
            elif f.type in ("float",):
                values[f.name] = float(raw)
            else:
                values[f.name] = raw
        return EdgeConfig(**values)
