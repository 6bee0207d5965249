"""Deterministic stand-ins for robot peripherals."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..clock import Clock
from ..edge.devices import make_placeholder_jpeg, make_placeholder_wav


class ScriptedMicrophone:
    """Produces silence of the real elapsed duration, tagged with the next
    scripted utterance so a mock transcriber can read it back."""

    def __init__(self, clock: Clock, sample_rate_hz: int = 16000):
        self.clock = clock
        self.sample_rate_hz = sample_rate_hz
        self._queue: deque[str] = deque()
        self._started_at: float | None = None

    def feed(self, transcript: str) -> None:
        self._queue.append(transcript)

    def start(self) -> None:
        self._started_at = self.clock.now()

    def stop(self) -> bytes:
        if self._started_at is None:
            return make_placeholder_wav(0.0, sample_rate_hz=self.sample_rate_hz)
        duration = self.clock.now() - self._started_at
        self._started_at = None
        transcript = self._queue.popleft() if self._queue else None
        return make_placeholder_wav(
            duration, sample_rate_hz=self.sample_rate_hz, transcript=transcript
        )


class StaticCamera:
    def __init__(self, width: int = 640, height: int = 480):
        self.width = width
        self.height = height
        self.capture_count = 0

    def capture(self) -> bytes:
        self.capture_count += 1
        return make_placeholder_jpeg(self.width, self.height)


@dataclass
class PlayedSpeech:
    text: str
    speed_factor: float
    duration_s: float


class NullSpeechPlayer:
    """Reports a pacing-derived duration without producing sound."""

    def __init__(self, chars_per_s: float = 20.0):
        if chars_per_s <= 0:
            raise ValueError("chars_per_s must be positive")
        self.chars_per_s = chars_per_s
        self.played: list[PlayedSpeech] = []

    def play(self, text: str, speed_factor: float = 1.0) -> float:
        duration = len(text) / (self.chars_per_s * speed_factor) if text else 0.0
        self.played.append(PlayedSpeech(text, speed_factor, duration))
        return duration


@dataclass
class ShownItem:
    t: float
    kind: str
    text: str


@dataclass
class RecordingDisplay:
    clock: Clock | None = None
    shown: list[ShownItem] = field(default_factory=list)

    def show(self, kind: str, text: str) -> None:
        t = self.clock.now() if self.clock is not None else 0.0
        self.shown.append(ShownItem(t, kind, text))
