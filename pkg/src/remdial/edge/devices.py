"""Sensor and actuator contracts plus placeholder media byte builders.

Placeholder media carries correct container headers (RIFF/WAVE, JFIF with
real dimensions) but no synthesized content: audio is silence, images are
header-only JPEG shells. A transcript can ride in a trailing RIFF chunk so
deterministic mock pipelines can recover the scripted utterance from the
actual uploaded bytes.
"""

from __future__ import annotations

import struct
from typing import Callable, Mapping, Protocol, runtime_checkable

_TRANSCRIPT_CHUNK = b"txt "
_MAX_SILENCE_S = 30.0


def make_placeholder_wav(
    duration_s: float,
    *,
    sample_rate_hz: int = 16000,
    transcript: str | None = None,
) -> bytes:
    """Build a valid 16-bit mono WAV of silence, optionally with a transcript chunk."""
    pcm_len = 2 * int(min(max(duration_s, 0.0), _MAX_SILENCE_S) * sample_rate_hz)
    fmt = struct.pack("<HHIIHH", 1, 1, sample_rate_hz, sample_rate_hz * 2, 2, 16)
    chunks = [(b"fmt ", fmt), (b"data", b"\x00" * pcm_len)]
    if transcript is not None:
        chunks.append((_TRANSCRIPT_CHUNK, transcript.encode("utf-8")))
    body = b"WAVE"
    for tag, payload in chunks:
        body += tag + struct.pack("<I", len(payload)) + payload
        if len(payload) % 2:
            body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def parse_wav(data: bytes) -> tuple[float, str | None]:
    """Return (pcm duration seconds, embedded transcript or None).

    Raises ValueError on anything that is not a RIFF/WAVE container.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError("not a RIFF/WAVE container")
    pos = 12
    sample_rate = None
    pcm_len = 0
    transcript: str | None = None
    while pos + 8 <= len(data):
        tag = data[pos : pos + 4]
        (length,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8 : pos + 8 + length]
        if tag == b"fmt " and length >= 16:
            _, _, sample_rate, _, _, _ = struct.unpack_from("<HHIIHH", payload)
        elif tag == b"data":
            pcm_len = length
        elif tag == _TRANSCRIPT_CHUNK:
            transcript = payload.decode("utf-8")
        pos += 8 + length + (length % 2)
    if not sample_rate:
        raise ValueError("missing fmt chunk")
    return pcm_len / (2.0 * sample_rate), transcript


def make_placeholder_jpeg(width: int = 640, height: int = 480) -> bytes:
    """Header-only JPEG shell declaring the given frame dimensions."""
    app0 = b"\xff\xe0" + struct.pack(">H", 16) + b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"
    sof0 = (
        b"\xff\xc0"
        + struct.pack(">H", 17)
        + b"\x08"
        + struct.pack(">HH", height, width)
        + b"\x03\x01\x22\x00\x02\x11\x01\x03\x11\x01"
    )
    return b"\xff\xd8" + app0 + sof0 + b"\xff\xd9"


def parse_jpeg_dimensions(data: bytes) -> tuple[int, int]:
    """Return (width, height) from the first SOF0 marker; ValueError otherwise."""
    if data[:2] != b"\xff\xd8":
        raise ValueError("not a JPEG stream")
    pos = 2
    while pos + 4 <= len(data):
        if data[pos] != 0xFF:
            raise ValueError("marker desync")
        marker = data[pos + 1]
        if marker == 0xD9:
            break
        (length,) = struct.unpack_from(">H", data, pos + 2)
        if marker == 0xC0:
            height, width = struct.unpack_from(">HH", data, pos + 5)
            return width, height
        pos += 2 + length
    raise ValueError("missing SOF0 marker")


# ---------------------------------------------------------------------------
# device contracts


@runtime_checkable
class Microphone(Protocol):
    def start(self) -> None: ...
    def stop(self) -> bytes: ...


@runtime_checkable
class Camera(Protocol):
    def capture(self) -> bytes: ...


@runtime_checkable
class SpeechPlayer(Protocol):
    def play(self, text: str, speed_factor: float) -> float:
        """Begin speaking; returns the playback duration in seconds."""
        ...


@runtime_checkable
class Display(Protocol):
    def show(self, kind: str, text: str) -> None: ...


NonverbalCue = Callable[[str], None]


class Actuators:
    """Feedback outputs: speech, display, and optional named nonverbal cues."""

    def __init__(
        self,
        speech: SpeechPlayer,
        display: Display,
        cues: Mapping[str, NonverbalCue] | None = None,
    ):
        self.speech = speech
        self.display = display
        self.cues = dict(cues or {})

    def cue(self, name: str) -> None:
        fn = self.cues.get(name)
        if fn is not None:
            fn(name)
