"""Robot-side client: polling, capture, uploads, and local playback."""

from .client import (
    HOOK_NAMES,
    CapturePhase,
    CaptureSession,
    EdgeClient,
    EdgeEvent,
    FlaggedCapture,
)
from .config import EdgeConfig
from .devices import (
    Actuators,
    Camera,
    Display,
    Microphone,
    SpeechPlayer,
    make_placeholder_jpeg,
    make_placeholder_wav,
    parse_jpeg_dimensions,
    parse_wav,
)
from .transport import (
    FaultInjectingTransport,
    HostTransport,
    HttpTransport,
    InProcessTransport,
    TransportError,
)

__all__ = [
    "Actuators",
    "Camera",
    "CapturePhase",
    "CaptureSession",
    "Display",
    "EdgeClient",
    "EdgeConfig",
    "EdgeEvent",
    "FaultInjectingTransport",
    "FlaggedCapture",
    "HOOK_NAMES",
    "HostTransport",
    "HttpTransport",
    "InProcessTransport",
    "Microphone",
    "SpeechPlayer",
    "TransportError",
    "make_placeholder_jpeg",
    "make_placeholder_wav",
    "parse_jpeg_dimensions",
    "parse_wav",
]
