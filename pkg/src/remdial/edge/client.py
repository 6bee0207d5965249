"""Edge client: polling loop, capture lifecycle, uploads, and feedback.

One loop drives everything. Each cycle polls the host, mirrors display
state, executes at most one newly pending command (dedup by state token),
and samples camera frames. Capture is gated by session activity: frames are
appended to the open capture while recording and sampled ambiently during
robot playback, so repeated listening keeps its visual context.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..clock import Clock, VirtualClock, WallClock
from ..model import JSONDict, sha256_hex
from ..wire import (
    Command,
    CommandKind,
    NoticeKind,
    UploadNotice,
    image_file_name,
    recording_file_name,
)
from .config import EdgeConfig
from .devices import Actuators, Camera, Microphone
from .transport import HostTransport, TransportError

HOOK_NAMES = ("onLoad", "onStart", "onStop", "onUnload")


class CapturePhase(str, Enum):
    CAPTURING = "capturing"
    FINALIZING = "finalizing"
    UPLOADED = "uploaded"
    FLAGGED = "flagged"


@dataclass
class CaptureSession:
    """Media gathered for one turn between start- and stop-recording."""

    turn_index: int
    started_at: float
    phase: CapturePhase = CapturePhase.CAPTURING
    frames: list[tuple[float, bytes]] = field(default_factory=list)
    audio: bytes | None = None
    stopped_at: float | None = None


@dataclass(frozen=True)
class FlaggedCapture:
    """A finalized capture whose uploads never fully succeeded; retained locally."""

    turn_index: int
    files: dict[str, bytes]
    reason: str


@dataclass(frozen=True)
class EdgeEvent:
    t: float
    name: str
    detail: JSONDict = field(default_factory=dict)


class EdgeClient:
    def __init__(
        self,
        config: EdgeConfig,
        transport: HostTransport,
        microphone: Microphone,
        camera: Camera,
        actuators: Actuators,
        *,
        clock: Clock | None = None,
        hooks: dict[str, object] | None = None,
    ):
        self.config = config
        self.transport = transport
        self.microphone = microphone
        self.camera = camera
        self.actuators = actuators
        self.clock = clock or WallClock()
        self.hooks = dict(hooks or {})
        self.events: list[EdgeEvent] = []
        self.capture: CaptureSession | None = None
        self.captures: list[CaptureSession] = []
        self.flagged: list[FlaggedCapture] = []
        self.uploaded: dict[str, str] = {}  # file name -> checksum
        self.last_response_text: str | None = None
        self._session_id: str | None = None
        self._last_exec_token = 0
        self._shown_text: str | None = None
        self._playback_until: float | None = None
        self._next_frame_at: float | None = None
        self._running = False
        self._loaded = False
        self._session_started = False
        self._unloaded = False

    # -- lifecycle hooks ----------------------------------------------------

    def _fire(self, name: str) -> None:
        if name == "onStart":
            if self._session_started:
                self._log("hook_rejected", {"hook": name, "reason": "already started"})
                return
            self._session_started = True
        if name == "onStop":
            if not self._session_started:
                return
            self._session_started = False
        self._log("hook", {"hook": name})
        fn = self.hooks.get(name)
        if fn is None:
            return
        try:
            fn()
        except Exception as exc:  # hooks must never break the loop
            self._log("hook_error", {"hook": name, "error": str(exc)})

    def _log(self, name: str, detail: JSONDict | None = None) -> None:
        self.events.append(EdgeEvent(self.clock.now(), name, detail or {}))

    # -- loop drivers -------------------------------------------------------

    def run(self) -> None:
        """Blocking loop for wall-clock deployments; returns after home/ended."""
        self._ensure_loaded()
        self._running = True
        try:
            while self._running:
                self.step()
                if self._running:
                    self.clock.sleep(self.config.poll_interval_s)
        finally:
            self._ensure_unloaded()

    def start(self, clock: VirtualClock) -> None:
        """Self-scheduling loop on a virtual clock; used by the simulation."""
        self._ensure_loaded()
        self._running = True

        def tick() -> None:
            if not self._running:
                self._ensure_unloaded()
                return
            self.step()
            clock.schedule(self.config.poll_interval_s, tick)

        clock.schedule(self.config.poll_interval_s, tick)

    def shutdown(self) -> None:
        self._running = False
        self._ensure_unloaded()

    def _ensure_loaded(self) -> None:
        if not self._loaded:
            self._loaded = True
            self._fire("onLoad")

    def _ensure_unloaded(self) -> None:
        if self._loaded and not self._unloaded:
            self._unloaded = True
            self._fire("onUnload")

    # -- one poll cycle -----------------------------------------------------

    def step(self) -> None:
        try:
            # anonymous until the first executed command reveals the session;
            # afterwards a targeted poll still sees the session once it has
            # ended and stopped being the host's active one
            response = self.transport.poll(self._session_id)
        except TransportError as exc:
            self._log("poll_failed", {"error": str(exc)})
            return
        state = response.session_state
        if not self._session_started and state not in ("idle", "ended"):
            self._fire("onStart")
        if response.display_text != self._shown_text:
            self._shown_text = response.display_text
            self.actuators.display.show("text", response.display_text or "")
            self._log("display_updated", {"text": response.display_text})
        pending = response.pending_command
        if pending is not None and response.state_token > self._last_exec_token:
            self._last_exec_token = response.state_token
            self.execute(pending)
        self._sample_frames()
        if state == "ended" and self._session_started:
            self._fire("onStop")
            self._running = False

    def execute(self, command: Command) -> None:
        """Perform one host-issued command exactly once."""
        self._session_id = command.session_id
        now = self.clock.now()
        self._log("command_executed", {"kind": command.kind.value, "turn_index": command.turn_index})
        if command.kind is CommandKind.START_RECORDING:
            self.microphone.start()
            self.capture = CaptureSession(command.turn_index or 1, now)
            self.captures.append(self.capture)
            self._capture_frame(now)
            self._next_frame_at = now + self.config.frame_interval_s
        elif command.kind is CommandKind.STOP_RECORDING:
            if self.capture is not None and self.capture.phase is CapturePhase.CAPTURING:
                self.capture.audio = self.microphone.stop()
                self.capture.stopped_at = now
                self.capture.phase = CapturePhase.FINALIZING
                self._next_frame_at = None
                self._finalize_and_upload(self.capture)
        elif command.kind is CommandKind.SPEAK_RESPONSE:
            self._play(command.payload or "", 1.0)
        elif command.kind is CommandKind.PLAY_RESPONSE:
            text = command.payload or self.last_response_text
            if text is None:
                self._log("playback_skipped", {"reason": "no retained response"})
            else:
                self._play(text, self.config.speed_factor)
        elif command.kind is CommandKind.HOME:
            self._fire("onStop")
            self._running = False

    def _play(self, text: str, speed_factor: float) -> None:
        """Start speech and update the display within the same cycle."""
        now = self.clock.now()
        self.actuators.display.show("speech", text)
        duration = self.actuators.speech.play(text, speed_factor)
        self.last_response_text = text
        self._playback_until = now + duration
        if self._next_frame_at is None:
            self._next_frame_at = now + self.config.frame_interval_s
        self._log(
            "playback_started",
            {"speed_factor": round(speed_factor, 6), "duration_s": round(duration, 6)},
        )

    # -- frames -------------------------------------------------------------

    def _sampling_active(self, now: float) -> bool:
        if self.capture is not None and self.capture.phase is CapturePhase.CAPTURING:
            return True
        return self._playback_until is not None and now <= self._playback_until

    def _sample_frames(self) -> None:
        now = self.clock.now()
        if self._next_frame_at is None:
            return
        if not self._sampling_active(now):
            if self._playback_until is not None and now > self._playback_until:
                self._playback_until = None
                self._next_frame_at = None
            return
        while self._next_frame_at is not None and now >= self._next_frame_at:
            self._capture_frame(now)
            self._next_frame_at += self.config.frame_interval_s

    def _capture_frame(self, at: float) -> None:
        data = self.camera.capture()
        if self.capture is not None and self.capture.phase is CapturePhase.CAPTURING:
            self.capture.frames.append((at, data))
            self._log("frame_captured", {"turn_index": self.capture.turn_index, "t": round(at, 6)})
        else:
            self._log("frame_sampled_ambient", {"t": round(at, 6)})

    # -- uploads ------------------------------------------------------------

    def _finalize_and_upload(self, capture: CaptureSession) -> None:
        """Push every finalized file to the host; images first, audio last.

        The audio notice doubles as the capture-complete signal, so it must
        trail the image uploads. Failed files are retained and flagged; a
        finalized capture is never silently dropped.
        """
        session_id = self._session_id or ""
        turn = capture.turn_index
        failed: dict[str, bytes] = {}
        reasons: list[str] = []
        for seq, (_, frame) in enumerate(capture.frames, start=1):
            name = image_file_name(turn, seq)
            if not self._upload_one(session_id, turn, name, frame, NoticeKind.IMAGE_READY):
                failed[name] = frame
                reasons.append(name)
        audio = capture.audio or b""
        audio_name = recording_file_name(turn)
        if not self._upload_one(session_id, turn, audio_name, audio, NoticeKind.AUDIO_READY):
            failed[audio_name] = audio
            reasons.append(audio_name)
        if failed:
            capture.phase = CapturePhase.FLAGGED
            self.flagged.append(
                FlaggedCapture(turn, failed, f"upload failed after retries: {', '.join(reasons)}")
            )
            self._log("capture_flagged", {"turn_index": turn, "files": sorted(failed)})
        else:
            capture.phase = CapturePhase.UPLOADED
            self._log("capture_uploaded", {"turn_index": turn, "files": len(capture.frames) + 1})

    def _upload_one(
        self, session_id: str, turn: int, name: str, data: bytes, kind: NoticeKind
    ) -> bool:
        notice = UploadNotice(
            kind=kind,
            session_id=session_id,
            turn_index=turn,
            file_name=name,
            byte_length=len(data),
            checksum=sha256_hex(data),
        )
        if not self._with_retry(lambda: self.transport.upload_media(notice, data), f"media {name}"):
            return False
        poster = (
            self.transport.audio_ready if kind is NoticeKind.AUDIO_READY else self.transport.image_ready
        )
        if not self._with_retry(lambda: poster(notice), f"notice {name}"):
            return False
        self.uploaded[name] = notice.checksum
        return True

    def _with_retry(self, call, what: str) -> bool:
        delay = self.config.retry_initial_delay_s
        for attempt in range(1, self.config.retry_max_attempts + 1):
            try:
                ack = call()
            except TransportError as exc:
                self._log("transfer_retry", {"what": what, "attempt": attempt, "error": str(exc)})
            else:
                if ack.ok:
                    return True
                self._log("transfer_rejected", {"what": what, "attempt": attempt, "detail": ack.error_detail})
            if attempt < self.config.retry_max_attempts:
                self.clock.sleep(delay)
                delay *= self.config.retry_backoff
        return False
