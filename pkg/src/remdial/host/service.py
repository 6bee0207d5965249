"""Host orchestrator: per-session command handling, turn pipeline, and logs.

The service is transport-agnostic. HTTP bindings (``remdial.host.app``) and
the in-process transport used by the simulation both call the same methods.
Time is injected; under the virtual clock, backend mocks sleep and the
resulting timestamps are exact.

Clock policy: console-originated commands are stamped on receipt, and
edge-originated happenings (capture start/end, uploads) are stamped when
their wire message reaches the host, so a single host clock orders every
event. Playback completion is host-scheduled from the synthesis-reported
duration; the fixed endpoint table has no playback-ack route.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..clock import Clock, WallClock
from ..model import (
    JSONDict,
    LatencyTrace,
    RobotSetup,
    SessionRecord,
    TurnRecord,
    TurnTimestamps,
    UserProfile,
    derive_latency,
    first_use_order,
    quantize,
    sha256_hex,
)
from ..wire import (
    Ack,
    Command,
    CommandKind,
    NoticeKind,
    PollResponse,
    UploadNotice,
    IMAGE_NAME_RE,
)
from . import machine
from .backends import BackendFailure, BackendSuite
from .machine import (
    ApologySpoken,
    CaptureStarted,
    CaptureStopped,
    Effect,
    InternalEvent,
    PipelineStarted,
    PlaybackRequested,
    RejectedCommand,
    SessionEnded,
    SessionPhase,
    SessionState,
    TriggerShown,
    TurnCompleted,
)
from .prompt import assemble_prompt, select_turn_images


@dataclass
class HostConfig:
    """Tunable orchestrator parameters; defaults mirror the desk deployment."""

    robot_setup: RobotSetup = RobotSetup.SETUP_II
    history_window: int = 6
    repeat_slowdown: float = 0.15
    frame_interval_s: float = 2.0
    max_prompt_images: int = 3
    min_image_spacing_s: float = 2.0
    upload_timeout_s: float = 30.0
    processing_jitter_s: float = 0.0
    jitter_seed: int = 0
    state_display_names: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.10 <= self.repeat_slowdown <= 0.25:
            raise ValueError(f"repeat_slowdown must lie in [0.10, 0.25], got {self.repeat_slowdown}")
        if self.history_window < 1:
            raise ValueError("history_window must be >= 1")
        if self.frame_interval_s <= 0 or self.upload_timeout_s <= 0:
            raise ValueError("intervals must be positive")
        self.robot_setup = RobotSetup(self.robot_setup)

    @property
    def speed_factor(self) -> float:
        """Repeat playback speed factor; slowdown 10-25% maps to [0.75, 0.90]."""
        return quantize(1.0 - self.repeat_slowdown)

    def display_name(self, phase: SessionPhase) -> str:
        return self.state_display_names.get(phase.value, phase.value)


@dataclass(frozen=True)
class SessionEvent:
    """One trace entry; the event log is the authoritative session history."""

    t: float
    actor: str
    name: str
    detail: JSONDict = field(default_factory=dict)

    def to_json_dict(self) -> JSONDict:
        return {"t": quantize(self.t), "actor": self.actor, "name": self.name, "detail": self.detail}


class _OpenTurn:
    """Mutable scratchpad for the turn currently moving through the pipeline."""

    def __init__(self, turn_index: int, trigger_id: str):
        self.turn_index = turn_index
        self.trigger_id = trigger_id
        self.recording_start: float | None = None
        self.recording_end: float | None = None
        self.asr_done: float | None = None
        self.reasoning_done: float | None = None
        self.playback_start: float | None = None
        self.asr_wall_s: float | None = None
        self.transcript: str | None = None
        self.response: str | None = None


class _Session:
    def __init__(self, session_id: str, conversation_time: str):
        self.session_id = session_id
        self.conversation_time = conversation_time
        self.state = SessionState()
        self.counter = 0
        self.state_token = 0
        self.pending: Command | None = None
        self.pending_token = 0
        self.display_text: str | None = None
        self.media: dict[str, bytes] = {}
        self.audio_by_turn: dict[int, list[str]] = {}
        self.images_by_turn: dict[int, list[str]] = {}
        self.turns: list[TurnRecord] = []
        self.events: list[SessionEvent] = []
        self.open_turn: _OpenTurn | None = None
        self.playback_due: float | None = None
        self.playback_generation = 0
        self.uploads_entered_at: float | None = None
        self.intervened = False
        self.cmd_seq = 0

    def tick(self) -> int:
        self.counter += 1
        return self.counter


class HostService:
    """One host process: a preloaded user profile and its live sessions."""

    def __init__(
        self,
        profile: UserProfile,
        backends: BackendSuite,
        *,
        media: Mapping[str, bytes] | None = None,
        clock: Clock | None = None,
        config: HostConfig | None = None,
        conversation_time_provider: Any = None,
    ):
        self.profile = profile
        self.backends = backends
        self.trigger_media: dict[str, bytes] = dict(media or {})
        self.clock = clock or WallClock()
        self.config = config or HostConfig()
        self._conversation_time_provider = conversation_time_provider or _wall_conversation_time
        self._sessions: dict[str, _Session] = {}
        self._active_id: str | None = None
        self._lock = threading.RLock()
        self._rng = random.Random(self.config.jitter_seed)

    # -- helpers ------------------------------------------------------------

    def _event(self, s: _Session, actor: str, name: str, detail: JSONDict | None = None, *, t: float | None = None) -> None:
        s.events.append(SessionEvent(self.clock.now() if t is None else t, actor, name, detail or {}))

    def _set_pending(self, s: _Session, command: Command | None) -> None:
        s.pending = command
        if command is not None:
            # Stamp the install point so pollers can tell a fresh command
            # from one they already executed under a later state token.
            s.pending_token = s.state_token

    def _transition(
        self,
        s: _Session,
        state: SessionState,
        effects: tuple[Effect, ...],
        *,
        cause: str,
        t: float | None = None,
    ) -> None:
        """Install a new machine state and interpret its effects."""
        previous = s.state
        s.state = state
        if state.phase is not previous.phase or effects:
            s.state_token = s.tick()
        if state.phase is not previous.phase:
            self._event(
                s,
                "host",
                "Transition",
                {"from": previous.phase.value, "to": state.phase.value, "cause": cause},
                t=t,
            )
        for effect in effects:
            self._apply_effect(s, effect, t=t)

    def _apply_effect(self, s: _Session, effect: Effect, *, t: float | None = None) -> None:
        now = self.clock.now() if t is None else t
        name = type(effect).__name__
        detail: JSONDict = {"cmd_seq": s.cmd_seq}
        if isinstance(effect, RejectedCommand):
            detail.update(kind=effect.kind.value, reason=effect.reason)
        elif isinstance(effect, TriggerShown):
            trigger = self.profile.trigger_by_id(effect.trigger_id)
            s.display_text = trigger.caption if trigger else effect.trigger_id
            self._set_pending(s, None)
            detail.update(trigger_id=effect.trigger_id)
        elif isinstance(effect, CaptureStarted):
            s.open_turn = _OpenTurn(effect.turn_index, s.state.active_trigger_id or "")
            s.open_turn.recording_start = now * 1000.0
            self._set_pending(
                s, Command(CommandKind.START_RECORDING, s.session_id, turn_index=effect.turn_index)
            )
            detail.update(turn_index=effect.turn_index)
        elif isinstance(effect, CaptureStopped):
            # end of user speech is the stop-recording event; upload transfer
            # time that follows belongs to the orchestration component
            if s.open_turn is not None:
                s.open_turn.recording_end = now * 1000.0
            s.uploads_entered_at = now
            self._set_pending(
                s, Command(CommandKind.STOP_RECORDING, s.session_id, turn_index=effect.turn_index)
            )
            detail.update(turn_index=effect.turn_index)
        elif isinstance(effect, PipelineStarted):
            s.uploads_entered_at = None
            self._set_pending(s, None)  # stop-recording was acted on
            detail.update(turn_index=effect.turn_index)
        elif isinstance(effect, PlaybackRequested):
            detail.update(speed_factor=quantize(effect.speed_factor), repeat=effect.repeat)
            self._begin_playback(s, effect, now)
        elif isinstance(effect, ApologySpoken):
            s.intervened = True
            s.open_turn = None
            s.playback_due = None
            s.uploads_entered_at = None
            self._set_pending(
                s,
                Command(CommandKind.SPEAK_RESPONSE, s.session_id, payload=effect.text),
            )
            detail.update(stage=effect.stage)
        elif isinstance(effect, TurnCompleted):
            self._finalize_turn(s, effect.turn_index, now)
            self._set_pending(s, None)  # playback command was consumed
            detail.update(turn_index=effect.turn_index)
        elif isinstance(effect, SessionEnded):
            s.playback_due = None
            s.uploads_entered_at = None
            self._set_pending(s, Command(CommandKind.HOME, s.session_id))
            # the ended session stays in the active slot until a new one
            # replaces it: an executor that has only ever polled anonymously
            # must still see the pending home command
        self._event(s, "host", name, detail, t=now)

    def _begin_playback(self, s: _Session, effect: PlaybackRequested, now: float) -> None:
        try:
            duration = self.backends.synthesis.synthesize(effect.text, effect.speed_factor)
        except Exception as exc:
            self._fail_stage(s, "synthesis", str(exc))
            return
        start = self.clock.now()
        s.playback_generation += 1
        s.playback_due = start + max(0.0, duration)
        if not effect.repeat and s.open_turn is not None:
            s.open_turn.playback_start = start * 1000.0
        kind = CommandKind.PLAY_RESPONSE if effect.repeat else CommandKind.SPEAK_RESPONSE
        self._set_pending(s, Command(kind, s.session_id, payload=effect.text))
        s.display_text = effect.text

    def _fail_stage(self, s: _Session, stage: str, reason: str) -> None:
        self._event(s, "host", "BackendFailure", {"stage": stage, "reason": reason})
        state, effects = machine.advance(s.state, InternalEvent.BACKEND_FAILED, stage=stage)
        self._transition(s, state, effects, cause=InternalEvent.BACKEND_FAILED.value)

    def _finalize_turn(self, s: _Session, turn_index: int, completed_at: float) -> None:
        open_turn = s.open_turn
        if open_turn is None or open_turn.turn_index != turn_index:
            return  # repeat playback of an already-recorded turn
        ts = TurnTimestamps(
            recording_start=open_turn.recording_start or 0.0,
            recording_end=open_turn.recording_end or 0.0,
            asr_done=open_turn.asr_done or 0.0,
            reasoning_done=open_turn.reasoning_done or 0.0,
            playback_start=open_turn.playback_start or 0.0,
            playback_end=completed_at * 1000.0,
        )
        latency = derive_latency(ts, open_turn.asr_wall_s)
        record = TurnRecord(
            turn_index=turn_index,
            trigger_id=open_turn.trigger_id,
            user_transcript=open_turn.transcript or "",
            user_speech_duration_s=(ts.recording_end - ts.recording_start) / 1000.0,
            robot_response=open_turn.response or "",
            audio_refs=tuple(sorted(s.audio_by_turn.get(turn_index, ()))),
            image_refs=tuple(sorted(s.images_by_turn.get(turn_index, ()), key=_image_seq)),
            timestamps=ts,
            latency=latency,
        )
        s.turns.append(record)
        s.open_turn = None

    def _advance_due(self, s: _Session) -> None:
        """Lazily apply host-scheduled happenings that have come due."""
        now = self.clock.now()
        if (
            s.playback_due is not None
            and s.state.phase is SessionPhase.SPEAKING
            and now >= s.playback_due
        ):
            due = s.playback_due
            s.playback_due = None
            state, effects = machine.advance(s.state, InternalEvent.PLAYBACK_DONE)
            self._transition(s, state, effects, cause=InternalEvent.PLAYBACK_DONE.value, t=due)
        if (
            s.uploads_entered_at is not None
            and s.state.phase is SessionPhase.AWAITING_UPLOADS
            and now - s.uploads_entered_at >= self.config.upload_timeout_s
        ):
            s.uploads_entered_at = None
            self._fail_stage(s, "upload", "uploads timed out")

    def _session_for(self, session_id: str | None) -> _Session | None:
        if session_id is None:
            session_id = self._active_id
        if session_id is None:
            return None
        return self._sessions.get(session_id)

    # -- public entry points ------------------------------------------------

    def create_session(self, session_id: str, conversation_time: str | None = None) -> None:
        with self._lock:
            if session_id in self._sessions:
                raise ValueError(f"session {session_id!r} already exists")
            conversation_time = conversation_time or self._conversation_time_provider()
            self._sessions[session_id] = _Session(session_id, conversation_time)
            self._active_id = session_id

    def poll(self, session_id: str | None = None) -> PollResponse:
        with self._lock:
            s = self._session_for(session_id)
            if s is None:
                return PollResponse("idle", None, None, None, 0)
            self._advance_due(s)
            return PollResponse(
                session_state=self.config.display_name(s.state.phase),
                pending_command=s.pending,
                active_trigger=s.state.active_trigger_id,
                display_text=s.display_text,
                state_token=s.pending_token if s.pending is not None else s.state_token,
            )

    def submit_command(self, command: Command) -> Ack:
        with self._lock:
            s = self._sessions.get(command.session_id)
            if s is None:
                if command.kind is not CommandKind.SELECT_TRIGGER:
                    return Ack(False, 0, f"unknown session {command.session_id!r}")
                self.create_session(command.session_id)
                s = self._sessions[command.session_id]
            self._advance_due(s)
            s.cmd_seq += 1
            self._event(s, "console", "CommandReceived", {"cmd_seq": s.cmd_seq, "kind": command.kind.value})
            if self.config.processing_jitter_s > 0:
                self.clock.sleep(self._rng.uniform(0.0, self.config.processing_jitter_s))
            if command.kind is CommandKind.SELECT_TRIGGER and (
                command.payload and self.profile.trigger_by_id(command.payload) is None
            ):
                self._apply_effect(
                    s, RejectedCommand(command.kind, f"unknown trigger {command.payload!r}")
                )
                return Ack(False, s.tick(), f"unknown trigger {command.payload!r}")
            state, effects = machine.handle_command(
                s.state, command, speed_factor=self.config.speed_factor
            )
            rejected = any(isinstance(e, RejectedCommand) for e in effects)
            self._transition(s, state, effects, cause=command.kind.value)
            detail = next(
                (e.reason for e in effects if isinstance(e, RejectedCommand)), None
            )
            return Ack(not rejected, s.tick(), detail)

    def media_upload(self, notice: UploadNotice, data: bytes) -> Ack:
        with self._lock:
            s = self._sessions.get(notice.session_id)
            if s is None:
                return Ack(False, 0, f"unknown session {notice.session_id!r}")
            self._advance_due(s)
            if len(data) != notice.byte_length:
                return Ack(False, s.tick(), "byte length mismatch")
            if sha256_hex(data) != notice.checksum:
                return Ack(False, s.tick(), "checksum mismatch")
            existing = s.media.get(notice.file_name)
            if existing is not None:
                if sha256_hex(existing) == notice.checksum:
                    return Ack(True, s.tick(), None)  # idempotent retransmission
                return Ack(False, s.tick(), f"conflicting upload for {notice.file_name!r}")
            s.media[notice.file_name] = data
            registry = s.audio_by_turn if notice.kind is NoticeKind.AUDIO_READY else s.images_by_turn
            registry.setdefault(notice.turn_index, []).append(notice.file_name)
            self._event(
                s,
                "edge",
                "MediaStored",
                {"file_name": notice.file_name, "bytes": notice.byte_length, "kind": notice.kind.value},
            )
            return Ack(True, s.tick(), None)

    def image_ready(self, notice: UploadNotice) -> Ack:
        with self._lock:
            s = self._sessions.get(notice.session_id)
            if s is None:
                return Ack(False, 0, f"unknown session {notice.session_id!r}")
            if notice.kind is not NoticeKind.IMAGE_READY:
                return Ack(False, s.tick(), "expected image-ready notice")
            if notice.file_name not in s.media:
                return Ack(False, s.tick(), f"media {notice.file_name!r} not uploaded")
            self._event(s, "edge", "ImageReady", {"file_name": notice.file_name})
            return Ack(True, s.tick(), None)

    def audio_ready(self, notice: UploadNotice) -> Ack:
        with self._lock:
            s = self._sessions.get(notice.session_id)
            if s is None:
                return Ack(False, 0, f"unknown session {notice.session_id!r}")
            self._advance_due(s)
            if notice.kind is not NoticeKind.AUDIO_READY:
                return Ack(False, s.tick(), "expected audio-ready notice")
            if notice.file_name not in s.media:
                return Ack(False, s.tick(), f"media {notice.file_name!r} not uploaded")
            self._event(s, "edge", "AudioReady", {"file_name": notice.file_name})
            if s.state.phase is SessionPhase.AWAITING_UPLOADS and (
                s.open_turn is not None and s.open_turn.turn_index == notice.turn_index
            ):
                self._run_turn_pipeline(s, notice)
            return Ack(True, s.tick(), None)

    # -- pipeline -----------------------------------------------------------

    def _run_turn_pipeline(self, s: _Session, notice: UploadNotice) -> None:
        """Transcribe, reason, and start playback for the finalized capture."""
        open_turn = s.open_turn
        assert open_turn is not None
        state, effects = machine.advance(s.state, InternalEvent.UPLOADS_COMPLETE)
        self._transition(s, state, effects, cause=InternalEvent.UPLOADS_COMPLETE.value)

        audio = s.media[notice.file_name]
        t0 = self.clock.now()
        try:
            result = self.backends.transcription.transcribe(audio)
        except Exception as exc:
            self._fail_stage(s, "asr", str(exc))
            return
        open_turn.asr_done = self.clock.now() * 1000.0
        open_turn.asr_wall_s = self.clock.now() - t0
        open_turn.transcript = result.text
        state, effects = machine.advance(
            s.state,
            InternalEvent.TRANSCRIPTION_DONE,
            text=result.text,
            history_cap=2 * self.config.history_window,
        )
        self._transition(s, state, effects, cause=InternalEvent.TRANSCRIPTION_DONE.value)

        trigger = self.profile.trigger_by_id(open_turn.trigger_id)
        image_names = sorted(s.images_by_turn.get(open_turn.turn_index, ()), key=_image_seq)
        frames = [
            (name, (_image_seq(name) - 1) * self.config.frame_interval_s) for name in image_names
        ]
        selected = select_turn_images(
            frames,
            min_spacing_s=self.config.min_image_spacing_s,
            max_images=self.config.max_prompt_images,
        )
        bundle = assemble_prompt(
            self.profile,
            trigger,
            result.text,
            selected,
            s.state.history,
            history_window=self.config.history_window,
        )
        try:
            response = self.backends.dialogue.respond(bundle)
        except Exception as exc:
            self._fail_stage(s, "reasoning", str(exc))
            return
        open_turn.reasoning_done = self.clock.now() * 1000.0
        open_turn.response = response
        state, effects = machine.advance(
            s.state,
            InternalEvent.REASONING_DONE,
            text=response,
            history_cap=2 * self.config.history_window,
        )
        self._transition(s, state, effects, cause=InternalEvent.REASONING_DONE.value)

    # -- introspection ------------------------------------------------------

    @property
    def active_session_id(self) -> str | None:
        return self._active_id

    def session_ids(self) -> tuple[str, ...]:
        return tuple(self._sessions)

    def session_phase(self, session_id: str) -> SessionPhase:
        s = self._sessions[session_id]
        with self._lock:
            self._advance_due(s)
            return s.state.phase

    def session_events(self, session_id: str) -> tuple[SessionEvent, ...]:
        return tuple(self._sessions[session_id].events)

    def session_media(self, session_id: str) -> dict[str, bytes]:
        return dict(self._sessions[session_id].media)

    def session_record(self, session_id: str) -> SessionRecord:
        with self._lock:
            s = self._sessions[session_id]
            self._advance_due(s)
            return SessionRecord.build(
                user_id=self.profile.user_id,
                conversation_time=s.conversation_time,
                robot_setup=self.config.robot_setup,
                turns=s.turns,
                completed_without_intervention=not s.intervened,
            )

    def packaged_log(self, session_id: str) -> JSONDict:
        """Privacy-safe session package: transcripts, timing, and events only.

        Media payloads never appear here; the portal ingest path hard-rejects
        them, and this is the sole host-to-portal session artifact.
        """
        with self._lock:
            s = self._sessions[session_id]
            self._advance_due(s)
            return {
                "schema_version": 1,
                "user_id": self.profile.user_id,
                "conversation_time": s.conversation_time,
                "robot_setup": self.config.robot_setup.value,
                "session_state": s.state.phase.value,
                "completed_without_intervention": not s.intervened,
                "triggers_used": list(first_use_order(s.turns)),
                "turns": [
                    {
                        "turn_index": t.turn_index,
                        "trigger_id": t.trigger_id,
                        "user_transcript": t.user_transcript,
                        "robot_response": t.robot_response,
                        "user_speech_duration_s": t.user_speech_duration_s,
                        "latency": t.latency.to_json_dict(),
                    }
                    for t in s.turns
                ],
                "events": [e.to_json_dict() for e in s.events],
            }


def _image_seq(name: str) -> int:
    match = IMAGE_NAME_RE.match(name)
    return int(match.group(2)) if match else 0


def _wall_conversation_time() -> str:
    from datetime import datetime

    return datetime.now().strftime("%Y%m%d-%H%M%S")
