"""Session state machine: phases, the legal-transition relation, and effects.

Pure transition logic only. The service layer owns clocks, media, and
backends; everything here is a function of (state, event).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from ..wire import Command, CommandKind

APOLOGY_TEXT = "I'm sorry, I missed that. Let's take a moment and try again."


class SessionPhase(str, Enum):
    IDLE = "idle"
    TRIGGER_SELECTED = "trigger_selected"
    RECORDING = "recording"
    AWAITING_UPLOADS = "awaiting_uploads"
    TRANSCRIBING = "transcribing"
    REASONING = "reasoning"
    SPEAKING = "speaking"
    AWAITING_NEXT = "awaiting_next"
    ENDED = "ended"


class InternalEvent(str, Enum):
    UPLOADS_COMPLETE = "uploads-complete"
    TRANSCRIPTION_DONE = "transcription-done"
    REASONING_DONE = "reasoning-done"
    PLAYBACK_DONE = "playback-done"
    BACKEND_FAILED = "backend-failed"


def _build_relation() -> frozenset[tuple[SessionPhase, str, SessionPhase]]:
    P, C, I = SessionPhase, CommandKind, InternalEvent
    edges: list[tuple[SessionPhase, str, SessionPhase]] = [
        (P.IDLE, C.SELECT_TRIGGER.value, P.TRIGGER_SELECTED),
        (P.TRIGGER_SELECTED, C.START_RECORDING.value, P.RECORDING),
        (P.RECORDING, C.STOP_RECORDING.value, P.AWAITING_UPLOADS),
        (P.AWAITING_UPLOADS, I.UPLOADS_COMPLETE.value, P.TRANSCRIBING),
        (P.TRANSCRIBING, I.TRANSCRIPTION_DONE.value, P.REASONING),
        (P.REASONING, I.REASONING_DONE.value, P.SPEAKING),
        (P.SPEAKING, I.PLAYBACK_DONE.value, P.AWAITING_NEXT),
        (P.AWAITING_NEXT, C.START_RECORDING.value, P.RECORDING),
        (P.AWAITING_NEXT, C.SELECT_TRIGGER.value, P.TRIGGER_SELECTED),
        (P.AWAITING_NEXT, C.PLAY_RESPONSE.value, P.SPEAKING),
        (P.SPEAKING, C.PLAY_RESPONSE.value, P.SPEAKING),
        (P.TRANSCRIBING, I.BACKEND_FAILED.value, P.AWAITING_NEXT),
        (P.REASONING, I.BACKEND_FAILED.value, P.AWAITING_NEXT),
        (P.SPEAKING, I.BACKEND_FAILED.value, P.AWAITING_NEXT),
        (P.AWAITING_UPLOADS, I.BACKEND_FAILED.value, P.AWAITING_NEXT),
    ]
    edges.extend((phase, C.HOME.value, P.ENDED) for phase in P)
    return frozenset(edges)


#: Every legal (phase, event, next phase) triple, command and internal alike.
LEGAL_TRANSITIONS = _build_relation()


class IllegalInternalEvent(RuntimeError):
    """An internal pipeline event arrived in a phase where it cannot occur."""


# ---------------------------------------------------------------------------
# effects


@dataclass(frozen=True)
class RejectedCommand:
    kind: CommandKind
    reason: str


@dataclass(frozen=True)
class TriggerShown:
    trigger_id: str


@dataclass(frozen=True)
class CaptureStarted:
    turn_index: int


@dataclass(frozen=True)
class CaptureStopped:
    turn_index: int


@dataclass(frozen=True)
class PipelineStarted:
    turn_index: int


@dataclass(frozen=True)
class PlaybackRequested:
    text: str
    speed_factor: float
    repeat: bool


@dataclass(frozen=True)
class ApologySpoken:
    text: str
    stage: str


@dataclass(frozen=True)
class TurnCompleted:
    turn_index: int


@dataclass(frozen=True)
class SessionEnded:
    pass


Effect = (
    RejectedCommand
    | TriggerShown
    | CaptureStarted
    | CaptureStopped
    | PipelineStarted
    | PlaybackRequested
    | ApologySpoken
    | TurnCompleted
    | SessionEnded
)


@dataclass(frozen=True)
class SessionState:
    """Immutable dialogue state threaded through transitions.

    ``history`` keeps the most recent (speaker, text) entries, bounded to the
    prompt window so memory never grows with session length.
    """

    phase: SessionPhase = SessionPhase.IDLE
    turn_index: int = 0
    active_trigger_id: str | None = None
    last_response: str | None = None
    history: tuple[tuple[str, str], ...] = ()

    def with_history(self, speaker: str, text: str, cap: int) -> "SessionState":
        history = (*self.history, (speaker, text))[-cap:]
        return replace(self, history=history)


def _legal(phase: SessionPhase, event: str) -> SessionPhase | None:
    for src, ev, dst in LEGAL_TRANSITIONS:
        if src is phase and ev == event:
            return dst
    return None


def handle_command(
    state: SessionState, command: Command, *, speed_factor: float = 0.85
) -> tuple[SessionState, tuple[Effect, ...]]:
    """Apply one inbound command; illegal commands leave the state unchanged."""
    kind = command.kind
    target = _legal(state.phase, kind.value)
    if target is None:
        return state, (RejectedCommand(kind, f"{kind.value} not legal in {state.phase.value}"),)

    if kind is CommandKind.SELECT_TRIGGER:
        new = replace(state, phase=target, active_trigger_id=command.payload)
        return new, (TriggerShown(command.payload),)

    if kind is CommandKind.START_RECORDING:
        if state.active_trigger_id is None:
            return state, (RejectedCommand(kind, "no trigger selected"),)
        new = replace(state, phase=target, turn_index=state.turn_index + 1)
        return new, (CaptureStarted(new.turn_index),)

    if kind is CommandKind.STOP_RECORDING:
        return replace(state, phase=target), (CaptureStopped(state.turn_index),)

    if kind is CommandKind.PLAY_RESPONSE:
        if state.last_response is None:
            return state, (RejectedCommand(kind, "no last response to repeat"),)
        new = replace(state, phase=target)
        return new, (PlaybackRequested(state.last_response, speed_factor, repeat=True),)

    if kind is CommandKind.HOME:
        if state.phase is SessionPhase.ENDED:
            return state, ()
        return replace(state, phase=target), (SessionEnded(),)

    # speak-response is host-to-edge only; a console must never originate it
    return state, (RejectedCommand(kind, f"{kind.value} is not an inbound command"),)


def advance(
    state: SessionState,
    event: InternalEvent,
    *,
    text: str | None = None,
    stage: str | None = None,
    history_cap: int = 12,
) -> tuple[SessionState, tuple[Effect, ...]]:
    """Apply one internal pipeline event; illegal events raise."""
    target = _legal(state.phase, event.value)
    if target is None:
        raise IllegalInternalEvent(f"{event.value} cannot occur in {state.phase.value}")

    if event is InternalEvent.UPLOADS_COMPLETE:
        return replace(state, phase=target), (PipelineStarted(state.turn_index),)

    if event is InternalEvent.TRANSCRIPTION_DONE:
        new = replace(state, phase=target).with_history("user", text or "", history_cap)
        return new, ()

    if event is InternalEvent.REASONING_DONE:
        new = replace(state, phase=target, last_response=text)
        new = new.with_history("robot", text or "", history_cap)
        return new, (PlaybackRequested(text or "", 1.0, repeat=False),)

    if event is InternalEvent.PLAYBACK_DONE:
        return replace(state, phase=target), (TurnCompleted(state.turn_index),)

    # backend failure: fall back to awaiting-next and apologize
    return replace(state, phase=target), (ApologySpoken(APOLOGY_TEXT, stage or "unknown"),)
