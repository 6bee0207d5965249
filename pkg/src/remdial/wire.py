"""Wire protocol shared by host, edge client, and console: messages and routes.

All messages are strict, closed JSON objects carrying a ``type`` tag. Unknown
fields, missing fields, and unknown enum values are decode errors, never
silently ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

from .model import (
    JSONDict,
    SchemaError,
    _bool_field,
    _check_fields,
    _int_field,
    _str_field,
    canonical_dumps,
    is_sha256_hex,
)


class UnknownKind(SchemaError):
    """Raised when a message or command carries an unrecognized kind tag."""


class CommandKind(str, Enum):
    SELECT_TRIGGER = "select-trigger"
    START_RECORDING = "start-recording"
    STOP_RECORDING = "stop-recording"
    SPEAK_RESPONSE = "speak-response"
    PLAY_RESPONSE = "play-response"
    HOME = "home"


class NoticeKind(str, Enum):
    AUDIO_READY = "audio-ready"
    IMAGE_READY = "image-ready"


# media artifacts are named by turn and a per-turn sequence number, both 1-based
IMAGE_NAME_RE = re.compile(r"^image_(\d+)_(\d+)\.jpg$")
RECORDING_NAME_RE = re.compile(r"^recording_(\d+)_(\d+)\.wav$")


def image_file_name(turn_index: int, seq: int) -> str:
    return f"image_{turn_index}_{seq}.jpg"


def recording_file_name(turn_index: int, seq: int = 1) -> str:
    return f"recording_{turn_index}_{seq}.wav"


# payload requirements per command kind: True = required non-empty,
# False = forbidden, None = optional
_PAYLOAD_RULE: dict[CommandKind, bool | None] = {
    CommandKind.SELECT_TRIGGER: True,
    CommandKind.START_RECORDING: False,
    CommandKind.STOP_RECORDING: False,
    CommandKind.SPEAK_RESPONSE: True,
    CommandKind.PLAY_RESPONSE: None,
    CommandKind.HOME: False,
}


@dataclass(frozen=True)
class Command:
    """A control instruction; flows console→host and host→edge (via poll)."""

    kind: CommandKind
    session_id: str
    turn_index: int | None = None
    payload: str | None = None

    def __post_init__(self) -> None:
        try:
            kind = CommandKind(self.kind)
        except ValueError:
            raise UnknownKind(f"Command.kind: unknown kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not self.session_id:
            raise SchemaError("Command.session_id: must be non-empty")
        if self.turn_index is not None and self.turn_index < 1:
            raise SchemaError(f"Command.turn_index: must be >= 1, got {self.turn_index}")
        rule = _PAYLOAD_RULE[kind]
        if rule is True and not self.payload:
            raise SchemaError(f"Command.payload: required for kind {kind.value!r}")
        if rule is False and self.payload is not None:
            raise SchemaError(f"Command.payload: not allowed for kind {kind.value!r}")

    def to_json_dict(self) -> JSONDict:
        return {
            "type": "command",
            "kind": self.kind.value,
            "session_id": self.session_id,
            "turn_index": self.turn_index,
            "payload": self.payload,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "Command":
        _check_fields(d, "Command", ("type", "kind", "session_id"), ("turn_index", "payload"))
        kind_raw = _str_field(d, "kind", "Command")
        if kind_raw not in {k.value for k in CommandKind}:
            raise UnknownKind(f"Command.kind: unknown kind {kind_raw!r}")
        turn_index = d.get("turn_index")
        if turn_index is not None:
            turn_index = _int_field(d, "turn_index", "Command")
        return cls(
            kind=CommandKind(kind_raw),
            session_id=_str_field(d, "session_id", "Command"),
            turn_index=turn_index,
            payload=_str_field(d, "payload", "Command", optional=True),
        )


@dataclass(frozen=True)
class UploadNotice:
    """Announces one finalized media file: identity, size, and checksum."""

    kind: NoticeKind
    session_id: str
    turn_index: int
    file_name: str
    byte_length: int
    checksum: str

    def __post_init__(self) -> None:
        try:
            kind = NoticeKind(self.kind)
        except ValueError:
            raise UnknownKind(f"UploadNotice.kind: unknown kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if not self.session_id:
            raise SchemaError("UploadNotice.session_id: must be non-empty")
        if self.turn_index < 1:
            raise SchemaError(f"UploadNotice.turn_index: must be >= 1, got {self.turn_index}")
        pattern = RECORDING_NAME_RE if kind is NoticeKind.AUDIO_READY else IMAGE_NAME_RE
        if not pattern.match(self.file_name):
            raise SchemaError(f"UploadNotice.file_name: {self.file_name!r} does not match {pattern.pattern}")
        if self.byte_length <= 0:
            raise SchemaError(f"UploadNotice.byte_length: must be positive, got {self.byte_length}")
        if not is_sha256_hex(self.checksum):
            raise SchemaError("UploadNotice.checksum: must be lowercase sha256 hex")

    def to_json_dict(self) -> JSONDict:
        return {
            "type": "upload_notice",
            "kind": self.kind.value,
            "session_id": self.session_id,
            "turn_index": self.turn_index,
            "file_name": self.file_name,
            "byte_length": self.byte_length,
            "checksum": self.checksum,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "UploadNotice":
        _check_fields(
            d,
            "UploadNotice",
            ("type", "kind", "session_id", "turn_index", "file_name", "byte_length", "checksum"),
        )
        kind_raw = _str_field(d, "kind", "UploadNotice")
        if kind_raw not in {k.value for k in NoticeKind}:
            raise UnknownKind(f"UploadNotice.kind: unknown kind {kind_raw!r}")
        return cls(
            kind=NoticeKind(kind_raw),
            session_id=_str_field(d, "session_id", "UploadNotice"),
            turn_index=_int_field(d, "turn_index", "UploadNotice"),
            file_name=_str_field(d, "file_name", "UploadNotice"),
            byte_length=_int_field(d, "byte_length", "UploadNotice"),
            checksum=_str_field(d, "checksum", "UploadNotice"),
        )


@dataclass(frozen=True)
class PollResponse:
    """Host state snapshot returned to pollers.

    Polling is idempotent: repeated polls without a state change return
    byte-identical bodies. ``state_token`` identifies the state version so
    executors run each pending command exactly once.
    """

    session_state: str
    pending_command: Command | None
    active_trigger: str | None
    display_text: str | None
    state_token: int

    def __post_init__(self) -> None:
        if self.state_token < 0:
            raise SchemaError(f"PollResponse.state_token: must be >= 0, got {self.state_token}")

    def to_json_dict(self) -> JSONDict:
        return {
            "type": "poll_response",
            "session_state": self.session_state,
            "pending_command": None if self.pending_command is None else self.pending_command.to_json_dict(),
            "active_trigger": self.active_trigger,
            "display_text": self.display_text,
            "state_token": self.state_token,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "PollResponse":
        _check_fields(
            d,
            "PollResponse",
            ("type", "session_state", "pending_command", "active_trigger", "display_text", "state_token"),
        )
        pending_raw = d.get("pending_command")
        return cls(
            session_state=_str_field(d, "session_state", "PollResponse"),
            pending_command=None if pending_raw is None else Command.from_json_dict(pending_raw),
            active_trigger=_str_field(d, "active_trigger", "PollResponse", optional=True),
            display_text=_str_field(d, "display_text", "PollResponse", optional=True),
            state_token=_int_field(d, "state_token", "PollResponse"),
        )


@dataclass(frozen=True)
class Ack:
    """Receipt for a posted message; state_token is strictly monotone per session."""

    ok: bool
    state_token: int
    error_detail: str | None = None

    def to_json_dict(self) -> JSONDict:
        return {
            "type": "ack",
            "ok": self.ok,
            "state_token": self.state_token,
            "error_detail": self.error_detail,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "Ack":
        _check_fields(d, "Ack", ("type", "ok", "state_token"), ("error_detail",))
        return cls(
            ok=_bool_field(d, "ok", "Ack"),
            state_token=_int_field(d, "state_token", "Ack"),
            error_detail=_str_field(d, "error_detail", "Ack", optional=True),
        )


Message = Union[Command, UploadNotice, PollResponse, Ack]

_MESSAGE_TYPES: dict[str, type] = {
    "command": Command,
    "upload_notice": UploadNotice,
    "poll_response": PollResponse,
    "ack": Ack,
}


def encode(message: Message) -> bytes:
    """Serialize a message to canonical UTF-8 JSON bytes."""
    return canonical_dumps(message.to_json_dict()).encode("utf-8")


def decode(data: bytes) -> Message:
    """Parse canonical message bytes; strict inverse of :func:`encode`."""
    import json

    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"message: not valid UTF-8 JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"message: expected object, got {type(raw).__name__}")
    type_tag = raw.get("type")
    if type_tag not in _MESSAGE_TYPES:
        raise UnknownKind(f"message: unknown type tag {type_tag!r}")
    return _MESSAGE_TYPES[type_tag].from_json_dict(raw)


# ---------------------------------------------------------------------------
# endpoint table

# headers carrying UploadNotice fields alongside raw bytes on POST /media
MEDIA_HEADER_KIND = "x-upload-kind"
MEDIA_HEADER_SESSION = "x-session-id"
MEDIA_HEADER_TURN = "x-turn-index"
MEDIA_HEADER_FILE = "x-file-name"
MEDIA_HEADER_LENGTH = "x-byte-length"
MEDIA_HEADER_CHECKSUM = "x-checksum"


@dataclass(frozen=True)
class Endpoint:
    method: str
    path: str
    request: str | None
    response: str


ENDPOINTS: tuple[Endpoint, ...] = (
    Endpoint("GET", "/poll", None, "PollResponse"),
    Endpoint("POST", "/command", "Command", "Ack"),
    Endpoint("POST", "/audio_ready", "UploadNotice", "Ack"),
    Endpoint("POST", "/image_ready", "UploadNotice", "Ack"),
    Endpoint("POST", "/media", "bytes + UploadNotice headers", "Ack"),
    Endpoint("GET", "/session/{session_id}/log", None, "packaged session log"),
)
