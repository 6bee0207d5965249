"""Domain model: profiles, triggers, turn records, and latency derivation.

Every float that enters a model object is quantized to six decimal places and
negative zero is normalized, so equal records always serialize to identical
bytes and a write/load cycle is the identity on runtime-produced data.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Iterable, Mapping

JSONDict = dict[str, Any]

_CONVERSATION_TIME_RE = re.compile(r"^\d{8}-\d{6}$")
_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


class SchemaError(ValueError):
    """Raised when a JSON document does not match the expected strict schema."""


class OrderingViolation(ValueError):
    """Raised when turn timestamps are not monotonically ordered."""


def quantize(value: float) -> float:
    """Quantize to 6 decimal places and normalize -0.0 to 0.0."""
    if not math.isfinite(value):
        raise ValueError(f"non-finite float not allowed: {value!r}")
    q = round(float(value), 6)
    return 0.0 if q == 0.0 else q


def _quantize_tree(obj: Any) -> Any:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return quantize(obj)
    if isinstance(obj, dict):
        return {k: _quantize_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize_tree(v) for v in obj]
    return obj


def canonical_dumps(obj: Any, *, indent: int | None = None) -> str:
    """Serialize to JSON with sorted keys and 6-decimal float quantization.

    The output is byte-stable: equal inputs produce identical strings across
    runs and platforms.
    """
    separators = (",", ": ") if indent else (",", ":")
    return json.dumps(
        _quantize_tree(obj),
        sort_keys=True,
        indent=indent,
        separators=separators,
        ensure_ascii=False,
        allow_nan=False,
    )


def sha256_hex(data: bytes) -> str:
    import hashlib

    return hashlib.sha256(data).hexdigest()


def is_sha256_hex(text: str) -> bool:
    return bool(_SHA256_RE.match(text))


# ---------------------------------------------------------------------------
# strict decoding helpers


def _check_fields(d: Any, typename: str, required: Iterable[str], optional: Iterable[str] = ()) -> JSONDict:
    if not isinstance(d, dict):
        raise SchemaError(f"{typename}: expected object, got {type(d).__name__}")
    required = set(required)
    allowed = required | set(optional)
    unknown = set(d) - allowed
    if unknown:
        raise SchemaError(f"{typename}: unknown field(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise SchemaError(f"{typename}: missing field(s) {sorted(missing)}")
    return d


def _str_field(d: JSONDict, key: str, typename: str, *, optional: bool = False) -> Any:
    value = d.get(key)
    if optional and value is None:
        return None
    if not isinstance(value, str):
        raise SchemaError(f"{typename}.{key}: expected string, got {type(value).__name__}")
    return value


def _float_field(d: JSONDict, key: str, typename: str) -> float:
    value = d.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{typename}.{key}: expected number, got {type(value).__name__}")
    return float(value)


def _int_field(d: JSONDict, key: str, typename: str) -> int:
    value = d.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{typename}.{key}: expected integer, got {type(value).__name__}")
    return value


def _bool_field(d: JSONDict, key: str, typename: str) -> bool:
    value = d.get(key)
    if not isinstance(value, bool):
        raise SchemaError(f"{typename}.{key}: expected boolean, got {type(value).__name__}")
    return value


def _str_list_field(d: JSONDict, key: str, typename: str) -> tuple[str, ...]:
    value = d.get(key)
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise SchemaError(f"{typename}.{key}: expected list of strings")
    return tuple(value)


# ---------------------------------------------------------------------------
# profile side


class SixMsDomain(str, Enum):
    """The six care-conversation domains used to structure personal profiles."""

    WHAT_MATTERS = "what_matters"
    MEANINGFUL_ACTIVITIES = "meaningful_activities"
    MEALTIMES = "mealtimes"
    MEDICATIONS = "medications"
    MOBILITY = "mobility"
    MAKE_COMFORTABLE = "make_comfortable"


_DOMAIN_VALUES = {d.value for d in SixMsDomain}


@dataclass(frozen=True)
class MemoryTrigger:
    """A caregiver-captioned media item used to open a conversation segment."""

    trigger_id: str
    media_ref: str
    caption: str
    narrative: str | None = None
    domain_tags: tuple[SixMsDomain, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain_tags", tuple(SixMsDomain(t) for t in self.domain_tags))

    def to_json_dict(self) -> JSONDict:
        return {
            "trigger_id": self.trigger_id,
            "media_ref": self.media_ref,
            "caption": self.caption,
            "narrative": self.narrative,
            "domain_tags": [t.value for t in self.domain_tags],
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "MemoryTrigger":
        _check_fields(d, "MemoryTrigger", ("trigger_id", "media_ref", "caption"), ("narrative", "domain_tags"))
        tags_raw = d.get("domain_tags", [])
        if not isinstance(tags_raw, list):
            raise SchemaError("MemoryTrigger.domain_tags: expected list")
        tags = []
        for t in tags_raw:
            if not isinstance(t, str) or t not in _DOMAIN_VALUES:
                raise SchemaError(f"MemoryTrigger.domain_tags: unknown domain {t!r}")
            tags.append(SixMsDomain(t))
        return cls(
            trigger_id=_str_field(d, "trigger_id", "MemoryTrigger"),
            media_ref=_str_field(d, "media_ref", "MemoryTrigger"),
            caption=_str_field(d, "caption", "MemoryTrigger"),
            narrative=_str_field(d, "narrative", "MemoryTrigger", optional=True),
            domain_tags=tuple(tags),
        )


@dataclass(frozen=True)
class UserProfile:
    """Personal context for one user: structured domain entries plus triggers.

    ``six_ms`` keys are serialization names of :class:`SixMsDomain`; unknown
    keys are representable so that :func:`validate_profile` can report them.
    """

    user_id: str
    display_name: str
    six_ms: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    triggers: tuple[MemoryTrigger, ...] = ()
    communication_notes: str | None = None

    def __post_init__(self) -> None:
        normalized = {}
        for key, entries in self.six_ms.items():
            key = key.value if isinstance(key, SixMsDomain) else key
            normalized[key] = tuple(entries)
        object.__setattr__(self, "six_ms", normalized)
        object.__setattr__(self, "triggers", tuple(self.triggers))

    def trigger_by_id(self, trigger_id: str) -> MemoryTrigger | None:
        for trigger in self.triggers:
            if trigger.trigger_id == trigger_id:
                return trigger
        return None

    def to_json_dict(self) -> JSONDict:
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "six_ms": {k: list(v) for k, v in sorted(self.six_ms.items())},
            "triggers": [t.to_json_dict() for t in self.triggers],
            "communication_notes": self.communication_notes,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "UserProfile":
        _check_fields(d, "UserProfile", ("user_id", "display_name"), ("six_ms", "triggers", "communication_notes"))
        six_ms_raw = d.get("six_ms", {})
        if not isinstance(six_ms_raw, dict):
            raise SchemaError("UserProfile.six_ms: expected object")
        six_ms = {}
        for key, entries in six_ms_raw.items():
            if not isinstance(entries, list) or any(not isinstance(e, str) for e in entries):
                raise SchemaError(f"UserProfile.six_ms[{key!r}]: expected list of strings")
            six_ms[key] = tuple(entries)
        triggers_raw = d.get("triggers", [])
        if not isinstance(triggers_raw, list):
            raise SchemaError("UserProfile.triggers: expected list")
        return cls(
            user_id=_str_field(d, "user_id", "UserProfile"),
            display_name=_str_field(d, "display_name", "UserProfile"),
            six_ms=six_ms,
            triggers=tuple(MemoryTrigger.from_json_dict(t) for t in triggers_raw),
            communication_notes=_str_field(d, "communication_notes", "UserProfile", optional=True),
        )


@dataclass(frozen=True)
class Violation:
    """One profile validation finding: the offending field and the broken rule."""

    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def validate_profile(profile: UserProfile) -> list[Violation]:
    """Check profile invariants and return all violations (empty when valid)."""
    violations: list[Violation] = []
    if not profile.user_id:
        violations.append(Violation("user_id", "must be non-empty"))
    for key in profile.six_ms:
        if key not in _DOMAIN_VALUES:
            violations.append(Violation("six_ms", f"unknown 6Ms domain {key!r}"))
    seen: set[str] = set()
    for i, trigger in enumerate(profile.triggers):
        where = f"triggers[{i}]"
        if not trigger.trigger_id:
            violations.append(Violation(f"{where}.trigger_id", "must be non-empty"))
        elif trigger.trigger_id in seen:
            violations.append(Violation(f"{where}.trigger_id", f"duplicate trigger_id {trigger.trigger_id!r}"))
        else:
            seen.add(trigger.trigger_id)
        if not trigger.media_ref:
            violations.append(Violation(f"{where}.media_ref", "must be non-empty"))
        if not trigger.caption:
            violations.append(Violation(f"{where}.caption", "missing caption"))
    return violations


# ---------------------------------------------------------------------------
# session side


class RobotSetup(str, Enum):
    """Deployment variant: robot-native capture (I) or companion edge device (II)."""

    SETUP_I = "I"
    SETUP_II = "II"


@dataclass(frozen=True)
class TurnTimestamps:
    """Host-clock boundary timestamps for one turn, in milliseconds.

    Ordering is not enforced here; :func:`derive_latency` rejects
    non-monotonic instances so that malformed loaded data surfaces as a
    diagnosable error instead of a constructor crash.
    """

    recording_start: float
    recording_end: float
    asr_done: float
    reasoning_done: float
    playback_start: float
    playback_end: float

    def __post_init__(self) -> None:
        for f in fields(self):
            object.__setattr__(self, f.name, quantize(getattr(self, f.name)))

    def ordered(self) -> bool:
        seq = (
            self.recording_start,
            self.recording_end,
            self.asr_done,
            self.reasoning_done,
            self.playback_start,
            self.playback_end,
        )
        return all(a <= b for a, b in zip(seq, seq[1:]))

    def to_json_dict(self) -> JSONDict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_dict(cls, d: Any) -> "TurnTimestamps":
        names = tuple(f.name for f in fields(cls))
        _check_fields(d, "TurnTimestamps", names)
        return cls(**{name: _float_field(d, name, "TurnTimestamps") for name in names})


@dataclass(frozen=True)
class LatencyTrace:
    """Per-turn latency decomposition in seconds; components are non-negative."""

    asr_s: float
    reasoning_s: float
    orchestration_s: float
    end_to_end_s: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = quantize(getattr(self, f.name))
            if value < 0:
                raise ValueError(f"LatencyTrace.{f.name} must be non-negative, got {value}")
            object.__setattr__(self, f.name, value)

    def to_json_dict(self) -> JSONDict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_json_dict(cls, d: Any) -> "LatencyTrace":
        names = tuple(f.name for f in fields(cls))
        _check_fields(d, "LatencyTrace", names)
        return cls(**{name: _float_field(d, name, "LatencyTrace") for name in names})


def derive_latency(ts: TurnTimestamps, asr_wall_s: float | None = None) -> LatencyTrace:
    """Decompose one turn's timestamps into component latencies.

    end_to_end_s runs from end of user speech to the start of robot speech;
    playback itself is not latency. asr_s is ``asr_done - recording_end``
    unless the measured ASR wall duration is supplied, in which case any
    pre-ASR transfer time is folded into orchestration_s. orchestration_s is
    computed residually, so the three components always sum to end_to_end_s
    to float precision.

    Raises OrderingViolation when the timestamps are not monotonic.
    """
    if not ts.ordered():
        raise OrderingViolation(f"timestamps out of order: {ts.to_json_dict()}")
    end_to_end = quantize((ts.playback_start - ts.recording_end) / 1000.0)
    if asr_wall_s is None:
        asr = quantize((ts.asr_done - ts.recording_end) / 1000.0)
    else:
        asr = quantize(asr_wall_s)
    asr = min(asr, end_to_end)
    reasoning = min(quantize((ts.reasoning_done - ts.asr_done) / 1000.0), quantize(end_to_end - asr))
    orchestration = quantize(end_to_end - asr - reasoning)
    return LatencyTrace(asr, reasoning, orchestration, end_to_end)


@dataclass(frozen=True)
class TurnRecord:
    """One completed dialogue turn: transcripts, media references, and timing."""

    turn_index: int
    trigger_id: str
    user_transcript: str
    user_speech_duration_s: float
    robot_response: str
    audio_refs: tuple[str, ...]
    image_refs: tuple[str, ...]
    timestamps: TurnTimestamps
    latency: LatencyTrace

    def __post_init__(self) -> None:
        if self.turn_index < 1:
            raise ValueError(f"turn_index must be >= 1, got {self.turn_index}")
        object.__setattr__(self, "user_speech_duration_s", quantize(self.user_speech_duration_s))
        object.__setattr__(self, "audio_refs", tuple(self.audio_refs))
        object.__setattr__(self, "image_refs", tuple(self.image_refs))

    def to_json_dict(self) -> JSONDict:
        return {
            "turn_index": self.turn_index,
            "trigger_id": self.trigger_id,
            "user_transcript": self.user_transcript,
            "user_speech_duration_s": self.user_speech_duration_s,
            "robot_response": self.robot_response,
            "audio_refs": list(self.audio_refs),
            "image_refs": list(self.image_refs),
            "timestamps": self.timestamps.to_json_dict(),
            "latency": self.latency.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "TurnRecord":
        _check_fields(
            d,
            "TurnRecord",
            (
                "turn_index",
                "trigger_id",
                "user_transcript",
                "user_speech_duration_s",
                "robot_response",
                "audio_refs",
                "image_refs",
                "timestamps",
                "latency",
            ),
        )
        return cls(
            turn_index=_int_field(d, "turn_index", "TurnRecord"),
            trigger_id=_str_field(d, "trigger_id", "TurnRecord"),
            user_transcript=_str_field(d, "user_transcript", "TurnRecord"),
            user_speech_duration_s=_float_field(d, "user_speech_duration_s", "TurnRecord"),
            robot_response=_str_field(d, "robot_response", "TurnRecord"),
            audio_refs=_str_list_field(d, "audio_refs", "TurnRecord"),
            image_refs=_str_list_field(d, "image_refs", "TurnRecord"),
            timestamps=TurnTimestamps.from_json_dict(d["timestamps"]),
            latency=LatencyTrace.from_json_dict(d["latency"]),
        )


def first_use_order(turns: Iterable[TurnRecord]) -> tuple[str, ...]:
    """Trigger ids in the order each one first appears across the turns."""
    seen: list[str] = []
    for turn in turns:
        if turn.trigger_id not in seen:
            seen.append(turn.trigger_id)
    return tuple(seen)


@dataclass(frozen=True)
class SessionRecord:
    """A full session: ordered turns plus identity and outcome metadata."""

    user_id: str
    conversation_time: str
    robot_setup: RobotSetup
    triggers_used: tuple[str, ...]
    turns: tuple[TurnRecord, ...]
    completed_without_intervention: bool

    def __post_init__(self) -> None:
        if not _CONVERSATION_TIME_RE.match(self.conversation_time):
            raise ValueError(
                f"conversation_time must match YYYYMMDD-HHMMSS, got {self.conversation_time!r}"
            )
        object.__setattr__(self, "robot_setup", RobotSetup(self.robot_setup))
        object.__setattr__(self, "triggers_used", tuple(self.triggers_used))
        object.__setattr__(self, "turns", tuple(self.turns))
        indexes = [t.turn_index for t in self.turns]
        # Strictly increasing, not necessarily contiguous: a turn abandoned
        # after a pipeline failure keeps its index but leaves no record.
        if any(a >= b for a, b in zip(indexes, indexes[1:])):
            raise ValueError(f"turn_index values must be strictly increasing, got {indexes}")
        expected = first_use_order(self.turns)
        if self.triggers_used != expected:
            raise ValueError(
                f"triggers_used {self.triggers_used!r} does not match first-use order {expected!r}"
            )

    @property
    def session_key(self) -> str:
        return f"{self.user_id}_{self.conversation_time}"

    @classmethod
    def build(
        cls,
        user_id: str,
        conversation_time: str,
        robot_setup: RobotSetup,
        turns: Iterable[TurnRecord],
        completed_without_intervention: bool = True,
    ) -> "SessionRecord":
        turns = tuple(turns)
        return cls(
            user_id=user_id,
            conversation_time=conversation_time,
            robot_setup=robot_setup,
            triggers_used=first_use_order(turns),
            turns=turns,
            completed_without_intervention=completed_without_intervention,
        )

    def to_json_dict(self) -> JSONDict:
        return {
            "user_id": self.user_id,
            "conversation_time": self.conversation_time,
            "robot_setup": self.robot_setup.value,
            "triggers_used": list(self.triggers_used),
            "turns": [t.to_json_dict() for t in self.turns],
            "completed_without_intervention": self.completed_without_intervention,
        }

    @classmethod
    def from_json_dict(cls, d: Any) -> "SessionRecord":
        _check_fields(
            d,
            "SessionRecord",
            (
                "user_id",
                "conversation_time",
                "robot_setup",
                "triggers_used",
                "turns",
                "completed_without_intervention",
            ),
        )
        setup_raw = _str_field(d, "robot_setup", "SessionRecord")
        try:
            setup = RobotSetup(setup_raw)
        except ValueError as exc:
            raise SchemaError(f"SessionRecord.robot_setup: unknown setup {setup_raw!r}") from exc
        turns_raw = d.get("turns")
        if not isinstance(turns_raw, list):
            raise SchemaError("SessionRecord.turns: expected list")
        return cls(
            user_id=_str_field(d, "user_id", "SessionRecord"),
            conversation_time=_str_field(d, "conversation_time", "SessionRecord"),
            robot_setup=setup,
            triggers_used=_str_list_field(d, "triggers_used", "SessionRecord"),
            turns=tuple(TurnRecord.from_json_dict(t) for t in turns_raw),
            completed_without_intervention=_bool_field(d, "completed_without_intervention", "SessionRecord"),
        )
