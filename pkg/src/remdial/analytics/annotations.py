"""Annotation and metric types for offline engagement analysis.

Two annotation layers feed the metrics:

* semantic, one per user turn: topicality, reminiscence depth (0 none,
  1 factual mention, 2 elaborated episode, 3 evaluative reflection),
  emotional tone, and dialogue act
* nonverbal, one per sampled frame: whether attention is on the robot,
  and a coarse facial valence in {-1, 0, +1}
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..model import JSONDict, SchemaError, _check_fields, quantize


class EmotionalTone(str, Enum):
    POSITIVE = "positive"
    BITTERSWEET = "bittersweet"
    NEGATIVE_DISTRESS = "negative_distress"
    NEUTRAL_MIXED = "neutral_mixed"


class DialogueAct(str, Enum):
    ANSWER = "answer"
    SELF_DISCLOSURE = "self_disclosure"
    QUESTION = "question"
    ACKNOWLEDGMENT_BACKCHANNEL = "acknowledgment_backchannel"
    PHATIC_SOCIAL = "phatic_social"
    OFF_TOPIC_COMMENT = "off_topic_comment"
    REPAIR_MISUNDERSTANDING = "repair_misunderstanding"


@dataclass(frozen=True)
class SemanticAnnotation:
    on_topic: int
    reminiscence_depth: int
    emotional_tone: EmotionalTone
    dialogue_act: DialogueAct

    def __post_init__(self):
        if self.on_topic not in (0, 1):
            raise SchemaError(f"on_topic must be 0 or 1, got {self.on_topic!r}")
        if self.reminiscence_depth not in (0, 1, 2, 3):
            raise SchemaError(f"reminiscence_depth must be 0..3, got {self.reminiscence_depth!r}")
        if self.on_topic == 0 and self.reminiscence_depth != 0:
            raise SchemaError("off-topic turns carry no reminiscence depth")

    def to_json_dict(self) -> JSONDict:
        return {
            "on_topic": self.on_topic,
            "reminiscence_depth": self.reminiscence_depth,
            "emotional_tone": self.emotional_tone.value,
            "dialogue_act": self.dialogue_act.value,
        }

    @classmethod
    def from_json_dict(cls, d: JSONDict) -> "SemanticAnnotation":
        data = _check_fields(
            d, "SemanticAnnotation", ("on_topic", "reminiscence_depth", "emotional_tone", "dialogue_act")
        )
        try:
            tone = EmotionalTone(data["emotional_tone"])
            act = DialogueAct(data["dialogue_act"])
        except ValueError as exc:
            raise SchemaError(f"SemanticAnnotation: {exc}") from exc
        if not isinstance(data["on_topic"], int) or isinstance(data["on_topic"], bool):
            raise SchemaError("SemanticAnnotation.on_topic: expected integer")
        if not isinstance(data["reminiscence_depth"], int) or isinstance(data["reminiscence_depth"], bool):
            raise SchemaError("SemanticAnnotation.reminiscence_depth: expected integer")
        return cls(data["on_topic"], data["reminiscence_depth"], tone, act)


@dataclass(frozen=True)
class FrameAnnotation:
    attention_robot: bool
    valence: int

    def __post_init__(self):
        if not isinstance(self.attention_robot, bool):
            raise SchemaError("attention_robot must be boolean")
        if self.valence not in (-1, 0, 1):
            raise SchemaError(f"valence must be -1, 0, or +1, got {self.valence!r}")

    def to_json_dict(self) -> JSONDict:
        return {"attention_robot": self.attention_robot, "valence": self.valence}

    @classmethod
    def from_json_dict(cls, d: JSONDict) -> "FrameAnnotation":
        data = _check_fields(d, "FrameAnnotation", ("attention_robot", "valence"))
        if not isinstance(data["attention_robot"], bool):
            raise SchemaError("FrameAnnotation.attention_robot: expected boolean")
        if not isinstance(data["valence"], int) or isinstance(data["valence"], bool):
            raise SchemaError("FrameAnnotation.valence: expected integer")
        return cls(data["attention_robot"], data["valence"])


@dataclass(frozen=True)
class TurnMetrics:
    """Per-turn rollup; frame-derived fields are None when no frames exist."""

    turn_index: int
    on_topic: int
    reminiscence_depth: int
    emotional_tone: EmotionalTone
    dialogue_act: DialogueAct
    gaze_robot_ratio: float | None = None
    valence_mean: float | None = None
    valence_pos_ratio: float | None = None
    frame_count: int = 0
    user_speech_duration_s: float | None = None

    def __post_init__(self):
        for name in ("gaze_robot_ratio", "valence_pos_ratio"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise SchemaError(f"{name} must lie in [0, 1], got {value!r}")
        if self.valence_mean is not None and not -1.0 <= self.valence_mean <= 1.0:
            raise SchemaError(f"valence_mean must lie in [-1, 1], got {self.valence_mean!r}")


@dataclass(frozen=True)
class MeanSD:
    mean: float
    sd: float

    def rounded(self, digits: int = 2) -> "MeanSD":
        return MeanSD(round(self.mean, digits), round(self.sd, digits))

    def to_json_dict(self) -> JSONDict:
        return {"mean": quantize(self.mean), "sd": quantize(self.sd)}


@dataclass(frozen=True)
class ParticipantStats:
    """One participant's engagement row across a whole session."""

    user_id: str
    robot_setup: str
    turn_count: int
    on_topic_ratio: float
    mean_reminiscence_depth: float
    self_disclosure_ratio: float
    gaze_robot_ratio: float | None
    valence_mean: float | None
    valence_pos_ratio: float | None

    def to_json_dict(self) -> JSONDict:
        return {
            "user_id": self.user_id,
            "robot_setup": self.robot_setup,
            "turn_count": self.turn_count,
            "on_topic_ratio": quantize(self.on_topic_ratio),
            "mean_reminiscence_depth": quantize(self.mean_reminiscence_depth),
            "self_disclosure_ratio": quantize(self.self_disclosure_ratio),
            "gaze_robot_ratio": None if self.gaze_robot_ratio is None else quantize(self.gaze_robot_ratio),
            "valence_mean": None if self.valence_mean is None else quantize(self.valence_mean),
            "valence_pos_ratio": None
            if self.valence_pos_ratio is None
            else quantize(self.valence_pos_ratio),
        }


ENGAGEMENT_COLUMNS = (
    "on_topic_ratio",
    "mean_reminiscence_depth",
    "self_disclosure_ratio",
    "gaze_robot_ratio",
    "valence_mean",
    "valence_pos_ratio",
)


@dataclass(frozen=True)
class SetupComparison:
    """Engagement column summaries for two hardware setups side by side."""

    columns: tuple[str, ...]
    by_setup: dict[str, dict[str, MeanSD]]

    def to_json_dict(self) -> JSONDict:
        return {
            "columns": list(self.columns),
            "by_setup": {
                setup: {col: ms.to_json_dict() for col, ms in cols.items()}
                for setup, cols in sorted(self.by_setup.items())
            },
        }


@dataclass(frozen=True)
class SystemMetrics:
    session_count: int
    completion_rate: float
    completion_by_setup: dict[str, float]
    latency_by_setup: dict[str, MeanSD]
    turns_per_session: MeanSD
    session_duration_min: MeanSD

    def to_json_dict(self) -> JSONDict:
        return {
            "session_count": self.session_count,
            "completion_rate": quantize(self.completion_rate),
            "completion_by_setup": {k: quantize(v) for k, v in sorted(self.completion_by_setup.items())},
            "latency_by_setup": {k: v.to_json_dict() for k, v in sorted(self.latency_by_setup.items())},
            "turns_per_session": self.turns_per_session.to_json_dict(),
            "session_duration_min": self.session_duration_min.to_json_dict(),
        }


def semantic_annotations_to_json(annotations: Sequence[SemanticAnnotation]) -> list[JSONDict]:
    return [a.to_json_dict() for a in annotations]
