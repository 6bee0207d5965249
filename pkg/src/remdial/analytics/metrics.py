"""Aggregation from annotations to participant, setup, and system metrics."""

from __future__ import annotations

import statistics
from typing import Mapping, Sequence

from dataclasses import dataclass

from ..model import LatencyTrace, SessionRecord, quantize
from .annotations import (
    ENGAGEMENT_COLUMNS,
    DialogueAct,
    FrameAnnotation,
    MeanSD,
    ParticipantStats,
    SemanticAnnotation,
    SetupComparison,
    SystemMetrics,
    TurnMetrics,
)


class NoFrames(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class InsufficientGroup(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class MissingSetup(ValueError):
    pass


def frame_metrics(frames: Sequence[FrameAnnotation]) -> tuple[float, float, float]:
    """Gaze-on-robot ratio, mean valence, positive-valence ratio for one turn."""
    if not frames:
        raise NoFrames("turn has no annotated frames")
    n = len(frames)
    gaze = sum(1 for f in frames if f.attention_robot) / n
    val_mean = sum(f.valence for f in frames) / n
    val_pos = sum(1 for f in frames if f.valence == 1) / n
    return quantize(gaze), quantize(val_mean), quantize(val_pos)


def aggregate_turn(
    turn_index: int,
    semantic: SemanticAnnotation,
    frames: Sequence[FrameAnnotation] = (),
    *,
    user_speech_duration_s: float | None = None,
) -> TurnMetrics:
    if frames:
        gaze, val_mean, val_pos = frame_metrics(frames)
    else:
        gaze = val_mean = val_pos = None
    return TurnMetrics(
        turn_index=turn_index,
        on_topic=semantic.on_topic,
        reminiscence_depth=semantic.reminiscence_depth,
        emotional_tone=semantic.emotional_tone,
        dialogue_act=semantic.dialogue_act,
        gaze_robot_ratio=gaze,
        valence_mean=val_mean,
        valence_pos_ratio=val_pos,
        frame_count=len(frames),
        user_speech_duration_s=user_speech_duration_s,
    )


def _mean_or_none(values: list[float]) -> float | None:
    return quantize(statistics.fmean(values)) if values else None


def aggregate_participant(
    user_id: str, robot_setup: str, turns: Sequence[TurnMetrics]
) -> ParticipantStats:
    """Session-level engagement row; turns without frames are excluded from
    the nonverbal columns but still count toward the semantic ones."""
    if not turns:
        raise ValueError(f"no turns for participant {user_id}")
    n = len(turns)
    return ParticipantStats(
        user_id=user_id,
        robot_setup=robot_setup,
        turn_count=n,
        on_topic_ratio=quantize(sum(t.on_topic for t in turns) / n),
        mean_reminiscence_depth=quantize(sum(t.reminiscence_depth for t in turns) / n),
        self_disclosure_ratio=quantize(
            sum(1 for t in turns if t.dialogue_act is DialogueAct.SELF_DISCLOSURE) / n
        ),
        gaze_robot_ratio=_mean_or_none([t.gaze_robot_ratio for t in turns if t.gaze_robot_ratio is not None]),
        valence_mean=_mean_or_none([t.valence_mean for t in turns if t.valence_mean is not None]),
        valence_pos_ratio=_mean_or_none(
            [t.valence_pos_ratio for t in turns if t.valence_pos_ratio is not None]
        ),
    )


def mean_sd(values: Sequence[float]) -> MeanSD:
    """Mean with sample standard deviation (n-1); sd is 0 for a single value."""
    seq = list(values)
    if not seq:
        raise ValueError("mean_sd of empty sequence")
    mean = statistics.fmean(seq)
    sd = statistics.stdev(seq) if len(seq) > 1 else 0.0
    return MeanSD(quantize(mean), quantize(sd))


def _column_values(stats: Sequence[ParticipantStats], column: str) -> list[float]:
    values = []
    for s in stats:
        value = getattr(s, column)
        if value is not None:
            values.append(value)
    return values


def overall_row(stats: Sequence[ParticipantStats]) -> dict[str, MeanSD]:
    """Pooled mean and SD per engagement column across all participants.

    Columns with no data anywhere (e.g. nonverbal ratios in a corpus with
    no frame annotations) are omitted rather than reported as zero.
    """
    out = {}
    for col in ENGAGEMENT_COLUMNS:
        values = _column_values(stats, col)
        if values:
            out[col] = mean_sd(values)
    return out


def compare_setups(stats: Sequence[ParticipantStats]) -> SetupComparison:
    """Per-setup column summaries; refuses groups too small for a spread."""
    groups: dict[str, list[ParticipantStats]] = {}
    for s in stats:
        groups.setdefault(s.robot_setup, []).append(s)
    by_setup: dict[str, dict[str, MeanSD]] = {}
    for setup, members in sorted(groups.items()):
        if len(members) < 2:
            raise InsufficientGroup(f"setup {setup} has {len(members)} participant(s), need 2")
        columns = {}
        for col in ENGAGEMENT_COLUMNS:
            values = _column_values(members, col)
            if values:
                columns[col] = mean_sd(values)
        by_setup[setup] = columns
    return SetupComparison(ENGAGEMENT_COLUMNS, by_setup)


def _session_duration_min(record: SessionRecord) -> float:
    first = record.turns[0].timestamps.recording_start
    last = record.turns[-1].timestamps.playback_end
    return (last - first) / 60000.0


def system_metrics(records: Sequence[SessionRecord]) -> SystemMetrics:
    """Completion, latency, and shape statistics over a session corpus."""
    if not records:
        raise ValueError("system_metrics of empty corpus")
    completed = [r for r in records if r.completed_without_intervention]
    by_setup_records: dict[str, list[SessionRecord]] = {}
    for r in records:
        by_setup_records.setdefault(r.robot_setup.value, []).append(r)
    completion_by_setup = {
        setup: quantize(sum(1 for r in group if r.completed_without_intervention) / len(group))
        for setup, group in by_setup_records.items()
    }
    latency_by_setup = {}
    for setup, group in by_setup_records.items():
        lat = [t.latency.end_to_end_s for r in group for t in r.turns]
        if lat:
            latency_by_setup[setup] = mean_sd(lat)
    with_turns = [r for r in records if r.turns]
    return SystemMetrics(
        session_count=len(records),
        completion_rate=quantize(len(completed) / len(records)),
        completion_by_setup=completion_by_setup,
        latency_by_setup=latency_by_setup,
        turns_per_session=mean_sd([len(r.turns) for r in records]),
        session_duration_min=mean_sd([_session_duration_min(r) for r in with_turns])
        if with_turns
        else MeanSD(0.0, 0.0),
    )


LATENCY_COLUMNS = ("asr_s", "reasoning_s", "orchestration_s", "end_to_end_s")


@dataclass(frozen=True)
class LatencyReport:
    """Per-setup component breakdown plus the relative end-to-end gain."""

    by_setup: Mapping[str, Mapping[str, MeanSD]]
    reduction_pct: float

    def to_json_dict(self) -> dict:
        return {
            "by_setup": {
                setup: {col: ms.to_json_dict() for col, ms in cols.items()}
                for setup, cols in self.by_setup.items()
            },
            "reduction_pct": self.reduction_pct,
        }


def latency_report(traces: Sequence[LatencyTrace], setups: Sequence[str]) -> LatencyReport:
    """Component means per setup and the I-to-II end-to-end reduction.

    ``setups`` labels each trace with its setup ("I" or "II"); both groups
    must be non-empty.  Reduction is (mean_I - mean_II) / mean_I in percent.
    """
    if len(traces) != len(setups):
        raise LengthMismatch(f"traces/setups differ in length: {len(traces)} vs {len(setups)}")
    groups: dict[str, list[LatencyTrace]] = {}
    for trace, setup in zip(traces, setups):
        groups.setdefault(setup, []).append(trace)
    for label in ("I", "II"):
        if not groups.get(label):
            raise MissingSetup(f"no traces labeled setup {label}")
    by_setup = {
        setup: {col: mean_sd([getattr(t, col) for t in group]) for col in LATENCY_COLUMNS}
        for setup, group in sorted(groups.items())
    }
    mean_native = by_setup["I"]["end_to_end_s"].mean
    mean_offload = by_setup["II"]["end_to_end_s"].mean
    if mean_native <= 0:
        raise OutOfRange("setup I mean end-to-end latency must be positive")
    reduction = (mean_native - mean_offload) / mean_native * 100.0
    return LatencyReport(by_setup=by_setup, reduction_pct=quantize(reduction))


def percentage_agreement(a: Sequence, b: Sequence) -> float:
    """Share of positions where two annotation sequences agree exactly."""
    if len(a) != len(b):
        raise LengthMismatch(f"sequences differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("percentage_agreement of empty sequences")
    return quantize(sum(1 for x, y in zip(a, b) if x == y) / len(a))


def ueq_rescale(value: float) -> float:
    """Map a 5-point scale reading onto the 7-point band: x' = (x-1)*6/4 + 1."""
    if not 1.0 <= value <= 5.0:
        raise OutOfRange(f"5-point scale value out of range: {value!r}")
    return quantize((value - 1.0) * 6.0 / 4.0 + 1.0)


def ueq_rescale_series(values: Sequence[float]) -> list[float]:
    return [ueq_rescale(v) for v in values]


def semantic_agreement(
    a: Sequence[SemanticAnnotation], b: Sequence[SemanticAnnotation]
) -> Mapping[str, float]:
    """Per-dimension percentage agreement between two annotation passes."""
    if len(a) != len(b):
        raise LengthMismatch(f"sequences differ in length: {len(a)} vs {len(b)}")
    return {
        "on_topic": percentage_agreement([x.on_topic for x in a], [y.on_topic for y in b]),
        "reminiscence_depth": percentage_agreement(
            [x.reminiscence_depth for x in a], [y.reminiscence_depth for y in b]
        ),
        "emotional_tone": percentage_agreement(
            [x.emotional_tone for x in a], [y.emotional_tone for y in b]
        ),
        "dialogue_act": percentage_agreement(
            [x.dialogue_act for x in a], [y.dialogue_act for y in b]
        ),
    }
