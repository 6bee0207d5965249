"""End-to-end analysis over a stored session corpus, with renderers.

The pipeline reads session folders, annotates user turns (from stored
labels or the rule annotator), rolls them up per participant, and compares
hardware setups. Output rendering is deterministic: same corpus in, same
bytes out, so reports can be diffed and archived.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..model import JSONDict, SchemaError, SessionRecord, canonical_dumps
from ..store import CorpusDiagnostic, StoredSession, scan_corpus
from .annotations import (
    ENGAGEMENT_COLUMNS,
    FrameAnnotation,
    MeanSD,
    ParticipantStats,
    SemanticAnnotation,
    SetupComparison,
    SystemMetrics,
    TurnMetrics,
)
from .annotator import RuleBasedAnnotator, SemanticAnnotator
from .metrics import (
    InsufficientGroup,
    aggregate_participant,
    aggregate_turn,
    compare_setups,
    overall_row,
    system_metrics,
)


@dataclass(frozen=True)
class AnalysisReport:
    participants: tuple[ParticipantStats, ...]
    overall: Mapping[str, MeanSD]
    setup_comparison: SetupComparison | None
    system: SystemMetrics
    diagnostics: tuple[CorpusDiagnostic, ...] = ()

    def to_json_dict(self) -> JSONDict:
        return {
            "participants": [p.to_json_dict() for p in self.participants],
            "overall": {col: ms.to_json_dict() for col, ms in self.overall.items()},
            "setup_comparison": None
            if self.setup_comparison is None
            else self.setup_comparison.to_json_dict(),
            "system": self.system.to_json_dict(),
            "diagnostics": [
                {"folder": d.folder, "problem": d.problem} for d in self.diagnostics
            ],
        }


@dataclass
class _ParticipantBucket:
    setup: str
    turns: list[TurnMetrics] = field(default_factory=list)


def _frames_for_turn(session: StoredSession, image_refs: Sequence[str]) -> list[FrameAnnotation]:
    frames = []
    for name in image_refs:
        raw = session.frame_annotations.get(name)
        if raw is not None:
            frames.append(FrameAnnotation.from_json_dict(dict(raw)))
    return frames


def _semantic_for_turn(
    session: StoredSession,
    turn_index: int,
    transcript: str,
    caption: str | None,
    annotator: SemanticAnnotator,
    source: str,
) -> SemanticAnnotation:
    stored = session.semantic_annotations.get(turn_index)
    if source == "rule":
        return annotator.annotate(transcript, caption)
    if stored is not None:
        return SemanticAnnotation.from_json_dict(dict(stored))
    if source == "stored":
        raise SchemaError(
            f"{session.root.name}: no stored semantic annotation for turn {turn_index}"
        )
    return annotator.annotate(transcript, caption)


def _caption_for(record: SessionRecord, trigger_id: str) -> str | None:
    # Stored records carry trigger ids only; the caption is recoverable from
    # the profile when the caller has one. Fall back to the id as topic text.
    return trigger_id.replace("-", " ").replace("_", " ") or None


def analyze_sessions(
    sessions: Sequence[StoredSession],
    *,
    setup_map: Mapping[str, str] | None = None,
    annotator: SemanticAnnotator | None = None,
    semantic_source: str = "auto",
    diagnostics: Sequence[CorpusDiagnostic] = (),
) -> AnalysisReport:
    """Aggregate already-loaded sessions into one report."""
    if semantic_source not in ("auto", "stored", "rule"):
        raise ValueError(f"semantic_source must be auto, stored, or rule: {semantic_source!r}")
    annotator = annotator or RuleBasedAnnotator()
    setup_map = dict(setup_map or {})
    buckets: dict[str, _ParticipantBucket] = {}
    records: list[SessionRecord] = []
    notes = list(diagnostics)
    for session in sessions:
        record = session.record
        records.append(record)
        setup = setup_map.get(record.user_id, record.robot_setup.value)
        bucket = buckets.setdefault(record.user_id, _ParticipantBucket(setup))
        for turn in record.turns:
            semantic = _semantic_for_turn(
                session,
                turn.turn_index,
                turn.user_transcript,
                _caption_for(record, turn.trigger_id),
                annotator,
                semantic_source,
            )
            frames = _frames_for_turn(session, turn.image_refs)
            bucket.turns.append(
                aggregate_turn(
                    turn.turn_index,
                    semantic,
                    frames,
                    user_speech_duration_s=turn.user_speech_duration_s,
                )
            )
    participants = tuple(
        aggregate_participant(user_id, bucket.setup, bucket.turns)
        for user_id, bucket in sorted(buckets.items())
        if bucket.turns
    )
    overall = overall_row(participants) if participants else {}
    comparison: SetupComparison | None
    try:
        comparison = compare_setups(participants) if participants else None
    except InsufficientGroup as exc:
        comparison = None
        notes.append(CorpusDiagnostic("(setup comparison)", str(exc)))
    if not records:
        raise SchemaError("no loadable sessions in corpus")
    return AnalysisReport(participants, overall, comparison, system_metrics(records), tuple(notes))


def analyze_corpus(
    root: Path | str,
    *,
    setup_map: Mapping[str, str] | None = None,
    annotator: SemanticAnnotator | None = None,
    semantic_source: str = "auto",
) -> AnalysisReport:
    """Load a dataset directory and aggregate it into one report."""
    sessions, diagnostics = scan_corpus(root)
    return analyze_sessions(
        sessions,
        setup_map=setup_map,
        annotator=annotator,
        semantic_source=semantic_source,
        diagnostics=diagnostics,
    )


# -- renderers ----------------------------------------------------------------


def render_json(report: AnalysisReport) -> str:
    return canonical_dumps(report.to_json_dict(), indent=2) + "\n"


_COLUMN_TITLES = {
    "on_topic_ratio": "On-topic",
    "mean_reminiscence_depth": "Depth",
    "self_disclosure_ratio": "Self-disclosure",
    "gaze_robot_ratio": "Gaze-on-robot",
    "valence_mean": "Valence mean",
    "valence_pos_ratio": "Valence positive",
}


def _cell(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def render_csv(report: AnalysisReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["participant", "setup", "turns", *ENGAGEMENT_COLUMNS])
    for p in report.participants:
        writer.writerow(
            [
                p.user_id,
                p.robot_setup,
                p.turn_count,
                _cell(p.on_topic_ratio),
                _cell(p.mean_reminiscence_depth),
                _cell(p.self_disclosure_ratio),
                _cell(p.gaze_robot_ratio),
                _cell(p.valence_mean),
                _cell(p.valence_pos_ratio),
            ]
        )
    if report.overall:
        means = [_cell(report.overall[c].mean) if c in report.overall else "" for c in ENGAGEMENT_COLUMNS]
        sds = [_cell(report.overall[c].sd) if c in report.overall else "" for c in ENGAGEMENT_COLUMNS]
        writer.writerow(["mean", "", "", *means])
        writer.writerow(["sd", "", "", *sds])
    return out.getvalue()


def render_markdown(report: AnalysisReport) -> str:
    lines: list[str] = ["# Engagement report", ""]
    lines.append(
        f"Sessions: {report.system.session_count}; "
        f"completion rate: {report.system.completion_rate:.1%}"
    )
    lines.append("")
    lines.append("## Participants")
    lines.append("")
    header = ["Participant", "Setup", "Turns"] + [_COLUMN_TITLES[c] for c in ENGAGEMENT_COLUMNS]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for p in report.participants:
        cells = [
            p.user_id,
            p.robot_setup,
            str(p.turn_count),
            _cell(p.on_topic_ratio),
            _cell(p.mean_reminiscence_depth),
            _cell(p.self_disclosure_ratio),
            _cell(p.gaze_robot_ratio),
            _cell(p.valence_mean),
            _cell(p.valence_pos_ratio),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    if report.overall:
        mean_cells = ["Mean", "", ""] + [
            _cell(report.overall[c].mean) if c in report.overall else "" for c in ENGAGEMENT_COLUMNS
        ]
        sd_cells = ["SD", "", ""] + [
            _cell(report.overall[c].sd) if c in report.overall else "" for c in ENGAGEMENT_COLUMNS
        ]
        lines.append("| " + " | ".join(mean_cells) + " |")
        lines.append("| " + " | ".join(sd_cells) + " |")
    if report.setup_comparison is not None:
        lines.append("")
        lines.append("## By setup")
        lines.append("")
        setups = sorted(report.setup_comparison.by_setup)
        header2 = ["Metric"] + [f"Setup {s} (mean +/- SD)" for s in setups]
        lines.append("| " + " | ".join(header2) + " |")
        lines.append("|" + "---|" * len(header2))
        for col in ENGAGEMENT_COLUMNS:
            row = [_COLUMN_TITLES[col]]
            for setup in setups:
                ms = report.setup_comparison.by_setup[setup].get(col)
                row.append("" if ms is None else f"{ms.mean:.2f} +/- {ms.sd:.2f}")
            lines.append("| " + " | ".join(row) + " |")
    if report.diagnostics:
        lines.append("")
        lines.append("## Diagnostics")
        lines.append("")
        for d in report.diagnostics:
            lines.append(f"- `{d.folder}`: {d.problem}")
    lines.append("")
    return "\n".join(lines)


RENDERERS = {"json": render_json, "csv": render_csv, "md": render_markdown}
