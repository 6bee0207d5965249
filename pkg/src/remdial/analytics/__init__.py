"""Offline engagement and system-performance analytics."""

from .annotations import (
    ENGAGEMENT_COLUMNS,
    DialogueAct,
    EmotionalTone,
    FrameAnnotation,
    MeanSD,
    ParticipantStats,
    SemanticAnnotation,
    SetupComparison,
    SystemMetrics,
    TurnMetrics,
)
from .annotator import MappingAnnotator, RuleBasedAnnotator, SemanticAnnotator
from .metrics import (
    LATENCY_COLUMNS,
    InsufficientGroup,
    LatencyReport,
    LengthMismatch,
    MissingSetup,
    NoFrames,
    OutOfRange,
    aggregate_participant,
    aggregate_turn,
    compare_setups,
    frame_metrics,
    latency_report,
    mean_sd,
    overall_row,
    percentage_agreement,
    semantic_agreement,
    system_metrics,
    ueq_rescale,
    ueq_rescale_series,
)
from .report import (
    RENDERERS,
    AnalysisReport,
    analyze_corpus,
    analyze_sessions,
    render_csv,
    render_json,
    render_markdown,
)

__all__ = [
    "AnalysisReport",
    "DialogueAct",
    "ENGAGEMENT_COLUMNS",
    "EmotionalTone",
    "FrameAnnotation",
    "InsufficientGroup",
    "LATENCY_COLUMNS",
    "LatencyReport",
    "LengthMismatch",
    "MappingAnnotator",
    "MeanSD",
    "MissingSetup",
    "NoFrames",
    "OutOfRange",
    "ParticipantStats",
    "RENDERERS",
    "RuleBasedAnnotator",
    "SemanticAnnotation",
    "SemanticAnnotator",
    "SetupComparison",
    "SystemMetrics",
    "TurnMetrics",
    "aggregate_participant",
    "aggregate_turn",
    "analyze_corpus",
    "analyze_sessions",
    "compare_setups",
    "frame_metrics",
    "latency_report",
    "mean_sd",
    "overall_row",
    "percentage_agreement",
    "render_csv",
    "render_json",
    "render_markdown",
    "semantic_agreement",
    "system_metrics",
    "ueq_rescale",
    "ueq_rescale_series",
]
