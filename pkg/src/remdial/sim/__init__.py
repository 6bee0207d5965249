"""Deterministic simulation harness: scripted sessions on a virtual clock."""

from ..analytics.metrics import LatencyReport, MissingSetup, latency_report
from .backends import DelayModel, MockDialogue, MockSynthesis, MockTranscription, make_mock_suite
from .runner import (
    RunResult,
    generate_corpus,
    load_setup_map,
    run_scenario,
    run_scenario_wall,
)
from .scenario import (
    Action,
    End,
    FaultSpec,
    Pause,
    Repeat,
    Scenario,
    SelectTrigger,
    Speak,
    load_scenario,
)
from .sensors import NullSpeechPlayer, RecordingDisplay, ScriptedMicrophone, StaticCamera

__all__ = [
    "Action",
    "DelayModel",
    "End",
    "FaultSpec",
    "LatencyReport",
    "MissingSetup",
    "MockDialogue",
    "MockSynthesis",
    "MockTranscription",
    "NullSpeechPlayer",
    "Pause",
    "RecordingDisplay",
    "Repeat",
    "RunResult",
    "Scenario",
    "ScriptedMicrophone",
    "SelectTrigger",
    "Speak",
    "StaticCamera",
    "generate_corpus",
    "latency_report",
    "load_scenario",
    "load_setup_map",
    "make_mock_suite",
    "run_scenario",
    "run_scenario_wall",
]
