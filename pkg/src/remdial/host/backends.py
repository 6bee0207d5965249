"""Pluggable backend contracts for transcription, dialogue, and synthesis.

Concrete adapters (cloud ASR, LLM endpoints, TTS engines) live outside the
orchestrator; the deterministic mock suite lives in ``remdial.sim.backends``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from .prompt import PromptBundle


class BackendFailure(RuntimeError):
    """A backend invocation failed; ``stage`` names the pipeline stage."""

    def __init__(self, stage: str, detail: str = ""):
        super().__init__(f"{stage} backend failed" + (f": {detail}" if detail else ""))
        self.stage = stage


@dataclass(frozen=True)
class TranscriptionResult:
    text: str
    duration_s: float  # measured wall duration of the transcription call


@runtime_checkable
class TranscriptionBackend(Protocol):
    def transcribe(self, audio: bytes) -> TranscriptionResult: ...


@runtime_checkable
class DialogueBackend(Protocol):
    def respond(self, bundle: PromptBundle) -> str: ...


@runtime_checkable
class SynthesisBackend(Protocol):
    def synthesize(self, text: str, speed_factor: float) -> float:
        """Prepare playback for ``text``; returns the playback duration in seconds."""
        ...


@dataclass(frozen=True)
class BackendSuite:
    transcription: TranscriptionBackend
    dialogue: DialogueBackend
    synthesis: SynthesisBackend
