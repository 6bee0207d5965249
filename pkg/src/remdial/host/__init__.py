"""Turn orchestration: state machine, prompt assembly, backends, and service."""

from .backends import (
    BackendFailure,
    BackendSuite,
    DialogueBackend,
    SynthesisBackend,
    TranscriptionBackend,
    TranscriptionResult,
)
from .machine import (
    APOLOGY_TEXT,
    LEGAL_TRANSITIONS,
    InternalEvent,
    SessionPhase,
    SessionState,
    handle_command,
)
from .prompt import PromptBundle, assemble_prompt, load_strategy_directives, select_turn_images
from .service import HostConfig, HostService, SessionEvent

__all__ = [
    "APOLOGY_TEXT",
    "BackendFailure",
    "BackendSuite",
    "DialogueBackend",
    "HostConfig",
    "HostService",
    "InternalEvent",
    "LEGAL_TRANSITIONS",
    "PromptBundle",
    "SessionEvent",
    "SessionPhase",
    "SessionState",
    "SynthesisBackend",
    "TranscriptionBackend",
    "TranscriptionResult",
    "assemble_prompt",
    "handle_command",
    "load_strategy_directives",
    "select_turn_images",
]
