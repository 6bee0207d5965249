"""Mock turn-pipeline backends driven by an explicit delay model.

Delays are consumed by sleeping on the injected clock, so under a virtual
clock a whole scripted session resolves in milliseconds of wall time while
its recorded timestamps behave like the real pipeline's.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..clock import Clock
from ..edge.devices import parse_wav
from ..host.backends import BackendFailure, BackendSuite, TranscriptionResult
from ..host.prompt import PromptBundle


@dataclass(frozen=True)
class DelayModel:
    """Stage delays in seconds for one setup profile.

    With ``jitter_s`` zero the stages are constants.  Otherwise each stage
    draws base + uniform(-jitter_s, +jitter_s), clamped at zero, from a
    stream seeded by ``seed`` so runs stay reproducible.
    """

    asr_s: float
    reasoning_s: float
    dispatch_s: float
    jitter_s: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("asr_s", "reasoning_s", "dispatch_s", "jitter_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"DelayModel.{name} must be non-negative")

    @classmethod
    def robot_native(cls) -> "DelayModel":
        """On-robot processing profile: slow ASR and heavyweight dispatch."""
        return cls(asr_s=1.18, reasoning_s=4.63, dispatch_s=3.44)

    @classmethod
    def edge_offload(cls) -> "DelayModel":
        """Edge-offloaded profile: faster ASR, thin dispatch."""
        return cls(asr_s=0.97, reasoning_s=4.48, dispatch_s=0.44)

    @property
    def total_s(self) -> float:
        return self.asr_s + self.reasoning_s + self.dispatch_s

    def make_rng(self) -> random.Random | None:
        return random.Random(self.seed) if self.jitter_s > 0 else None


def _jittered(base: float, jitter_s: float, rng: random.Random | None) -> float:
    if rng is None or jitter_s <= 0:
        return base
    return max(0.0, base + rng.uniform(-jitter_s, jitter_s))


class MockTranscription:
    """Reads the transcript tag out of the placeholder WAV after a scripted delay."""

    def __init__(
        self,
        clock: Clock,
        delays: DelayModel,
        *,
        fail_calls: frozenset[int] = frozenset(),
        rng: random.Random | None = None,
    ):
        self.clock = clock
        self.delays = delays
        self.fail_calls = frozenset(fail_calls)
        self.rng = rng
        self.calls = 0

    def transcribe(self, audio: bytes) -> TranscriptionResult:
        self.calls += 1
        self.clock.sleep(_jittered(self.delays.asr_s, self.delays.jitter_s, self.rng))
        if self.calls in self.fail_calls:
            raise BackendFailure("asr", f"injected failure on call {self.calls}")
        duration, transcript = parse_wav(audio)
        if transcript is None:
            raise BackendFailure("asr", "no speech recognized")
        return TranscriptionResult(transcript, duration)


class MockDialogue:
    """Template reply keyed off the prompt contents; same prompt, same reply."""

    def __init__(
        self,
        clock: Clock,
        delays: DelayModel,
        *,
        fail_calls: frozenset[int] = frozenset(),
        rng: random.Random | None = None,
    ):
        self.clock = clock
        self.delays = delays
        self.fail_calls = frozenset(fail_calls)
        self.rng = rng
        self.calls = 0
        self.bundles: list[PromptBundle] = []

    def respond(self, bundle: PromptBundle) -> str:
        self.calls += 1
        self.clock.sleep(_jittered(self.delays.reasoning_s, self.delays.jitter_s, self.rng))
        if self.calls in self.fail_calls:
            raise BackendFailure("reasoning", f"injected failure on call {self.calls}")
        self.bundles.append(bundle)
        topic = "that"
        if bundle.trigger_context:
            # drop the field label so the reply reads like speech
            topic = bundle.trigger_context.splitlines()[0].removeprefix("Caption: ")
        said = bundle.latest_user_response.strip()
        if not said:
            return f"Take your time. When you are ready, tell me about {topic}."
        if said.endswith("?"):
            return f"That is a lovely question. Looking at {topic}, what do you remember first?"
        return f"Thank you for sharing that. What else comes to mind about {topic}?"


class MockSynthesis:
    """Charges the dispatch delay, then reports a pacing-derived duration."""

    def __init__(
        self,
        clock: Clock,
        delays: DelayModel,
        *,
        chars_per_s: float = 20.0,
        fail_calls: frozenset[int] = frozenset(),
        rng: random.Random | None = None,
    ):
        if chars_per_s <= 0:
            raise ValueError("chars_per_s must be positive")
        self.clock = clock
        self.delays = delays
        self.chars_per_s = chars_per_s
        self.fail_calls = frozenset(fail_calls)
        self.rng = rng
        self.calls = 0

    def synthesize(self, text: str, speed_factor: float) -> float:
        self.calls += 1
        self.clock.sleep(_jittered(self.delays.dispatch_s, self.delays.jitter_s, self.rng))
        if self.calls in self.fail_calls:
            raise BackendFailure("synthesis", f"injected failure on call {self.calls}")
        if not text:
            return 0.0
        return len(text) / (self.chars_per_s * speed_factor)


def make_mock_suite(
    clock: Clock,
    delays: DelayModel,
    *,
    chars_per_s: float = 20.0,
    fail_asr_calls: frozenset[int] = frozenset(),
    fail_reasoning_calls: frozenset[int] = frozenset(),
    fail_synthesis_calls: frozenset[int] = frozenset(),
) -> BackendSuite:
    # One shared stream keeps jitter draws in pipeline order (asr, reasoning,
    # dispatch per turn) so a seed pins the whole run.
    rng = delays.make_rng()
    return BackendSuite(
        transcription=MockTranscription(clock, delays, fail_calls=fail_asr_calls, rng=rng),
        dialogue=MockDialogue(clock, delays, fail_calls=fail_reasoning_calls, rng=rng),
        synthesis=MockSynthesis(
            clock, delays, chars_per_s=chars_per_s, fail_calls=fail_synthesis_calls, rng=rng
        ),
    )
