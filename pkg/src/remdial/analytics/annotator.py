"""Deterministic rule-based semantic annotation of user turns.

This is a transparent stand-in for human coders: pure string rules, no
models, the same input always yields the same labels. The rules encode the
annotation scheme's precedence order so downstream metrics stay stable.
"""

from __future__ import annotations

import re
from typing import Protocol, runtime_checkable

from .annotations import DialogueAct, EmotionalTone, SemanticAnnotation

_WORD_RE = re.compile(r"[a-z']+")

_STOPWORDS = frozenset(
    """a an and are as at be but by for from had has have he her his i in is it its me my of on or
    our she so that the their them they this to was we were what when where who will with you your
    yes no okay oh well really very just about there then than did do don't""".split()
)

_REPAIR_MARKERS = (
    "what did you say",
    "say that again",
    "could you repeat",
    "can you repeat",
    "i don't understand",
    "i didn't catch",
    "didn't hear",
    "pardon",
)

_QUESTION_STARTS = ("what", "where", "when", "who", "why", "how", "do you", "did you", "can you", "are you", "is it")

_BACKCHANNEL = frozenset({"yes", "yeah", "no", "okay", "ok", "mhm", "mm", "uh-huh", "right", "sure", "i see", "hmm"})

_PHATIC_MARKERS = ("hello", "good morning", "good afternoon", "thank you", "thanks", "nice to", "how are you")

_FIRST_PERSON_MEMORY = (
    "i remember",
    "i used to",
    "we used to",
    "i was",
    "we were",
    "we would",
    "i would",
    "my ",
    "our ",
    "i had",
    "we had",
    "i grew up",
    "i loved",
    "i miss",
)

_REFLECTION_MARKERS = (
    "loved",
    "love",
    "happiest",
    "happy",
    "proud",
    "wonderful",
    "beautiful",
    "miss",
    "missed",
    "meant so much",
    "best days",
    "never forget",
    "sad",
    "hard time",
)

_NEGATIVE_MARKERS = (
    "scared",
    "frightened",
    "upset",
    "terrible",
    "awful",
    "hate",
    "hated",
    "don't want to talk",
    "stop this",
    "leave me alone",
    "angry",
    "hurts",
)

_LOSS_MARKERS = (
    "miss",
    "missed",
    "passed away",
    "gone now",
    "no longer",
    "not around anymore",
    "wish i could",
    "those days are gone",
    "lost",
)

_POSITIVE_MARKERS = (
    "love",
    "loved",
    "happy",
    "happiest",
    "wonderful",
    "beautiful",
    "enjoyed",
    "enjoy",
    "great",
    "lovely",
    "laugh",
    "laughed",
    "proud",
    "fun",
)


@runtime_checkable
class SemanticAnnotator(Protocol):
    def annotate(self, transcript: str, trigger_caption: str | None = None) -> SemanticAnnotation:
        ...


def _content_words(text: str) -> set[str]:
    return {w for w in _WORD_RE.findall(text.lower()) if w not in _STOPWORDS and len(w) > 2}


def _contains_any(text: str, markers) -> bool:
    return any(marker in text for marker in markers)


def _sentence_count(text: str) -> int:
    parts = [p for p in re.split(r"[.!?]+", text) if p.strip()]
    return max(1, len(parts))


class RuleBasedAnnotator:
    """Keyword and overlap rules with a fixed precedence per dimension."""

    def annotate(self, transcript: str, trigger_caption: str | None = None) -> SemanticAnnotation:
        text = " ".join(transcript.lower().split())
        act = self._dialogue_act(text)
        on_topic = self._on_topic(text, trigger_caption, act)
        depth = self._depth(text, act) if on_topic else 0
        tone = self._tone(text)
        return SemanticAnnotation(on_topic, depth, tone, act)

    def _dialogue_act(self, text: str) -> DialogueAct:
        if not text:
            return DialogueAct.OFF_TOPIC_COMMENT
        if _contains_any(text, _REPAIR_MARKERS):
            return DialogueAct.REPAIR_MISUNDERSTANDING
        if text.endswith("?") or text.rstrip("?").strip().startswith(_QUESTION_STARTS):
            return DialogueAct.QUESTION
        bare = text.rstrip(".!? ")
        if bare in _BACKCHANNEL or (len(bare.split()) <= 2 and bare.split() and bare.split()[0] in _BACKCHANNEL):
            return DialogueAct.ACKNOWLEDGMENT_BACKCHANNEL
        if _contains_any(text, _FIRST_PERSON_MEMORY):
            return DialogueAct.SELF_DISCLOSURE
        if _contains_any(text, _PHATIC_MARKERS):
            return DialogueAct.PHATIC_SOCIAL
        return DialogueAct.ANSWER

    def _on_topic(self, text: str, trigger_caption: str | None, act: DialogueAct) -> int:
        if act is DialogueAct.SELF_DISCLOSURE:
            return 1
        if act in (DialogueAct.REPAIR_MISUNDERSTANDING, DialogueAct.PHATIC_SOCIAL):
            return 0
        if trigger_caption:
            overlap = _content_words(text) & _content_words(trigger_caption)
            if overlap:
                return 1
        if act is DialogueAct.ANSWER and _contains_any(text, ("remember", "back then", "in those days")):
            return 1
        return 0

    def _depth(self, text: str, act: DialogueAct) -> int:
        if act in (
            DialogueAct.QUESTION,
            DialogueAct.ACKNOWLEDGMENT_BACKCHANNEL,
            DialogueAct.PHATIC_SOCIAL,
            DialogueAct.REPAIR_MISUNDERSTANDING,
            DialogueAct.OFF_TOPIC_COMMENT,
        ):
            return 0
        personal = _contains_any(text, _FIRST_PERSON_MEMORY)
        if not personal:
            return 1
        elaborated = _sentence_count(text) >= 2 or len(text.split()) >= 25
        reflective = _contains_any(text, _REFLECTION_MARKERS)
        if elaborated and reflective:
            return 3
        if elaborated or reflective:
            return 2
        return 1

    def _tone(self, text: str) -> EmotionalTone:
        if _contains_any(text, _NEGATIVE_MARKERS):
            return EmotionalTone.NEGATIVE_DISTRESS
        loss = _contains_any(text, _LOSS_MARKERS)
        positive = _contains_any(text, _POSITIVE_MARKERS)
        if loss and positive:
            return EmotionalTone.BITTERSWEET
        if loss:
            return EmotionalTone.BITTERSWEET
        if positive:
            return EmotionalTone.POSITIVE
        return EmotionalTone.NEUTRAL_MIXED


class MappingAnnotator:
    """Replays externally supplied labels; unknown transcripts fall back to rules."""

    def __init__(self, table: dict[str, SemanticAnnotation], fallback: SemanticAnnotator | None = None):
        self.table = dict(table)
        self.fallback = fallback or RuleBasedAnnotator()

    def annotate(self, transcript: str, trigger_caption: str | None = None) -> SemanticAnnotation:
        hit = self.table.get(transcript)
        if hit is not None:
            return hit
        return self.fallback.annotate(transcript, trigger_caption)
