"""Prompt assembly: image selection, profile rendering, and the bundle shape."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from ..model import SixMsDomain, UserProfile, MemoryTrigger

_DOMAIN_TITLES = {
    SixMsDomain.WHAT_MATTERS: "What matters",
    SixMsDomain.MEANINGFUL_ACTIVITIES: "Meaningful activities",
    SixMsDomain.MEALTIMES: "Mealtimes",
    SixMsDomain.MEDICATIONS: "Medications and treatments",
    SixMsDomain.MOBILITY: "Mobility",
    SixMsDomain.MAKE_COMFORTABLE: "Personal care comfort",
}


def select_turn_images(
    frames: Sequence[tuple[str, float]],
    *,
    min_spacing_s: float = 2.0,
    max_images: int = 3,
) -> tuple[str, ...]:
    """Pick up to ``max_images`` frame refs with pairwise spacing >= ``min_spacing_s``.

    Greedy earliest-first: the first frame is always kept, then each next
    frame whose capture time is at least ``min_spacing_s`` after the last
    kept one. Input order does not matter; ties resolve by ref name so the
    result is deterministic.
    """
    chosen: list[str] = []
    last_t = None
    for ref, t in sorted(frames, key=lambda pair: (pair[1], pair[0])):
        if last_t is None or t - last_t >= min_spacing_s:
            chosen.append(ref)
            last_t = t
            if len(chosen) == max_images:
                break
    return tuple(chosen)


def load_strategy_directives() -> str:
    """Read the versioned conversation-strategy directive text shipped as an asset."""
    return resources.files("remdial.host").joinpath("assets/strategy_directives.md").read_text("utf-8")


def render_personal_info(profile: UserProfile) -> str:
    """Stable plain-text rendering of the structured profile entries."""
    lines = [f"Name: {profile.display_name}"]
    for domain in SixMsDomain:
        entries = profile.six_ms.get(domain.value, ())
        if entries:
            lines.append(f"{_DOMAIN_TITLES[domain]}: " + "; ".join(entries))
    if profile.communication_notes:
        lines.append(f"Communication notes: {profile.communication_notes}")
    return "\n".join(lines)


@dataclass(frozen=True)
class PromptBundle:
    """The six-part structured prompt handed to the dialogue backend."""

    personal_info: str
    trigger_context: str
    facial_image_refs: tuple[str, ...]
    latest_user_response: str
    strategy_directives: str
    history: tuple[tuple[str, str], ...]

    def to_text(self) -> str:
        sections = [
            ("PERSONAL BACKGROUND", self.personal_info),
            ("ACTIVE MEMORY TRIGGER", self.trigger_context),
            ("FACIAL SNAPSHOTS", "\n".join(self.facial_image_refs) or "(none)"),
            ("LATEST USER RESPONSE", self.latest_user_response),
            ("CONVERSATION STRATEGY", self.strategy_directives),
            ("RECENT HISTORY", "\n".join(f"{s}: {t}" for s, t in self.history) or "(none)"),
        ]
        return "\n\n".join(f"[{title}]\n{body}" for title, body in sections)


def assemble_prompt(
    profile: UserProfile,
    trigger: MemoryTrigger,
    transcript: str,
    image_refs: Sequence[str],
    history: Sequence[tuple[str, str]],
    *,
    history_window: int = 6,
) -> PromptBundle:
    """Build the structured prompt for one reasoning call.

    ``history_window`` bounds history to the last N exchanges (2N entries).
    Assembly is deterministic: equal inputs produce equal bundles.
    """
    trigger_context = f"Caption: {trigger.caption}"
    if trigger.narrative:
        trigger_context += f"\nStory: {trigger.narrative}"
    if trigger.domain_tags:
        trigger_context += "\nDomains: " + ", ".join(t.value for t in trigger.domain_tags)
    return PromptBundle(
        personal_info=render_personal_info(profile),
        trigger_context=trigger_context,
        facial_image_refs=tuple(image_refs),
        latest_user_response=transcript,
        strategy_directives=load_strategy_directives(),
        history=tuple(history)[-2 * history_window :],
    )
