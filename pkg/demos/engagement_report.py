"""
From raw sessions to an engagement report
=========================================

Four participants each hold a short conversation, two per setup. The
sessions land in one dataset directory together with a setup map, and
the offline analytics pass turns them into per-participant engagement
rows, pooled means, and a setup comparison. The rule-based annotator
fills in the semantic labels from the stored transcripts, so no manual
coding is needed to get a first look at a fresh corpus.
"""

import tempfile
from pathlib import Path

from remdial.analytics import analyze_corpus, render_markdown
from remdial.model import MemoryTrigger, RobotSetup, UserProfile
from remdial.sim import End, Scenario, SelectTrigger, Speak, generate_corpus, load_setup_map


def scripted(user_id: str, setup: RobotSetup, utterances: list[tuple[str, float]]) -> Scenario:
    profile = UserProfile(
        user_id=user_id,
        display_name=user_id,
        triggers=(MemoryTrigger("trig-1", "harbor.jpg", "the fishing boats in the old harbor"),),
    )
    actions = [SelectTrigger("trig-1")]
    actions += [Speak(text, duration) for text, duration in utterances]
    actions.append(End())
    return Scenario(
        user_id=user_id,
        conversation_time="20250701-090000",
        robot_setup=setup,
        profile=profile,
        actions=tuple(actions),
    )


# Participants one and three reminisce at length; two and four drift off
# topic and ask questions, which the annotator scores differently.
scenarios = [
    scripted("E01", RobotSetup.SETUP_I, [
        ("I remember the boats coming in at dawn with the catch.", 14.0),
        ("My father let me hold the tiller once, I felt so proud.", 16.0),
    ]),
    scripted("E02", RobotSetup.SETUP_I, [
        ("What time is lunch today?", 4.0),
        ("The boats, yes, the harbor was always busy back then.", 9.0),
    ]),
    scripted("E03", RobotSetup.SETUP_II, [
        ("I remember selling the catch straight off the pier with my brother.", 15.0),
        ("We used to scrub the boats every Sunday, I loved those mornings.", 13.0),
    ]),
    scripted("E04", RobotSetup.SETUP_II, [
        ("Is it raining outside?", 3.0),
        ("I remember one storm, the whole fleet stayed in the harbor.", 12.0),
    ]),
]

dataset = Path(tempfile.mkdtemp(prefix="remdial-corpus-"))
paths = generate_corpus(scenarios, dataset)
print(f"wrote {len(paths)} sessions to {dataset}")

setup_map = load_setup_map(dataset / "setup_map.json")
report = analyze_corpus(dataset, setup_map=setup_map)

# The gaze and valence columns stay blank here: those come from per-frame
# annotations of the camera captures, which scripted runs do not produce.
print(render_markdown(report))
