"""
A complete reminiscence session, end to end, in one page
========================================================

The scenario below plays a caregiver-prepared photo trigger, two spoken
memories, one "say that again" request, and the home button. Everything
runs on the virtual clock, so the whole session finishes instantly and
reproducibly while still exercising the real host, edge client, and
session store.
"""

import tempfile
from pathlib import Path

from remdial.model import MemoryTrigger, RobotSetup, UserProfile
from remdial.sim import End, Repeat, Scenario, SelectTrigger, Speak, run_scenario
from remdial.store import load_session

# A small profile: three triggers with captions the rule annotator can
# match against. A real deployment preloads this from the portal.
profile = UserProfile(
    user_id="P42",
    display_name="Pat",
    triggers=(
        MemoryTrigger("trig-1", "garden.jpg", "the old garden behind the house"),
        MemoryTrigger("trig-2", "wedding.jpg", "your wedding day at the lake"),
        MemoryTrigger("trig-3", "bakery.jpg", "the bakery you ran with your sister"),
    ),
)

scenario = Scenario(
    user_id="P42",
    conversation_time="20250615-143000",
    robot_setup=RobotSetup.SETUP_II,
    profile=profile,
    actions=(
        SelectTrigger("trig-1"),
        Speak("I remember the roses we grew out back by the fence.", 9.0),
        Speak("My sister watered them every morning before school.", 7.0),
        Repeat(),  # play the last response again, slower
        End(),
    ),
)

out_dir = Path(tempfile.mkdtemp(prefix="remdial-demo-"))
result = run_scenario(scenario, out_dir=out_dir)

record = result.record
print(f"session {result.session_id} on setup {record.robot_setup.value}")
print(f"completed without intervention: {record.completed_without_intervention}")
for turn in record.turns:
    print(f"\nturn {turn.turn_index} ({turn.trigger_id})")
    print(f"  user said: {turn.user_transcript!r} ({turn.user_speech_duration_s:.0f}s)")
    print(f"  robot replied: {turn.robot_response!r}")
    lat = turn.latency
    print(
        f"  latency: asr {lat.asr_s:.2f}s, reasoning {lat.reasoning_s:.2f}s,"
        f" orchestration {lat.orchestration_s:.2f}s, end to end {lat.end_to_end_s:.2f}s"
    )

# The repeat request shows up on the edge as a slowed-down replay.
replays = [
    e
    for e in result.edge.events
    if e.name == "playback_started" and e.detail["speed_factor"] < 1.0
]
print(f"\nslow replays: {len(replays)} at speed {replays[0].detail['speed_factor']}")

# Everything the session produced is on disk in the dataset layout.
stored = load_session(result.dataset_path)
print(f"\ndataset folder: {result.dataset_path.name}")
print(f"  media files: {sorted(stored.media)}")
print(f"  logged events: {len(stored.events)}")
