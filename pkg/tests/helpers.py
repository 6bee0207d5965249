"""Builders shared across the suite: profiles, turn records, whole sessions.

Everything here is deterministic given the caller's rng so that corpus-level
tests can regenerate identical inputs.
"""

import random

from remdial.edge.devices import make_placeholder_jpeg, make_placeholder_wav
from remdial.model import (
    MemoryTrigger,
    RobotSetup,
    SessionRecord,
    SixMsDomain,
    TurnRecord,
    TurnTimestamps,
    UserProfile,
    derive_latency,
)
from remdial.wire import image_file_name, recording_file_name

CAPTIONS = (
    "the old garden behind the house",
    "your wedding day at the lake",
    "the bakery on Elm Street",
    "Sunday walks with the dog",
    "the blue Ford you drove to work",
    "knitting by the window in winter",
)

UTTERANCES = (
    "We grew roses along the back fence.",
    "My sister and I walked there every week.",
    "I remember the smell of fresh bread.",
    "That was the summer it rained so much.",
    "He always let me ride in the front seat.",
    "Mother taught me that stitch when I was small.",
)


def make_profile(user_id="P01", n_triggers=3):
    triggers = []
    for i in range(1, n_triggers + 1):
        triggers.append(
            MemoryTrigger(
                trigger_id=f"trig-{i}",
                media_ref=f"trigger-{i}.jpg",
                caption=CAPTIONS[(i - 1) % len(CAPTIONS)],
                narrative="They talked about this one for an hour last visit." if i % 2 else None,
                domain_tags=(SixMsDomain.WHAT_MATTERS,) if i % 2 else (),
            )
        )
    return UserProfile(
        user_id=user_id,
        display_name="Pat",
        six_ms={
            "what_matters": ("family", "the garden"),
            "meaningful_activities": ("baking", "walking"),
            "mealtimes": ("tea at four",),
        },
        triggers=tuple(triggers),
        communication_notes="Speak slowly; repeat the question if there is no answer.",
    )


def make_timestamps(
    start_ms=0.0,
    *,
    speech_s=8.0,
    asr_s=1.0,
    reasoning_s=4.0,
    dispatch_s=0.5,
    playback_s=4.0,
):
    rec_end = start_ms + speech_s * 1000.0
    asr_done = rec_end + asr_s * 1000.0
    reasoning_done = asr_done + reasoning_s * 1000.0
    playback_start = reasoning_done + dispatch_s * 1000.0
    return TurnTimestamps(
        recording_start=start_ms,
        recording_end=rec_end,
        asr_done=asr_done,
        reasoning_done=reasoning_done,
        playback_start=playback_start,
        playback_end=playback_start + playback_s * 1000.0,
    )


def make_turn(
    turn_index,
    trigger_id="trig-1",
    *,
    start_ms=0.0,
    speech_s=8.0,
    asr_s=1.0,
    reasoning_s=4.0,
    dispatch_s=0.5,
    playback_s=4.0,
    transcript=None,
    response="Thank you for sharing that.",
    n_images=None,
):
    ts = make_timestamps(
        start_ms,
        speech_s=speech_s,
        asr_s=asr_s,
        reasoning_s=reasoning_s,
        dispatch_s=dispatch_s,
        playback_s=playback_s,
    )
    if n_images is None:
        n_images = int(speech_s // 2) + 1
    return TurnRecord(
        turn_index=turn_index,
        trigger_id=trigger_id,
        user_transcript=transcript if transcript is not None else UTTERANCES[(turn_index - 1) % len(UTTERANCES)],
        user_speech_duration_s=speech_s,
        robot_response=response,
        audio_refs=(recording_file_name(turn_index, 1),),
        image_refs=tuple(image_file_name(turn_index, k) for k in range(1, n_images + 1)),
        timestamps=ts,
        latency=derive_latency(ts),
    )


def make_record(
    rng: random.Random,
    user_id="P01",
    conversation_time="20250401-100000",
    setup=RobotSetup.SETUP_II,
    *,
    n_turns=3,
    completed=True,
    skip_turn=None,
):
    """A coherent multi-turn session; ``skip_turn`` leaves that index as a gap."""
    turns = []
    t_ms = 0.0
    for idx in range(1, n_turns + 1):
        if idx == skip_turn:
            t_ms += rng.uniform(5000.0, 9000.0)
            continue
        turn = make_turn(
            idx,
            trigger_id=f"trig-{1 + (idx - 1) % 3}",
            start_ms=t_ms,
            speech_s=rng.uniform(4.0, 40.0),
            asr_s=rng.uniform(0.5, 1.5),
            reasoning_s=rng.uniform(3.0, 5.0),
            dispatch_s=rng.uniform(0.2, 3.5),
            playback_s=rng.uniform(2.0, 8.0),
            transcript=rng.choice(UTTERANCES),
        )
        turns.append(turn)
        t_ms = turn.timestamps.playback_end + rng.uniform(500.0, 4000.0)
    return SessionRecord.build(user_id, conversation_time, setup, turns, completed)


def media_for_record(record, *, width=640, height=480):
    """Placeholder media bytes matching every ref a record mentions."""
    media = {}
    for turn in record.turns:
        for name in turn.audio_refs:
            media[name] = make_placeholder_wav(
                turn.user_speech_duration_s, transcript=turn.user_transcript
            )
        for name in turn.image_refs:
            media[name] = make_placeholder_jpeg(width, height)
    return media


def conversation_time_from(rng: random.Random):
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    return f"2025{month:02d}{day:02d}-{rng.randint(8, 18):02d}{rng.randint(0, 59):02d}{rng.randint(0, 59):02d}"
