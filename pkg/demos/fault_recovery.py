"""
Staying conversational when the network and the backends misbehave
==================================================================

This run injects two faults into an otherwise ordinary session: the
link between robot and host drops for four seconds mid-conversation,
and the second speech-recognition call fails outright. The transcript
below shows what the user experiences: polling rides out the outage,
the failed turn gets a spoken apology instead of silence, and the
session carries on to a clean finish. The record keeps the evidence,
including the flag that this session did not complete unassisted.
"""

import tempfile
from pathlib import Path

from remdial.host.machine import APOLOGY_TEXT
from remdial.model import MemoryTrigger, RobotSetup, UserProfile
from remdial.sim import End, FaultSpec, Scenario, SelectTrigger, Speak, run_scenario

profile = UserProfile(
    user_id="P13",
    display_name="Sam",
    triggers=(MemoryTrigger("trig-1", "workshop.jpg", "your carpentry workshop"),),
)

scenario = Scenario(
    user_id="P13",
    conversation_time="20250722-110000",
    robot_setup=RobotSetup.SETUP_II,
    profile=profile,
    actions=(
        SelectTrigger("trig-1"),
        Speak("I built our kitchen table in that workshop.", 7.0),
        Speak("The lathe was my favorite tool of all.", 6.0),  # ASR fails here
        Speak("I remember the smell of fresh sawdust in the mornings.", 8.0),
        End(),
    ),
    faults=FaultSpec(
        outages=((2.0, 6.0),),
        fail_asr_calls=frozenset({2}),
    ),
)

result = run_scenario(scenario, out_dir=Path(tempfile.mkdtemp(prefix="remdial-faults-")))

outage_polls = [e for e in result.edge.events if e.name == "poll_failed"]
print(f"polls failed during the outage: {len(outage_polls)}")
print(f"  first at t={outage_polls[0].t:.2f}s, last at t={outage_polls[-1].t:.2f}s")
print(f"  loop recovered and executed {len([e for e in result.edge.events if e.name == 'command_executed'])} commands anyway")

apologies = [p for p in result.player.played if p.text == APOLOGY_TEXT]
print(f"\napologies spoken for the failed recognition: {len(apologies)}")
print(f"  {APOLOGY_TEXT!r}")

record = result.record
print(f"\nturns that made it into the record: {len(record.turns)} of 3 attempts")
for turn in record.turns:
    print(f"  turn {turn.turn_index}: {turn.user_transcript!r}")
print(f"completed without intervention: {record.completed_without_intervention}")
print(f"dataset: {result.dataset_path}")
