"""
Measuring the edge-offload latency win
======================================

The same three-turn conversation is replayed under both setup profiles:
setup I runs every pipeline stage on the robot, setup II offloads speech
recognition and synthesis to the edge machine. Each scenario leaves its
per-turn latency traces in the session record; the report at the end
pools them per setup and computes the end-to-end reduction.
"""

from remdial.model import MemoryTrigger, RobotSetup, UserProfile
from remdial.sim import End, Scenario, SelectTrigger, Speak, latency_report, run_scenario

ACTIONS = (
    SelectTrigger("trig-1"),
    Speak("We used to take the tram to the market on Saturdays.", 11.0),
    Speak("Mother always bought flowers from the corner stall.", 8.0),
    Speak("The smell of fresh bread carried all the way home.", 9.0),
    End(),
)


def make_profile(user_id: str) -> UserProfile:
    return UserProfile(
        user_id=user_id,
        display_name=user_id,
        triggers=(MemoryTrigger("trig-1", "market.jpg", "the Saturday market downtown"),),
    )


traces = []
setups = []
for setup, user_id in (
    (RobotSetup.SETUP_I, "D01"),
    (RobotSetup.SETUP_I, "D02"),
    (RobotSetup.SETUP_II, "D03"),
    (RobotSetup.SETUP_II, "D04"),
):
    # delays are left unset, so each run uses its setup's stage profile
    scenario = Scenario(
        user_id=user_id,
        conversation_time="20250620-100000",
        robot_setup=setup,
        profile=make_profile(user_id),
        actions=ACTIONS,
    )
    result = run_scenario(scenario)
    for turn in result.record.turns:
        traces.append(turn.latency)
        setups.append(setup.value)

report = latency_report(traces, setups)
print(f"{len(traces)} turns measured ({setups.count('I')} on setup I, {setups.count('II')} on setup II)\n")
print(f"{'stage':<18}{'setup I':>10}{'setup II':>10}")
for column, label in (
    ("asr_s", "speech to text"),
    ("reasoning_s", "reasoning"),
    ("orchestration_s", "orchestration"),
    ("end_to_end_s", "end to end"),
):
    row_i = report.by_setup["I"][column]
    row_ii = report.by_setup["II"][column]
    print(f"{label:<18}{row_i.mean:>9.2f}s{row_ii.mean:>9.2f}s")

print(f"\nend-to-end reduction from offloading: {report.reduction_pct:.1f}%")
