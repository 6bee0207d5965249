"""Scenario scripts and the closed-loop deterministic runner."""

import pytest

from helpers import make_profile
from remdial.model import RobotSetup, SchemaError, canonical_dumps
from remdial.sim import (
    DelayModel,
    End,
    FaultSpec,
    Pause,
    Repeat,
    Scenario,
    SelectTrigger,
    Speak,
    generate_corpus,
    latency_report,
    load_scenario,
    load_setup_map,
    run_scenario,
    run_scenario_wall,
)
from remdial.store import load_session, scan_corpus


def make_scenario(
    *,
    user_id="P12",
    setup=RobotSetup.SETUP_II,
    actions=None,
    delays=None,
    faults=FaultSpec(),
    conversation_time="20250510-140000",
):
    return Scenario(
        user_id=user_id,
        conversation_time=conversation_time,
        robot_setup=setup,
        profile=make_profile(user_id=user_id),
        actions=tuple(
            actions
            or [
                SelectTrigger("trig-1"),
                Speak("I remember the roses we grew out back.", 8.0),
                Speak("We would sit there all afternoon.", 6.0),
                End(),
            ]
        ),
        delays=delays,
        faults=faults,
    )


class TestScenarioCodec:
    def test_round_trip(self):
        scenario = make_scenario(
            delays=DelayModel(0.5, 1.0, 0.2, jitter_s=0.1, seed=9),
            faults=FaultSpec(outages=((1.0, 2.0),), fail_asr_calls=frozenset({2})),
        )
        again = Scenario.from_json_dict(scenario.to_json_dict())
        assert again == scenario

    def test_round_trip_without_optionals(self):
        scenario = make_scenario()
        payload = scenario.to_json_dict()
        assert "delays" not in payload
        assert "faults" not in payload
        assert Scenario.from_json_dict(payload) == scenario

    def test_unknown_action_rejected(self):
        payload = make_scenario().to_json_dict()
        payload["actions"][0] = {"action": "dance"}
        with pytest.raises(SchemaError, match="unknown action"):
            Scenario.from_json_dict(payload)

    def test_empty_actions_rejected(self):
        payload = make_scenario().to_json_dict()
        payload["actions"] = []
        with pytest.raises(SchemaError, match="non-empty"):
            Scenario.from_json_dict(payload)

    def test_unsupported_schema_version(self):
        payload = make_scenario().to_json_dict()
        payload["schema_version"] = 2
        with pytest.raises(SchemaError, match="schema_version"):
            Scenario.from_json_dict(payload)

    def test_negative_speak_duration_rejected(self):
        with pytest.raises(SchemaError, match="positive"):
            Speak("hello", -1.0)

    def test_load_from_file(self, tmp_path):
        scenario = make_scenario()
        path = tmp_path / "p12.json"
        path.write_text(canonical_dumps(scenario.to_json_dict(), indent=2))
        assert load_scenario(path) == scenario

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_scenario(path)


def test_resolved_delays_follow_setup():
    native = make_scenario(setup=RobotSetup.SETUP_I).resolved_delays()
    assert (native.asr_s, native.reasoning_s, native.dispatch_s) == (1.18, 4.63, 3.44)
    offload = make_scenario(setup=RobotSetup.SETUP_II).resolved_delays()
    assert (offload.asr_s, offload.reasoning_s, offload.dispatch_s) == (0.97, 4.48, 0.44)
    explicit = make_scenario(delays=DelayModel(1, 1, 1)).resolved_delays()
    assert explicit.total_s == 3.0


def test_offloaded_profile_reproduces_component_latencies():
    result = run_scenario(make_scenario(setup=RobotSetup.SETUP_II))
    assert len(result.record.turns) == 2
    for turn in result.record.turns:
        assert turn.latency.asr_s == 0.97
        assert turn.latency.reasoning_s == 4.48
        assert turn.latency.orchestration_s == 0.44
        assert turn.latency.end_to_end_s == 5.89
    assert result.record.completed_without_intervention


def test_native_profile_reproduces_component_latencies():
    result = run_scenario(make_scenario(setup=RobotSetup.SETUP_I))
    for turn in result.record.turns:
        assert turn.latency.end_to_end_s == 9.25
        assert turn.latency.orchestration_s == 3.44


def test_two_runs_are_byte_identical(tmp_path):
    scenario = make_scenario()
    a = run_scenario(scenario, out_dir=tmp_path / "a")
    b = run_scenario(scenario, out_dir=tmp_path / "b")
    assert canonical_dumps(a.record.to_json_dict()) == canonical_dumps(b.record.to_json_dict())
    assert canonical_dumps(a.packaged_log) == canonical_dumps(b.packaged_log)
    files_a = {p.name: p.read_bytes() for p in sorted(a.dataset_path.rglob("*")) if p.is_file()}
    files_b = {p.name: p.read_bytes() for p in sorted(b.dataset_path.rglob("*")) if p.is_file()}
    assert files_a == files_b


def test_dataset_written_and_loadable(tmp_path):
    result = run_scenario(make_scenario(), out_dir=tmp_path)
    assert result.dataset_path is not None
    stored = load_session(result.dataset_path)
    assert stored.record == result.record
    assert any(name.endswith(".wav") for name in stored.media)
    assert any(name.endswith(".jpg") for name in stored.media)


def test_repeat_action_replays_response_slower():
    scenario = make_scenario(
        actions=[
            SelectTrigger("trig-1"),
            Speak("I remember the roses.", 6.0),
            Repeat(),
            End(),
        ]
    )
    result = run_scenario(scenario)
    assert len(result.record.turns) == 1
    speeds = [p.speed_factor for p in result.player.played]
    assert speeds[0] == 1.0
    assert speeds[-1] == pytest.approx(0.85)
    assert result.player.played[-1].text == result.player.played[0].text


def test_session_with_no_turns_still_produces_dataset(tmp_path):
    scenario = make_scenario(actions=[SelectTrigger("trig-1"), Pause(2.0), End()])
    result = run_scenario(scenario, out_dir=tmp_path)
    assert result.record.turns == ()
    assert result.record.completed_without_intervention
    stored = load_session(result.dataset_path)
    assert stored.record.turns == ()


def test_portal_roundtrip_ingests_summary(tmp_path):
    result = run_scenario(make_scenario(), portal_root=tmp_path / "portal")
    assert result.portal is not None
    token = result.portal.login("caregiver-P12", "let-me-in")
    assert result.portal.summaries(token, "P12") == ["20250510-140000"]
    summary = result.portal.get_summary(token, "P12", "20250510-140000")
    assert len(summary["turns"]) == 2
    assert summary["user_id"] == "P12"


def test_generate_corpus_writes_setup_map(tmp_path):
    scenarios = [
        make_scenario(user_id="P06", setup=RobotSetup.SETUP_I, conversation_time="20250501-090000"),
        make_scenario(user_id="P12", setup=RobotSetup.SETUP_II, conversation_time="20250502-090000"),
    ]
    paths = generate_corpus(scenarios, tmp_path / "corpus")
    assert len(paths) == 2
    setup_map = load_setup_map(tmp_path / "corpus" / "setup_map.json")
    assert setup_map == {"P06": "I", "P12": "II"}
    sessions, diagnostics = scan_corpus(tmp_path / "corpus")
    assert len(sessions) == 2
    assert diagnostics == []


def test_load_setup_map_rejects_non_string_values(tmp_path):
    path = tmp_path / "setup_map.json"
    path.write_text('{"P06": 1}')
    with pytest.raises(ValueError, match="string-to-string"):
        load_setup_map(path)


def test_latency_report_over_scenario_traces():
    native = run_scenario(make_scenario(user_id="P06", setup=RobotSetup.SETUP_I))
    offload = run_scenario(make_scenario(user_id="P12", setup=RobotSetup.SETUP_II))
    traces, setups = [], []
    for result, label in ((native, "I"), (offload, "II")):
        for turn in result.record.turns:
            traces.append(turn.latency)
            setups.append(label)
    report = latency_report(traces, setups)
    assert report.by_setup["I"]["end_to_end_s"].mean == 9.25
    assert report.by_setup["II"]["end_to_end_s"].mean == 5.89
    assert report.reduction_pct == pytest.approx(36.324324, abs=1e-5)


def test_jittered_delays_stay_near_published_reduction():
    traces, setups = [], []
    for label, setup, base in (
        ("I", RobotSetup.SETUP_I, DelayModel.robot_native()),
        ("II", RobotSetup.SETUP_II, DelayModel.edge_offload()),
    ):
        jittered = DelayModel(
            base.asr_s, base.reasoning_s, base.dispatch_s, jitter_s=0.1, seed=2024
        )
        result = run_scenario(make_scenario(setup=setup, delays=jittered))
        for turn in result.record.turns:
            traces.append(turn.latency)
            setups.append(label)
    report = latency_report(traces, setups)
    assert report.reduction_pct == pytest.approx(36.3, abs=2.0)


def test_jittered_runs_are_reproducible_per_seed():
    delays = DelayModel(0.97, 4.48, 0.44, jitter_s=0.1, seed=7)
    a = run_scenario(make_scenario(delays=delays))
    b = run_scenario(make_scenario(delays=delays))
    assert canonical_dumps(a.record.to_json_dict()) == canonical_dumps(b.record.to_json_dict())
    other = run_scenario(make_scenario(delays=DelayModel(0.97, 4.48, 0.44, jitter_s=0.1, seed=8)))
    assert canonical_dumps(other.record.to_json_dict()) != canonical_dumps(a.record.to_json_dict())


def test_wall_clock_smoke_run(tmp_path):
    scenario = make_scenario(
        actions=[SelectTrigger("trig-1"), Speak("I remember this.", 0.3), End()],
        delays=DelayModel(0.02, 0.02, 0.02),
    )
    result = run_scenario_wall(scenario, out_dir=tmp_path)
    assert len(result.record.turns) == 1
    assert result.record.turns[0].user_transcript == "I remember this."
    assert result.dataset_path is not None
