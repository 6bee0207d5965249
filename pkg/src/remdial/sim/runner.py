"""Deterministic closed-loop execution of scenario scripts.

One virtual clock drives the whole stack: the orchestrator, its mock
backends, and a real edge client polling over the in-process transport.
The runner plays two roles the simulation cannot: the console operator
(submitting commands) and the scheduler's hand on time. Command-adjacent
edge steps are invoked synchronously at the submission instant so scripted
durations land on the recorded timestamps without polling skew; the
recurring poll keeps its own cadence throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..clock import VirtualClock
from ..edge.client import EdgeClient
from ..edge.config import EdgeConfig
from ..edge.devices import Actuators, make_placeholder_jpeg
from ..edge.transport import FaultInjectingTransport, HostTransport, InProcessTransport
from ..host.machine import SessionPhase
from ..host.service import HostConfig, HostService
from ..model import JSONDict, SessionRecord, UserProfile, canonical_dumps
from ..portal.service import PortalService
from ..store import write_session
from ..wire import Command, CommandKind
from .backends import make_mock_suite
from .scenario import End, Pause, Repeat, Scenario, SelectTrigger, Speak
from .sensors import NullSpeechPlayer, RecordingDisplay, ScriptedMicrophone, StaticCamera

_SETTLE_BOUND_S = 600.0


@dataclass
class RunResult:
    session_id: str
    record: SessionRecord
    packaged_log: JSONDict
    dataset_path: Path | None
    host: HostService
    edge: EdgeClient
    portal: PortalService | None
    display: RecordingDisplay
    player: NullSpeechPlayer


def _profile_media(profile: UserProfile) -> dict[str, bytes]:
    return {t.media_ref: make_placeholder_jpeg() for t in profile.triggers}


def _portal_roundtrip(portal_root: Path | str, scenario: Scenario):
    """Provision the profile through the portal so the host starts from a
    preloaded bundle rather than from the scenario object directly."""
    portal = PortalService(portal_root)
    account_id = f"caregiver-{scenario.user_id}"
    try:
        portal.create_account(account_id, "let-me-in", [scenario.user_id])
    except Exception:
        pass  # existing portal root; account already provisioned
    token = portal.login(account_id, "let-me-in")
    portal.upsert_profile(token, scenario.profile)
    for trigger in scenario.profile.triggers:
        portal.put_media(token, scenario.user_id, trigger.media_ref, make_placeholder_jpeg())
    bundle = portal.preload(token, scenario.user_id)
    return portal, token, bundle.profile, dict(bundle.media)


def run_scenario(
    scenario: Scenario,
    *,
    out_dir: Path | str | None = None,
    portal_root: Path | str | None = None,
    clock: VirtualClock | None = None,
    host_config: HostConfig | None = None,
    edge_config: EdgeConfig | None = None,
) -> RunResult:
    clock = clock or VirtualClock()
    portal = None
    token = None
    if portal_root is not None:
        portal, token, profile, media = _portal_roundtrip(portal_root, scenario)
    else:
        profile = scenario.profile
        media = _profile_media(scenario.profile)

    delays = scenario.resolved_delays()
    suite = make_mock_suite(
        clock,
        delays,
        chars_per_s=scenario.chars_per_s,
        fail_asr_calls=scenario.faults.fail_asr_calls,
        fail_reasoning_calls=scenario.faults.fail_reasoning_calls,
        fail_synthesis_calls=scenario.faults.fail_synthesis_calls,
    )
    host_config = host_config or HostConfig(robot_setup=scenario.robot_setup)
    host = HostService(
        profile,
        suite,
        media=media,
        clock=clock,
        config=host_config,
        conversation_time_provider=lambda: scenario.conversation_time,
    )

    transport: HostTransport = InProcessTransport(host)
    if scenario.faults.outages or scenario.faults.corrupt_first or scenario.faults.black_hole:
        transport = FaultInjectingTransport(
            transport,
            clock,
            outages=list(scenario.faults.outages),
            corrupt_once={scenario.faults.corrupt_first} if scenario.faults.corrupt_first else None,
            black_hole=set(scenario.faults.black_hole),
        )

    edge_config = edge_config or EdgeConfig()
    microphone = ScriptedMicrophone(clock, edge_config.sample_rate_hz)
    camera = StaticCamera(edge_config.frame_width, edge_config.frame_height)
    player = NullSpeechPlayer(edge_config.playback_chars_per_s)
    display = RecordingDisplay(clock)
    edge = EdgeClient(
        edge_config,
        transport,
        microphone,
        camera,
        Actuators(speech=player, display=display),
        clock=clock,
    )
    edge.start(clock)

    session_id = f"{scenario.user_id}-{scenario.conversation_time}"
    host.create_session(session_id, scenario.conversation_time)

    def settle(*phases: SessionPhase) -> None:
        deadline = clock.now() + _SETTLE_BOUND_S
        clock.run_until(lambda: host.session_phase(session_id) in phases, deadline=deadline)

    for action in scenario.actions:
        if isinstance(action, SelectTrigger):
            host.submit_command(
                Command(CommandKind.SELECT_TRIGGER, session_id, payload=action.trigger_id)
            )
            edge.step()
        elif isinstance(action, Speak):
            host.submit_command(Command(CommandKind.START_RECORDING, session_id))
            edge.step()
            microphone.feed(action.utterance)
            clock.sleep(action.duration_s)
            host.submit_command(Command(CommandKind.STOP_RECORDING, session_id))
            edge.step()
            settle(SessionPhase.AWAITING_NEXT, SessionPhase.TRIGGER_SELECTED)
            # a failed pipeline leaves an apology queued for the robot; let
            # the executor act on it before the script talks over it
            edge.step()
        elif isinstance(action, Repeat):
            host.submit_command(Command(CommandKind.PLAY_RESPONSE, session_id))
            settle(SessionPhase.AWAITING_NEXT)
            edge.step()
        elif isinstance(action, Pause):
            clock.sleep(action.duration_s)
        elif isinstance(action, End):
            host.submit_command(Command(CommandKind.HOME, session_id))
            edge.step()
            clock.sleep(edge_config.poll_interval_s * 3)
        else:  # pragma: no cover - the scenario parser forbids this
            raise TypeError(f"unknown action: {action!r}")

    record = host.session_record(session_id)
    packaged = host.packaged_log(session_id)
    if portal is not None and token is not None:
        portal.ingest_session_summary(token, packaged)

    dataset_path = None
    if out_dir is not None:
        dataset_path = write_session(
            out_dir,
            record,
            media=host.session_media(session_id),
            events=[e.to_json_dict() for e in host.session_events(session_id)],
        )
    return RunResult(
        session_id=session_id,
        record=record,
        packaged_log=packaged,
        dataset_path=dataset_path,
        host=host,
        edge=edge,
        portal=portal,
        display=display,
        player=player,
    )


def run_scenario_wall(
    scenario: Scenario,
    *,
    out_dir: Path | str | None = None,
    portal_root: Path | str | None = None,
    settle_timeout_s: float = 120.0,
) -> RunResult:
    """Run one scenario against real time; backend delays become real sleeps.

    The edge client runs in its own thread exactly as deployed. Because the
    in-process transport executes the host pipeline inside the edge's
    audio-ready call, polling pauses for that stretch in this mode; the
    virtual-clock runner is the reference for timing-sensitive checks.
    """
    import threading
    import time as _time

    from ..clock import WallClock

    clock = WallClock()
    if portal_root is not None:
        portal, token, profile, media = _portal_roundtrip(portal_root, scenario)
    else:
        portal, token = None, None
        profile = scenario.profile
        media = _profile_media(scenario.profile)
    suite = make_mock_suite(clock, scenario.resolved_delays(), chars_per_s=scenario.chars_per_s)
    host = HostService(
        profile,
        suite,
        media=media,
        clock=clock,
        config=HostConfig(robot_setup=scenario.robot_setup),
        conversation_time_provider=lambda: scenario.conversation_time,
    )
    edge_config = EdgeConfig()
    microphone = ScriptedMicrophone(clock, edge_config.sample_rate_hz)
    camera = StaticCamera(edge_config.frame_width, edge_config.frame_height)
    player = NullSpeechPlayer(edge_config.playback_chars_per_s)
    display = RecordingDisplay(clock)
    edge = EdgeClient(
        edge_config,
        InProcessTransport(host),
        microphone,
        camera,
        Actuators(speech=player, display=display),
        clock=clock,
    )
    session_id = f"{scenario.user_id}-{scenario.conversation_time}"
    host.create_session(session_id, scenario.conversation_time)
    worker = threading.Thread(target=edge.run, name="edge-loop", daemon=True)
    worker.start()

    def settle(*phases: SessionPhase) -> None:
        deadline = _time.monotonic() + settle_timeout_s
        while host.session_phase(session_id) not in phases:
            if _time.monotonic() > deadline:
                raise TimeoutError(f"session did not settle into {phases}")
            _time.sleep(edge_config.poll_interval_s)

    try:
        for action in scenario.actions:
            if isinstance(action, SelectTrigger):
                host.submit_command(
                    Command(CommandKind.SELECT_TRIGGER, session_id, payload=action.trigger_id)
                )
            elif isinstance(action, Speak):
                host.submit_command(Command(CommandKind.START_RECORDING, session_id))
                microphone.feed(action.utterance)
                _time.sleep(action.duration_s)
                host.submit_command(Command(CommandKind.STOP_RECORDING, session_id))
                settle(SessionPhase.AWAITING_NEXT)
            elif isinstance(action, Repeat):
                host.submit_command(Command(CommandKind.PLAY_RESPONSE, session_id))
                settle(SessionPhase.AWAITING_NEXT)
            elif isinstance(action, Pause):
                _time.sleep(action.duration_s)
            elif isinstance(action, End):
                host.submit_command(Command(CommandKind.HOME, session_id))
    finally:
        worker.join(timeout=settle_timeout_s)
        edge.shutdown()

    record = host.session_record(session_id)
    packaged = host.packaged_log(session_id)
    if portal is not None and token is not None:
        portal.ingest_session_summary(token, packaged)
    dataset_path = None
    if out_dir is not None:
        dataset_path = write_session(
            out_dir,
            record,
            media=host.session_media(session_id),
            events=[e.to_json_dict() for e in host.session_events(session_id)],
        )
    return RunResult(
        session_id, record, packaged, dataset_path, host, edge, portal, display, player
    )


def generate_corpus(
    scenarios: list[Scenario], out_root: Path | str, *, portal_root: Path | str | None = None
) -> list[Path]:
    """Run every scenario into one dataset directory; writes setup_map.json."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    paths = []
    setup_map: dict[str, str] = {}
    for scenario in scenarios:
        result = run_scenario(scenario, out_dir=out_root, portal_root=portal_root)
        assert result.dataset_path is not None
        paths.append(result.dataset_path)
        setup_map[scenario.user_id] = scenario.robot_setup.value
    (out_root / "setup_map.json").write_text(
        canonical_dumps(setup_map, indent=2) + "\n", encoding="utf-8"
    )
    return paths


def load_setup_map(path: Path | str) -> dict[str, str]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in raw.items()
    ):
        raise ValueError(f"{path}: setup map must be a string-to-string object")
    return raw
