import random
from types import SimpleNamespace

import pytest

from helpers import make_profile
from remdial.clock import VirtualClock
from remdial.edge.client import EdgeClient
from remdial.edge.config import EdgeConfig
from remdial.edge.devices import Actuators, make_placeholder_jpeg
from remdial.edge.transport import InProcessTransport
from remdial.host.service import HostConfig, HostService
from remdial.sim.backends import DelayModel, make_mock_suite
from remdial.sim.sensors import (
    NullSpeechPlayer,
    RecordingDisplay,
    ScriptedMicrophone,
    StaticCamera,
)

# Results of the acceptance tests are echoed as one line per criterion at the
# end of the run, independent of output capture settings.
_ACCEPTANCE_OUTCOMES = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE_OUTCOMES):
        outcome = _ACCEPTANCE_OUTCOMES[nodeid]
        name = nodeid.split("::")[-1].removeprefix("test_").replace("_", " ")
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture
def profile():
    return make_profile()


@pytest.fixture
def profile_media(profile):
    return {t.media_ref: make_placeholder_jpeg(64, 64) for t in profile.triggers}


@pytest.fixture
def stack(profile, profile_media):
    """Factory for a complete in-process host+edge pair on one virtual clock."""

    def build(
        *,
        delays=None,
        host_config=None,
        edge_config=None,
        hooks=None,
        wrap_transport=None,
        fail_asr_calls=frozenset(),
        fail_reasoning_calls=frozenset(),
        fail_synthesis_calls=frozenset(),
    ):
        clock = VirtualClock()
        suite = make_mock_suite(
            clock,
            delays or DelayModel(0.2, 0.3, 0.1),
            fail_asr_calls=fail_asr_calls,
            fail_reasoning_calls=fail_reasoning_calls,
            fail_synthesis_calls=fail_synthesis_calls,
        )
        host = HostService(
            profile,
            suite,
            media=profile_media,
            clock=clock,
            config=host_config or HostConfig(),
        )
        transport = InProcessTransport(host)
        if wrap_transport is not None:
            transport = wrap_transport(transport, clock)
        mic = ScriptedMicrophone(clock)
        camera = StaticCamera()
        player = NullSpeechPlayer()
        display = RecordingDisplay(clock)
        edge = EdgeClient(
            edge_config or EdgeConfig(),
            transport,
            mic,
            camera,
            Actuators(player, display),
            clock=clock,
            hooks=hooks,
        )
        return SimpleNamespace(
            clock=clock,
            host=host,
            edge=edge,
            mic=mic,
            camera=camera,
            player=player,
            display=display,
            transport=transport,
            suite=suite,
        )

    return build
