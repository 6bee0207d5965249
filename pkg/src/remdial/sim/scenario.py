"""Declarative session scripts for the deterministic runner.

A scenario file fixes everything that varies between runs: who the user is,
which setup profile drives the delays, the exact sequence of console and
user actions, and any injected faults. Two runs of the same scenario
produce identical session records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from ..model import JSONDict, RobotSetup, SchemaError, UserProfile, _check_fields
from .backends import DelayModel

SCENARIO_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SelectTrigger:
    trigger_id: str

    def to_json_dict(self) -> JSONDict:
        return {"action": "select-trigger", "trigger_id": self.trigger_id}


@dataclass(frozen=True)
class Speak:
    """User speaks one turn: the utterance text and how long it takes."""

    utterance: str
    duration_s: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise SchemaError(f"speak duration must be positive, got {self.duration_s}")

    def to_json_dict(self) -> JSONDict:
        return {"action": "speak", "utterance": self.utterance, "duration_s": self.duration_s}


@dataclass(frozen=True)
class Repeat:
    def to_json_dict(self) -> JSONDict:
        return {"action": "repeat"}


@dataclass(frozen=True)
class Pause:
    duration_s: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise SchemaError(f"pause duration must be positive, got {self.duration_s}")

    def to_json_dict(self) -> JSONDict:
        return {"action": "pause", "duration_s": self.duration_s}


@dataclass(frozen=True)
class End:
    def to_json_dict(self) -> JSONDict:
        return {"action": "end"}


Action = Union[SelectTrigger, Speak, Repeat, Pause, End]


def _action_from_json(d: JSONDict) -> Action:
    if not isinstance(d, dict) or "action" not in d:
        raise SchemaError(f"action entry must be an object with an 'action' tag: {d!r}")
    tag = d["action"]
    if tag == "select-trigger":
        data = _check_fields(d, "select-trigger", ("action", "trigger_id"))
        return SelectTrigger(str(data["trigger_id"]))
    if tag == "speak":
        data = _check_fields(d, "speak", ("action", "utterance", "duration_s"))
        return Speak(str(data["utterance"]), float(data["duration_s"]))
    if tag == "repeat":
        _check_fields(d, "repeat", ("action",))
        return Repeat()
    if tag == "pause":
        data = _check_fields(d, "pause", ("action", "duration_s"))
        return Pause(float(data["duration_s"]))
    if tag == "end":
        _check_fields(d, "end", ("action",))
        return End()
    raise SchemaError(f"unknown action tag: {tag!r}")


@dataclass(frozen=True)
class FaultSpec:
    """Injected failures: transport windows, corruption, and backend faults."""

    outages: tuple[tuple[float, float], ...] = ()
    corrupt_first: str | None = None
    black_hole: tuple[str, ...] = ()
    fail_asr_calls: frozenset[int] = frozenset()
    fail_reasoning_calls: frozenset[int] = frozenset()
    fail_synthesis_calls: frozenset[int] = frozenset()

    def any(self) -> bool:
        return bool(
            self.outages
            or self.corrupt_first
            or self.black_hole
            or self.fail_asr_calls
            or self.fail_reasoning_calls
            or self.fail_synthesis_calls
        )

    def to_json_dict(self) -> JSONDict:
        return {
            "outages": [list(w) for w in self.outages],
            "corrupt_first": self.corrupt_first,
            "black_hole": list(self.black_hole),
            "fail_asr_calls": sorted(self.fail_asr_calls),
            "fail_reasoning_calls": sorted(self.fail_reasoning_calls),
            "fail_synthesis_calls": sorted(self.fail_synthesis_calls),
        }

    @classmethod
    def from_json_dict(cls, d: JSONDict) -> "FaultSpec":
        data = _check_fields(
            d,
            "FaultSpec",
            (),
            (
                "outages",
                "corrupt_first",
                "black_hole",
                "fail_asr_calls",
                "fail_reasoning_calls",
                "fail_synthesis_calls",
            ),
        )
        outages = []
        for window in data.get("outages", []):
            if not isinstance(window, (list, tuple)) or len(window) != 2:
                raise SchemaError(f"outage window must be [start, end]: {window!r}")
            outages.append((float(window[0]), float(window[1])))
        return cls(
            outages=tuple(outages),
            corrupt_first=data.get("corrupt_first"),
            black_hole=tuple(data.get("black_hole", [])),
            fail_asr_calls=frozenset(int(i) for i in data.get("fail_asr_calls", [])),
            fail_reasoning_calls=frozenset(int(i) for i in data.get("fail_reasoning_calls", [])),
            fail_synthesis_calls=frozenset(int(i) for i in data.get("fail_synthesis_calls", [])),
        )


@dataclass(frozen=True)
class Scenario:
    user_id: str
    conversation_time: str
    robot_setup: RobotSetup
    profile: UserProfile
    actions: tuple[Action, ...]
    delays: DelayModel | None = None
    faults: FaultSpec = field(default_factory=FaultSpec)
    chars_per_s: float = 20.0

    def resolved_delays(self) -> DelayModel:
        if self.delays is not None:
            return self.delays
        if self.robot_setup is RobotSetup.SETUP_I:
            return DelayModel.robot_native()
        return DelayModel.edge_offload()

    def to_json_dict(self) -> JSONDict:
        payload: JSONDict = {
            "schema_version": SCENARIO_SCHEMA_VERSION,
            "user_id": self.user_id,
            "conversation_time": self.conversation_time,
            "robot_setup": self.robot_setup.value,
            "profile": self.profile.to_json_dict(),
            "actions": [a.to_json_dict() for a in self.actions],
            "chars_per_s": self.chars_per_s,
        }
        if self.delays is not None:
            payload["delays"] = {
                "asr_s": self.delays.asr_s,
                "reasoning_s": self.delays.reasoning_s,
                "dispatch_s": self.delays.dispatch_s,
            }
            if self.delays.jitter_s > 0:
                payload["delays"]["jitter_s"] = self.delays.jitter_s
                payload["delays"]["seed"] = self.delays.seed
        if self.faults.any():
            payload["faults"] = self.faults.to_json_dict()
        return payload

    @classmethod
    def from_json_dict(cls, d: JSONDict) -> "Scenario":
        data = _check_fields(
            d,
            "Scenario",
            ("schema_version", "user_id", "conversation_time", "robot_setup", "profile", "actions"),
            ("delays", "faults", "chars_per_s"),
        )
        if data["schema_version"] != SCENARIO_SCHEMA_VERSION:
            raise SchemaError(f"unsupported scenario schema_version: {data['schema_version']!r}")
        actions_raw = data["actions"]
        if not isinstance(actions_raw, list) or not actions_raw:
            raise SchemaError("Scenario.actions: expected non-empty list")
        delays = None
        if "delays" in data:
            delay_data = _check_fields(
                data["delays"],
                "Scenario.delays",
                ("asr_s", "reasoning_s", "dispatch_s"),
                ("jitter_s", "seed"),
            )
            delays = DelayModel(
                float(delay_data["asr_s"]),
                float(delay_data["reasoning_s"]),
                float(delay_data["dispatch_s"]),
                jitter_s=float(delay_data.get("jitter_s", 0.0)),
                seed=int(delay_data.get("seed", 0)),
            )
        try:
            setup = RobotSetup(data["robot_setup"])
        except ValueError as exc:
            raise SchemaError(f"Scenario.robot_setup: {exc}") from exc
        return cls(
            user_id=str(data["user_id"]),
            conversation_time=str(data["conversation_time"]),
            robot_setup=setup,
            profile=UserProfile.from_json_dict(data["profile"]),
            actions=tuple(_action_from_json(a) for a in actions_raw),
            delays=delays,
            faults=FaultSpec.from_json_dict(data.get("faults", {})),
            chars_per_s=float(data.get("chars_per_s", 20.0)),
        )


def load_scenario(path: Path | str) -> Scenario:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return Scenario.from_json_dict(payload)
