"""On-disk session datasets.

Each session gets one folder named ``{user_id}_{conversation_time}`` holding

* ``data.json``: the full session record, host event trace, and optional
  per-frame annotations
* ``processed_data.json``: a small derived summary for quick scans
* ``images/``: captured frames named ``image_{turn}_{seq}.jpg``
* ``recordings/``: turn audio named ``recording_{turn}_{seq}.wav``

Writing the same session key twice appends a ``-v2``, ``-v3``, ... suffix
instead of clobbering. All JSON is written canonically so a load/write
cycle reproduces the original bytes.
"""

from __future__ import annotations

import json
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .model import JSONDict, SchemaError, SessionRecord, canonical_dumps, quantize
from .wire import IMAGE_NAME_RE, RECORDING_NAME_RE

SESSION_DIR_RE = re.compile(r"^(?P<user>[A-Za-z0-9][A-Za-z0-9-]*)_(?P<time>\d{8}-\d{6})(-v(?P<v>\d+))?$")

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StoredSession:
    root: Path
    record: SessionRecord
    events: tuple[JSONDict, ...] = ()
    frame_annotations: Mapping[str, JSONDict] = field(default_factory=dict)
    semantic_annotations: Mapping[int, JSONDict] = field(default_factory=dict)
    media: Mapping[str, bytes] = field(default_factory=dict)


@dataclass(frozen=True)
class CorpusDiagnostic:
    folder: str
    problem: str


def session_folder_name(user_id: str, conversation_time: str, version: int = 1) -> str:
    base = f"{user_id}_{conversation_time}"
    return base if version == 1 else f"{base}-v{version}"


def _media_subdir(name: str) -> str:
    if IMAGE_NAME_RE.match(name):
        return "images"
    if RECORDING_NAME_RE.match(name):
        return "recordings"
    raise SchemaError(f"unrecognized media file name: {name!r}")


def _validate_frame_annotations(annotations: Mapping[str, JSONDict]) -> dict[str, JSONDict]:
    out: dict[str, JSONDict] = {}
    for name in sorted(annotations):
        entry = annotations[name]
        if not IMAGE_NAME_RE.match(name):
            raise SchemaError(f"frame annotation key is not an image name: {name!r}")
        if not isinstance(entry, Mapping) or set(entry) != {"attention_robot", "valence"}:
            raise SchemaError(f"frame annotation for {name!r}: expected attention_robot and valence")
        if not isinstance(entry["attention_robot"], bool):
            raise SchemaError(f"frame annotation for {name!r}: attention_robot must be boolean")
        if entry["valence"] not in (-1, 0, 1):
            raise SchemaError(f"frame annotation for {name!r}: valence must be -1, 0, or 1")
        out[name] = {"attention_robot": entry["attention_robot"], "valence": entry["valence"]}
    return out


def _validate_semantic_annotations(
    annotations: Mapping[int, JSONDict] | Mapping[str, JSONDict], turn_indexes: frozenset[int]
) -> dict[int, JSONDict]:
    out: dict[int, JSONDict] = {}
    for key in annotations:
        try:
            turn = int(key)
        except (TypeError, ValueError):
            raise SchemaError(f"semantic annotation key is not a turn index: {key!r}")
        entry = annotations[key]
        if turn not in turn_indexes:
            raise SchemaError(f"semantic annotation for unknown turn {turn}")
        if not isinstance(entry, Mapping):
            raise SchemaError(f"semantic annotation for turn {turn}: expected object")
        out[turn] = dict(entry)
    return out


def build_summary(record: SessionRecord, media_names: Mapping[str, bytes] | None = None) -> JSONDict:
    """Derive the processed_data.json payload from a session record."""
    latencies = [t.latency.end_to_end_s for t in record.turns]
    duration_s = 0.0
    if record.turns:
        first = record.turns[0].timestamps.recording_start
        last = record.turns[-1].timestamps.playback_end
        duration_s = quantize((last - first) / 1000.0)
    media_names = media_names or {}
    return {
        "schema_version": SCHEMA_VERSION,
        "user_id": record.user_id,
        "conversation_time": record.conversation_time,
        "robot_setup": record.robot_setup.value,
        "completed_without_intervention": record.completed_without_intervention,
        "turn_count": len(record.turns),
        "duration_s": duration_s,
        "mean_end_to_end_latency_s": quantize(statistics.fmean(latencies)) if latencies else 0.0,
        "triggers_used": list(record.triggers_used),
        "image_count": sum(1 for n in media_names if IMAGE_NAME_RE.match(n)),
        "recording_count": sum(1 for n in media_names if RECORDING_NAME_RE.match(n)),
    }


def write_session(
    root: Path | str,
    record: SessionRecord,
    *,
    media: Mapping[str, bytes] | None = None,
    events: tuple[JSONDict, ...] | list[JSONDict] = (),
    frame_annotations: Mapping[str, JSONDict] | None = None,
    semantic_annotations: Mapping[int, JSONDict] | None = None,
) -> Path:
    """Write one session folder under ``root``; returns the created path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    media = dict(media or {})
    annotations = _validate_frame_annotations(frame_annotations or {})
    semantic = _validate_semantic_annotations(
        semantic_annotations or {}, frozenset(t.turn_index for t in record.turns)
    )
    for name in media:
        _media_subdir(name)  # reject stray names before creating anything
    version = 1
    while (root / session_folder_name(record.user_id, record.conversation_time, version)).exists():
        version += 1
    folder = root / session_folder_name(record.user_id, record.conversation_time, version)
    folder.mkdir()
    (folder / "images").mkdir()
    (folder / "recordings").mkdir()
    payload: JSONDict = {
        "schema_version": SCHEMA_VERSION,
        "session": record.to_json_dict(),
        "events": [dict(e) for e in events],
    }
    if annotations:
        payload["frame_annotations"] = annotations
    if semantic:
        payload["semantic_annotations"] = {str(k): v for k, v in sorted(semantic.items())}
    (folder / "data.json").write_text(canonical_dumps(payload, indent=2) + "\n", encoding="utf-8")
    summary = build_summary(record, media)
    (folder / "processed_data.json").write_text(
        canonical_dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    for name in sorted(media):
        (folder / _media_subdir(name) / name).write_bytes(media[name])
    return folder


def load_session(folder: Path | str) -> StoredSession:
    """Load one session folder; raises SchemaError with file context on damage."""
    folder = Path(folder)
    if not SESSION_DIR_RE.match(folder.name):
        raise SchemaError(f"{folder.name}: folder name does not match user_time layout")
    data_path = folder / "data.json"
    if not data_path.exists():
        raise SchemaError(f"{folder.name}: missing data.json")
    try:
        payload = json.loads(data_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{folder.name}/data.json: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{folder.name}/data.json: unsupported schema_version")
    try:
        record = SessionRecord.from_json_dict(payload["session"])
    except KeyError as exc:
        raise SchemaError(f"{folder.name}/data.json: missing session object") from exc
    except SchemaError as exc:
        raise SchemaError(f"{folder.name}/data.json: {exc}") from exc
    events = payload.get("events", [])
    if not isinstance(events, list) or not all(isinstance(e, dict) for e in events):
        raise SchemaError(f"{folder.name}/data.json: events must be a list of objects")
    annotations = _validate_frame_annotations(payload.get("frame_annotations", {}))
    try:
        semantic = _validate_semantic_annotations(
            payload.get("semantic_annotations", {}),
            frozenset(t.turn_index for t in record.turns),
        )
    except SchemaError as exc:
        raise SchemaError(f"{folder.name}/data.json: {exc}") from exc
    media: dict[str, bytes] = {}
    for sub, pattern in (("images", IMAGE_NAME_RE), ("recordings", RECORDING_NAME_RE)):
        subdir = folder / sub
        if not subdir.is_dir():
            raise SchemaError(f"{folder.name}: missing {sub}/ directory")
        for path in sorted(subdir.iterdir()):
            if not pattern.match(path.name):
                raise SchemaError(f"{folder.name}/{sub}: unexpected file {path.name!r}")
            media[path.name] = path.read_bytes()
    expected_key = f"{record.user_id}_{record.conversation_time}"
    if not folder.name.startswith(expected_key):
        raise SchemaError(
            f"{folder.name}: folder name disagrees with record key {expected_key!r}"
        )
    return StoredSession(folder, record, tuple(events), annotations, semantic, media)


def scan_corpus(root: Path | str) -> tuple[list[StoredSession], list[CorpusDiagnostic]]:
    """Load every session folder under ``root``, collecting per-folder problems."""
    root = Path(root)
    sessions: list[StoredSession] = []
    diagnostics: list[CorpusDiagnostic] = []
    if not root.is_dir():
        return [], [CorpusDiagnostic(str(root), "dataset root does not exist")]
    for folder in sorted(p for p in root.iterdir() if p.is_dir()):
        if not SESSION_DIR_RE.match(folder.name):
            diagnostics.append(CorpusDiagnostic(folder.name, "name does not match layout"))
            continue
        try:
            sessions.append(load_session(folder))
        except SchemaError as exc:
            diagnostics.append(CorpusDiagnostic(folder.name, str(exc)))
    return sessions, diagnostics


def load_corpus(root: Path | str) -> list[StoredSession]:
    """Strict corpus load: any malformed folder raises immediately."""
    sessions, diagnostics = scan_corpus(root)
    if diagnostics:
        first = diagnostics[0]
        raise SchemaError(f"{first.folder}: {first.problem}")
    return sessions
