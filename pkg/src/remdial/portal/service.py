"""Caregiver portal: accounts, profile versions, trigger media, summaries.

Everything is file backed under one root directory so a portal can be
inspected and re-opened between runs. Login tokens are ephemeral and live
only as long as the service object.

The summary ingest path enforces a hard privacy boundary: session summaries
must be metadata only, and any payload that appears to smuggle capture
media (raw bytes, base64 or data-URI encoded images or audio, byte arrays)
is rejected before anything touches disk.
"""

from __future__ import annotations

import base64
import binascii
import json
import re
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..model import (
    JSONDict,
    SchemaError,
    UserProfile,
    canonical_dumps,
    sha256_hex,
    validate_profile,
)


class PortalError(RuntimeError):
    pass


class AuthError(PortalError):
    """Unknown account, wrong password, or stale token."""


class NotAuthorized(PortalError):
    """Valid login, but the account does not manage this user."""


class ProfileInvalid(PortalError):
    def __init__(self, violations):
        self.violations = list(violations)
        joined = "; ".join(f"{v.field}: {v.rule}" for v in self.violations)
        super().__init__(f"profile rejected: {joined}")


class PrivacyViolation(PortalError):
    """The ingested payload appears to carry capture media."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("summary rejected: " + "; ".join(self.reasons))


def _hash_password(salt: str, password: str) -> str:
    return sha256_hex(f"{salt}:{password}".encode("utf-8"))


@dataclass(frozen=True)
class Account:
    account_id: str
    salt: str
    password_hash: str
    managed_user_ids: tuple[str, ...]


@dataclass(frozen=True)
class SyncManifest:
    """What a host should hold for one user: profile version plus media checksums."""

    user_id: str
    profile_version: int
    media: dict[str, str]

    def to_json_dict(self) -> JSONDict:
        return {
            "user_id": self.user_id,
            "profile_version": self.profile_version,
            "media": dict(sorted(self.media.items())),
        }

    @classmethod
    def from_json_dict(cls, d: JSONDict) -> "SyncManifest":
        if not isinstance(d, dict):
            raise SchemaError("SyncManifest: expected object")
        media = d.get("media")
        if not isinstance(media, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in media.items()
        ):
            raise SchemaError("SyncManifest.media: expected string map")
        return cls(str(d.get("user_id", "")), int(d.get("profile_version", 0)), dict(media))


@dataclass(frozen=True)
class PreloadBundle:
    """Deliverable for one host sync; `skipped` lists media already up to date."""

    profile: UserProfile
    media: dict[str, bytes]
    manifest: SyncManifest
    skipped: tuple[str, ...] = ()


# -- capture-media detection -------------------------------------------------

_FORBIDDEN_KEYS = frozenset(
    {"images", "recordings", "image_data", "audio_data", "raw_audio", "raw_image", "pcm", "wav_bytes"}
)
_MEDIA_MAGIC = (b"\xff\xd8\xff", b"RIFF", b"\x89PNG", b"ID3", b"OggS", b"fLaC")
_HEX_MAGIC = ("ffd8ff", "52494646", "89504e47")
_DATA_URI_RE = re.compile(r"^data:(image|audio|video)/", re.IGNORECASE)
_BASE64_RE = re.compile(r"^[A-Za-z0-9+/=\s]+$")


def _b64_prefix_bytes(text: str) -> bytes:
    head = "".join(text.split())[:24]
    if len(head) < 8 or not _BASE64_RE.match(head):
        return b""
    try:
        return base64.b64decode(head[: len(head) - len(head) % 4], validate=True)
    except (binascii.Error, ValueError):
        return b""


def _looks_like_media_string(text: str) -> str | None:
    if _DATA_URI_RE.match(text):
        return "data URI with media type"
    stripped = text.strip()
    if len(stripped) >= 64:
        lowered = stripped.lower()
        for magic in _HEX_MAGIC:
            if lowered.startswith(magic):
                return "hex-encoded media magic"
        decoded = _b64_prefix_bytes(stripped)
        for magic in _MEDIA_MAGIC:
            if decoded.startswith(magic):
                return "base64-encoded media magic"
    return None


def _looks_like_byte_array(items: list) -> bool:
    if len(items) < 64:
        return False
    return all(isinstance(v, int) and not isinstance(v, bool) and 0 <= v <= 255 for v in items)


def detect_capture_media(payload: Any, path: str = "$") -> list[str]:
    """Return reasons the payload appears to contain capture media bytes."""
    reasons: list[str] = []
    if isinstance(payload, (bytes, bytearray, memoryview)):
        reasons.append(f"{path}: raw bytes")
    elif isinstance(payload, str):
        why = _looks_like_media_string(payload)
        if why:
            reasons.append(f"{path}: {why}")
    elif isinstance(payload, dict):
        for key, value in payload.items():
            key_str = str(key)
            if key_str.lower() in _FORBIDDEN_KEYS:
                reasons.append(f"{path}.{key_str}: forbidden media key")
            reasons.extend(detect_capture_media(value, f"{path}.{key_str}"))
    elif isinstance(payload, (list, tuple)):
        items = list(payload)
        if _looks_like_byte_array(items):
            reasons.append(f"{path}: byte array")
        else:
            for i, value in enumerate(items):
                reasons.extend(detect_capture_media(value, f"{path}[{i}]"))
    return reasons


# -- service ------------------------------------------------------------------


@dataclass
class _Token:
    account_id: str


class PortalService:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "profiles").mkdir(exist_ok=True)
        (self.root / "media").mkdir(exist_ok=True)
        (self.root / "summaries").mkdir(exist_ok=True)
        self._accounts: dict[str, Account] = {}
        self._tokens: dict[str, _Token] = {}
        self._load_accounts()

    # -- accounts and auth --------------------------------------------------

    @property
    def _accounts_path(self) -> Path:
        return self.root / "accounts.json"

    def _load_accounts(self) -> None:
        if not self._accounts_path.exists():
            return
        raw = json.loads(self._accounts_path.read_text(encoding="utf-8"))
        for entry in raw:
            account = Account(
                account_id=entry["account_id"],
                salt=entry["salt"],
                password_hash=entry["password_hash"],
                managed_user_ids=tuple(entry["managed_user_ids"]),
            )
            self._accounts[account.account_id] = account

    def _save_accounts(self) -> None:
        payload = [
            {
                "account_id": a.account_id,
                "salt": a.salt,
                "password_hash": a.password_hash,
                "managed_user_ids": list(a.managed_user_ids),
            }
            for a in sorted(self._accounts.values(), key=lambda a: a.account_id)
        ]
        self._accounts_path.write_text(canonical_dumps(payload, indent=2) + "\n", encoding="utf-8")

    def create_account(self, account_id: str, password: str, managed_user_ids) -> Account:
        if not account_id:
            raise PortalError("account_id must be non-empty")
        if account_id in self._accounts:
            raise PortalError(f"account exists: {account_id}")
        salt = secrets.token_hex(16)
        account = Account(account_id, salt, _hash_password(salt, password), tuple(managed_user_ids))
        self._accounts[account_id] = account
        self._save_accounts()
        return account

    def login(self, account_id: str, password: str) -> str:
        account = self._accounts.get(account_id)
        if account is None or _hash_password(account.salt, password) != account.password_hash:
            raise AuthError("bad account or password")
        token = secrets.token_hex(16)
        self._tokens[token] = _Token(account_id)
        return token

    def logout(self, token: str) -> None:
        self._tokens.pop(token, None)

    def _account_for(self, token: str) -> Account:
        entry = self._tokens.get(token)
        if entry is None:
            raise AuthError("unknown token")
        return self._accounts[entry.account_id]

    def _authorize(self, token: str, user_id: str) -> Account:
        account = self._account_for(token)
        if user_id not in account.managed_user_ids:
            raise NotAuthorized(f"{account.account_id} does not manage {user_id}")
        return account

    # -- profiles -----------------------------------------------------------

    def _profile_dir(self, user_id: str) -> Path:
        return self.root / "profiles" / user_id

    def _profile_versions(self, user_id: str) -> list[int]:
        folder = self._profile_dir(user_id)
        if not folder.exists():
            return []
        versions = []
        for entry in folder.glob("v*.json"):
            try:
                versions.append(int(entry.stem[1:]))
            except ValueError:
                continue
        return sorted(versions)

    def upsert_profile(self, token: str, profile: UserProfile) -> int:
        """Validate and store a new profile version; returns the version number."""
        self._authorize(token, profile.user_id)
        violations = validate_profile(profile)
        if violations:
            raise ProfileInvalid(violations)
        folder = self._profile_dir(profile.user_id)
        folder.mkdir(parents=True, exist_ok=True)
        version = (self._profile_versions(profile.user_id) or [0])[-1] + 1
        path = folder / f"v{version}.json"
        path.write_text(canonical_dumps(profile.to_json_dict(), indent=2) + "\n", encoding="utf-8")
        return version

    def get_profile(self, token: str, user_id: str, version: int | None = None) -> UserProfile:
        self._authorize(token, user_id)
        versions = self._profile_versions(user_id)
        if not versions:
            raise PortalError(f"no profile for {user_id}")
        pick = version if version is not None else versions[-1]
        if pick not in versions:
            raise PortalError(f"no profile version v{pick} for {user_id}")
        raw = (self._profile_dir(user_id) / f"v{pick}.json").read_text(encoding="utf-8")
        return UserProfile.from_json_dict(json.loads(raw))

    def profile_version(self, token: str, user_id: str) -> int:
        self._authorize(token, user_id)
        versions = self._profile_versions(user_id)
        return versions[-1] if versions else 0

    # -- trigger media ------------------------------------------------------

    def put_media(self, token: str, user_id: str, key: str, data: bytes) -> str:
        self._authorize(token, user_id)
        if not re.fullmatch(r"[A-Za-z0-9._-]+", key):
            raise SchemaError(f"bad media key: {key!r}")
        folder = self.root / "media" / user_id
        folder.mkdir(parents=True, exist_ok=True)
        (folder / key).write_bytes(data)
        return sha256_hex(data)

    def get_media(self, token: str, user_id: str, key: str) -> bytes:
        self._authorize(token, user_id)
        path = self.root / "media" / user_id / key
        if not path.exists():
            raise PortalError(f"no media {key!r} for {user_id}")
        return path.read_bytes()

    def media_keys(self, token: str, user_id: str) -> list[str]:
        self._authorize(token, user_id)
        folder = self.root / "media" / user_id
        if not folder.exists():
            return []
        return sorted(p.name for p in folder.iterdir() if p.is_file())

    # -- host preload -------------------------------------------------------

    def manifest(self, token: str, user_id: str) -> SyncManifest:
        self._authorize(token, user_id)
        media = {}
        folder = self.root / "media" / user_id
        if folder.exists():
            for path in sorted(folder.iterdir()):
                if path.is_file():
                    media[path.name] = sha256_hex(path.read_bytes())
        versions = self._profile_versions(user_id)
        return SyncManifest(user_id, versions[-1] if versions else 0, media)

    def preload(self, token: str, user_id: str, *, have: SyncManifest | None = None) -> PreloadBundle:
        """Bundle the latest profile and media for a host.

        Re-running with the manifest from a previous bundle transfers
        nothing new: unchanged media land in `skipped`, not in `media`.
        """
        profile = self.get_profile(token, user_id)
        manifest = self.manifest(token, user_id)
        known = dict(have.media) if have is not None and have.user_id == user_id else {}
        media: dict[str, bytes] = {}
        skipped: list[str] = []
        folder = self.root / "media" / user_id
        for key, checksum in manifest.media.items():
            if known.get(key) == checksum:
                skipped.append(key)
            else:
                media[key] = (folder / key).read_bytes()
        return PreloadBundle(profile, media, manifest, tuple(skipped))

    # -- session summaries --------------------------------------------------

    def ingest_session_summary(self, token: str, summary: JSONDict) -> Path:
        """Store one metadata-only session summary, or reject it outright."""
        if not isinstance(summary, dict):
            raise SchemaError("summary: expected object")
        user_id = summary.get("user_id")
        conversation_time = summary.get("conversation_time")
        if not isinstance(user_id, str) or not user_id:
            raise SchemaError("summary.user_id: expected non-empty string")
        if not isinstance(conversation_time, str) or not re.fullmatch(
            r"\d{8}-\d{6}", conversation_time
        ):
            raise SchemaError("summary.conversation_time: expected YYYYMMDD-HHMMSS")
        self._authorize(token, user_id)
        reasons = detect_capture_media(summary)
        if reasons:
            raise PrivacyViolation(reasons)
        folder = self.root / "summaries" / user_id
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{conversation_time}.json"
        path.write_text(canonical_dumps(summary, indent=2) + "\n", encoding="utf-8")
        return path

    def summaries(self, token: str, user_id: str) -> list[str]:
        self._authorize(token, user_id)
        folder = self.root / "summaries" / user_id
        if not folder.exists():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))

    def get_summary(self, token: str, user_id: str, conversation_time: str) -> JSONDict:
        self._authorize(token, user_id)
        path = self.root / "summaries" / user_id / f"{conversation_time}.json"
        if not path.exists():
            raise PortalError(f"no summary {conversation_time} for {user_id}")
        return json.loads(path.read_text(encoding="utf-8"))

    def stored_bytes_with_media_magic(self) -> list[Path]:
        """Audit helper: files under the summaries tree holding media magic."""
        hits = []
        for path in sorted((self.root / "summaries").rglob("*")):
            if path.is_file():
                head = path.read_bytes()[:4096]
                if any(magic in head for magic in _MEDIA_MAGIC):
                    hits.append(path)
        return hits
