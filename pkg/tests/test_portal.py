"""Caregiver portal: auth, profile versioning, media sync, privacy boundary."""

import base64

import pytest

from helpers import make_profile
from remdial.edge.devices import make_placeholder_jpeg, make_placeholder_wav
from remdial.model import MemoryTrigger, SchemaError, UserProfile, sha256_hex
from remdial.portal.service import (
    AuthError,
    NotAuthorized,
    PortalError,
    PortalService,
    PrivacyViolation,
    ProfileInvalid,
    detect_capture_media,
)


@pytest.fixture
def portal(tmp_path):
    return PortalService(tmp_path / "portal")


@pytest.fixture
def token(portal):
    portal.create_account("caregiver-1", "s3cret", ["P01", "P02"])
    return portal.login("caregiver-1", "s3cret")


class TestAccounts:
    def test_login_round_trip(self, portal, token):
        assert portal.profile_version(token, "P01") == 0

    def test_wrong_password(self, portal, token):
        with pytest.raises(AuthError):
            portal.login("caregiver-1", "wrong")

    def test_unknown_account(self, portal):
        with pytest.raises(AuthError):
            portal.login("nobody", "pw")

    def test_logout_invalidates_token(self, portal, token):
        portal.logout(token)
        with pytest.raises(AuthError):
            portal.profile_version(token, "P01")

    def test_duplicate_account_rejected(self, portal, token):
        with pytest.raises(PortalError, match="exists"):
            portal.create_account("caregiver-1", "other", [])

    def test_empty_account_id_rejected(self, portal):
        with pytest.raises(PortalError):
            portal.create_account("", "pw", [])

    def test_unmanaged_user_forbidden(self, portal, token):
        with pytest.raises(NotAuthorized):
            portal.profile_version(token, "P99")

    def test_accounts_survive_reopen_but_tokens_do_not(self, tmp_path):
        first = PortalService(tmp_path / "portal")
        first.create_account("caregiver-1", "s3cret", ["P01"])
        token = first.login("caregiver-1", "s3cret")
        second = PortalService(tmp_path / "portal")
        assert second.login("caregiver-1", "s3cret")  # account persisted
        with pytest.raises(AuthError):
            second.profile_version(token, "P01")  # old token is gone


class TestProfiles:
    def test_versions_increment(self, portal, token):
        profile = make_profile()
        assert portal.upsert_profile(token, profile) == 1
        assert portal.upsert_profile(token, profile) == 2
        assert portal.profile_version(token, "P01") == 2

    def test_get_latest_and_pinned(self, portal, token):
        v1 = make_profile(n_triggers=1)
        v2 = make_profile(n_triggers=3)
        portal.upsert_profile(token, v1)
        portal.upsert_profile(token, v2)
        assert portal.get_profile(token, "P01") == v2
        assert portal.get_profile(token, "P01", version=1) == v1
        with pytest.raises(PortalError, match="v5"):
            portal.get_profile(token, "P01", version=5)

    def test_missing_profile(self, portal, token):
        with pytest.raises(PortalError, match="no profile"):
            portal.get_profile(token, "P02")

    def test_invalid_profile_rejected_with_violations(self, portal, token):
        dup = UserProfile(
            user_id="P01",
            display_name="Pat",
            triggers=(
                MemoryTrigger("trig-1", "a.jpg", "the garden"),
                MemoryTrigger("trig-1", "b.jpg", "the kitchen"),
            ),
        )
        with pytest.raises(ProfileInvalid) as info:
            portal.upsert_profile(token, dup)
        assert any("trig-1" in v.rule for v in info.value.violations)


class TestMedia:
    def test_put_get_round_trip(self, portal, token):
        data = make_placeholder_jpeg(32, 32)
        checksum = portal.put_media(token, "P01", "garden.jpg", data)
        assert checksum == sha256_hex(data)
        assert portal.get_media(token, "P01", "garden.jpg") == data
        assert portal.media_keys(token, "P01") == ["garden.jpg"]

    def test_bad_key_rejected(self, portal, token):
        with pytest.raises(SchemaError, match="bad media key"):
            portal.put_media(token, "P01", "../escape.jpg", b"x")

    def test_missing_media(self, portal, token):
        with pytest.raises(PortalError, match="no media"):
            portal.get_media(token, "P01", "absent.jpg")


class TestPreload:
    def seed(self, portal, token):
        profile = make_profile()
        portal.upsert_profile(token, profile)
        for trigger in profile.triggers:
            portal.put_media(token, "P01", trigger.media_ref, make_placeholder_jpeg(16, 16))
        return profile

    def test_first_sync_ships_everything(self, portal, token):
        profile = self.seed(portal, token)
        bundle = portal.preload(token, "P01")
        assert bundle.profile == profile
        assert set(bundle.media) == {t.media_ref for t in profile.triggers}
        assert bundle.skipped == ()

    def test_resync_with_manifest_transfers_nothing(self, portal, token):
        self.seed(portal, token)
        first = portal.preload(token, "P01")
        second = portal.preload(token, "P01", have=first.manifest)
        assert second.media == {}
        assert sorted(second.skipped) == sorted(first.manifest.media)

    def test_changed_file_is_resent(self, portal, token):
        profile = self.seed(portal, token)
        first = portal.preload(token, "P01")
        changed = profile.triggers[0].media_ref
        portal.put_media(token, "P01", changed, make_placeholder_jpeg(64, 64))
        second = portal.preload(token, "P01", have=first.manifest)
        assert set(second.media) == {changed}


class TestCaptureMediaDetector:
    def test_raw_bytes(self):
        assert detect_capture_media({"x": b"\xff\xd8\xff"}) == ["$.x: raw bytes"]

    def test_forbidden_key(self):
        reasons = detect_capture_media({"images": ["a.jpg"]})
        assert reasons == ["$.images: forbidden media key"]

    def test_data_uri(self):
        reasons = detect_capture_media({"pic": "data:image/jpeg;base64,AAAA"})
        assert reasons == ["$.pic: data URI with media type"]

    def test_hex_magic(self):
        blob = "ffd8ff" + "00" * 40
        assert detect_capture_media({"h": blob}) == ["$.h: hex-encoded media magic"]

    def test_base64_jpeg(self):
        # pad the stub image so the encoded string reaches a plausible length
        blob = base64.b64encode(make_placeholder_jpeg(8, 8) + b"\x00" * 64).decode()
        assert detect_capture_media({"b": blob}) == ["$.b: base64-encoded media magic"]

    def test_base64_wav(self):
        blob = base64.b64encode(make_placeholder_wav(1.0)).decode()
        assert detect_capture_media({"w": blob}) == ["$.w: base64-encoded media magic"]

    def test_byte_array(self):
        assert detect_capture_media({"a": list(range(200)) + [0] * 100}) == ["$.a: byte array"]

    def test_nested_paths_are_labelled(self):
        payload = {"turns": [{"ok": 1}, {"audio_data": "x"}]}
        reasons = detect_capture_media(payload)
        assert reasons == ["$.turns[1].audio_data: forbidden media key"]

    def test_benign_payload_passes(self):
        payload = {
            "user_id": "P01",
            "turns": [{"transcript": "I remember the garden.", "latency": {"end_to_end_s": 5.89}}],
            "notes": "a" * 100,  # long but decodes to no media magic
            "counts": [1, 2, 3],
        }
        assert detect_capture_media(payload) == []


class TestSummaryIngest:
    def summary(self, **extra):
        base = {
            "user_id": "P01",
            "conversation_time": "20250401-100000",
            "turn_count": 3,
            "triggers_used": ["trig-1"],
        }
        base.update(extra)
        return base

    def test_clean_summary_stored_and_listed(self, portal, token):
        path = portal.ingest_session_summary(token, self.summary())
        assert path.exists()
        assert portal.summaries(token, "P01") == ["20250401-100000"]
        loaded = portal.get_summary(token, "P01", "20250401-100000")
        assert loaded["turn_count"] == 3
        assert portal.stored_bytes_with_media_magic() == []

    def test_media_smuggling_rejected_before_disk(self, portal, token):
        bad = self.summary(images=[base64.b64encode(make_placeholder_jpeg(8, 8)).decode()])
        with pytest.raises(PrivacyViolation) as info:
            portal.ingest_session_summary(token, bad)
        assert any("images" in r for r in info.value.reasons)
        assert portal.summaries(token, "P01") == []
        assert portal.stored_bytes_with_media_magic() == []

    def test_bad_conversation_time(self, portal, token):
        with pytest.raises(SchemaError, match="conversation_time"):
            portal.ingest_session_summary(token, self.summary(conversation_time="april 1st"))

    def test_missing_user_id(self, portal, token):
        with pytest.raises(SchemaError, match="user_id"):
            portal.ingest_session_summary(token, {"conversation_time": "20250401-100000"})

    def test_unmanaged_user_rejected(self, portal, token):
        with pytest.raises(NotAuthorized):
            portal.ingest_session_summary(token, self.summary(user_id="P99"))

    def test_reingest_overwrites_same_slot(self, portal, token):
        portal.ingest_session_summary(token, self.summary(turn_count=3))
        portal.ingest_session_summary(token, self.summary(turn_count=4))
        assert portal.summaries(token, "P01") == ["20250401-100000"]
        assert portal.get_summary(token, "P01", "20250401-100000")["turn_count"] == 4

    def test_missing_summary(self, portal, token):
        with pytest.raises(PortalError, match="no summary"):
            portal.get_summary(token, "P01", "20990101-000000")
