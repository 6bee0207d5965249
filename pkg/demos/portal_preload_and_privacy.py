"""
Caregiver portal: preparing a user and keeping captures out
===========================================================

A caregiver account uploads a profile and trigger photos, then a host
syncs twice: the first preload ships everything, the second transfers
nothing because the host already holds current copies. Afterwards a
finished session reports back. The portal accepts the metadata-only
summary but refuses the same summary once audio bytes are smuggled in,
so recordings and photos from the session never leave the host.
"""

import base64
import tempfile
from pathlib import Path

from remdial.edge.devices import make_placeholder_jpeg, make_placeholder_wav
from remdial.model import MemoryTrigger, RobotSetup, UserProfile
from remdial.portal import PortalService, PrivacyViolation
from remdial.sim import End, Scenario, SelectTrigger, Speak, run_scenario

portal_root = Path(tempfile.mkdtemp(prefix="remdial-portal-"))
portal = PortalService(portal_root)
portal.create_account("caregiver-1", "correct horse", ["P07"])
token = portal.login("caregiver-1", "correct horse")

# Step one: the caregiver prepares the user remotely.
profile = UserProfile(
    user_id="P07",
    display_name="Jo",
    triggers=(
        MemoryTrigger("trig-1", "allotment.jpg", "the allotment where you grew tomatoes"),
        MemoryTrigger("trig-2", "choir.jpg", "singing with the church choir"),
    ),
)
version = portal.upsert_profile(token, profile)
for key in ("allotment.jpg", "choir.jpg"):
    portal.put_media(token, "P07", key, make_placeholder_jpeg(640, 480))
print(f"profile for P07 stored at version {version}")

# Step two: a fresh host preloads everything it needs for offline use.
bundle = portal.preload(token, "P07")
print(f"first sync: {sorted(bundle.media)} shipped, {list(bundle.skipped)} skipped")

# The host keeps the manifest; the next sync only moves what changed.
bundle = portal.preload(token, "P07", have=bundle.manifest)
print(f"second sync: {sorted(bundle.media)} shipped, {list(bundle.skipped)} skipped")

# Step three: the session runs on the host and reports a summary back.
result = run_scenario(
    Scenario(
        user_id="P07",
        conversation_time="20250710-150000",
        robot_setup=RobotSetup.SETUP_II,
        profile=profile,
        actions=(
            SelectTrigger("trig-1"),
            Speak("I grew the sweetest tomatoes two summers ago.", 6.0),
            End(),
        ),
    )
)
stored = portal.ingest_session_summary(token, result.packaged_log)
print(f"summary accepted: {stored.relative_to(portal_root)}")

# Step four: the same summary with session audio stuffed inside is
# turned away before anything touches disk.
tainted = dict(result.packaged_log)
tainted["recordings"] = [base64.b64encode(make_placeholder_wav(2.0)).decode()]
try:
    portal.ingest_session_summary(token, tainted)
except PrivacyViolation as refusal:
    print("tainted summary refused:")
    for reason in refusal.reasons:
        print(f"  - {reason}")

print(f"summaries on file for P07: {portal.summaries(token, 'P07')}")
print(f"stored files containing media bytes: {portal.stored_bytes_with_media_magic()}")
