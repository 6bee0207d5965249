"""Caregiver-facing portal: accounts, profiles, trigger media, summaries."""

from .service import (
    Account,
    AuthError,
    NotAuthorized,
    PortalError,
    PortalService,
    PreloadBundle,
    PrivacyViolation,
    ProfileInvalid,
    SyncManifest,
    detect_capture_media,
)

__all__ = [
    "Account",
    "AuthError",
    "NotAuthorized",
    "PortalError",
    "PortalService",
    "PreloadBundle",
    "PrivacyViolation",
    "ProfileInvalid",
    "SyncManifest",
    "detect_capture_media",
]
