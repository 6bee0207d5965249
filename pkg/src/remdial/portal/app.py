"""HTTP surface for the caregiver portal."""

from __future__ import annotations

import json

from fastapi import FastAPI, Header, Request, Response

from ..model import SchemaError, UserProfile, canonical_dumps
from .service import (
    AuthError,
    NotAuthorized,
    PortalError,
    PortalService,
    PrivacyViolation,
    ProfileInvalid,
    SyncManifest,
)

TOKEN_HEADER = "x-portal-token"


def _json(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_dumps(payload), media_type="application/json", status_code=status_code
    )


def make_portal_app(service: PortalService) -> FastAPI:
    app = FastAPI(title="reminiscence portal", docs_url=None, redoc_url=None)

    @app.exception_handler(SchemaError)
    async def _schema_error(_req, exc):
        return _json({"error": str(exc)}, status_code=400)

    @app.exception_handler(AuthError)
    async def _auth_error(_req, exc):
        return _json({"error": str(exc)}, status_code=401)

    @app.exception_handler(NotAuthorized)
    async def _not_authorized(_req, exc):
        return _json({"error": str(exc)}, status_code=403)

    @app.exception_handler(PrivacyViolation)
    async def _privacy(_req, exc: PrivacyViolation):
        return _json({"error": str(exc), "reasons": exc.reasons}, status_code=403)

    @app.exception_handler(ProfileInvalid)
    async def _invalid_profile(_req, exc: ProfileInvalid):
        detail = [{"field": v.field, "rule": v.rule} for v in exc.violations]
        return _json({"error": "profile rejected", "violations": detail}, status_code=422)

    @app.exception_handler(PortalError)
    async def _portal_error(_req, exc):
        return _json({"error": str(exc)}, status_code=404)

    @app.post("/portal/login")
    async def login(request: Request) -> Response:
        body = json.loads(await request.body())
        if not isinstance(body, dict) or not {"account_id", "password"} <= body.keys():
            raise SchemaError("login: expected account_id and password")
        token = service.login(str(body["account_id"]), str(body["password"]))
        return _json({"token": token})

    @app.get("/portal/profile/{user_id}")
    async def get_profile(
        user_id: str, version: int | None = None, x_portal_token: str = Header(default="")
    ) -> Response:
        profile = service.get_profile(x_portal_token, user_id, version)
        return _json(profile.to_json_dict())

    @app.put("/portal/profile/{user_id}")
    async def put_profile(
        user_id: str, request: Request, x_portal_token: str = Header(default="")
    ) -> Response:
        profile = UserProfile.from_json_dict(json.loads(await request.body()))
        if profile.user_id != user_id:
            raise SchemaError("profile user_id does not match path")
        version = service.upsert_profile(x_portal_token, profile)
        return _json({"user_id": user_id, "version": version})

    @app.get("/portal/media/{user_id}/{key}")
    async def get_media(user_id: str, key: str, x_portal_token: str = Header(default="")) -> Response:
        data = service.get_media(x_portal_token, user_id, key)
        return Response(content=data, media_type="application/octet-stream")

    @app.put("/portal/media/{user_id}/{key}")
    async def put_media(
        user_id: str, key: str, request: Request, x_portal_token: str = Header(default="")
    ) -> Response:
        checksum = service.put_media(x_portal_token, user_id, key, await request.body())
        return _json({"key": key, "checksum": checksum})

    @app.post("/portal/preload/{user_id}")
    async def preload(
        user_id: str, request: Request, x_portal_token: str = Header(default="")
    ) -> Response:
        raw = await request.body()
        have = None
        if raw:
            body = json.loads(raw)
            if body:
                have = SyncManifest.from_json_dict(body)
        bundle = service.preload(x_portal_token, user_id, have=have)
        return _json(
            {
                "profile": bundle.profile.to_json_dict(),
                "manifest": bundle.manifest.to_json_dict(),
                "media_keys": sorted(bundle.media),
                "skipped": list(bundle.skipped),
            }
        )

    @app.post("/portal/summary")
    async def ingest_summary(request: Request, x_portal_token: str = Header(default="")) -> Response:
        body = json.loads(await request.body())
        path = service.ingest_session_summary(x_portal_token, body)
        return _json({"stored": path.name})

    return app
