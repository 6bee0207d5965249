"""HTTP binding for the host service, one route per wire endpoint."""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..model import SchemaError
from ..wire import (
    Command,
    NoticeKind,
    UploadNotice,
    MEDIA_HEADER_CHECKSUM,
    MEDIA_HEADER_FILE,
    MEDIA_HEADER_KIND,
    MEDIA_HEADER_LENGTH,
    MEDIA_HEADER_SESSION,
    MEDIA_HEADER_TURN,
    decode,
    encode,
)
from .service import HostService


def _wire_response(message) -> Response:
    return Response(content=encode(message), media_type="application/json")


def make_host_app(service: HostService) -> FastAPI:
    app = FastAPI(title="reminiscence dialogue host", docs_url=None, redoc_url=None)

    @app.exception_handler(SchemaError)
    async def _schema_error(_request: Request, exc: SchemaError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/poll")
    async def poll(session_id: str | None = None) -> Response:
        return _wire_response(service.poll(session_id))

    @app.post("/command")
    async def command(request: Request) -> Response:
        message = decode(await request.body())
        if not isinstance(message, Command):
            raise SchemaError("POST /command expects a command message")
        return _wire_response(service.submit_command(message))

    @app.post("/audio_ready")
    async def audio_ready(request: Request) -> Response:
        message = decode(await request.body())
        if not isinstance(message, UploadNotice):
            raise SchemaError("POST /audio_ready expects an upload_notice message")
        return _wire_response(service.audio_ready(message))

    @app.post("/image_ready")
    async def image_ready(request: Request) -> Response:
        message = decode(await request.body())
        if not isinstance(message, UploadNotice):
            raise SchemaError("POST /image_ready expects an upload_notice message")
        return _wire_response(service.image_ready(message))

    @app.post("/media")
    async def media(request: Request) -> Response:
        headers = request.headers
        try:
            notice = UploadNotice(
                kind=NoticeKind(headers[MEDIA_HEADER_KIND]),
                session_id=headers[MEDIA_HEADER_SESSION],
                turn_index=int(headers[MEDIA_HEADER_TURN]),
                file_name=headers[MEDIA_HEADER_FILE],
                byte_length=int(headers[MEDIA_HEADER_LENGTH]),
                checksum=headers[MEDIA_HEADER_CHECKSUM],
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"POST /media: bad upload headers ({exc})") from exc
        return _wire_response(service.media_upload(notice, await request.body()))

    @app.get("/session/{session_id}/log")
    async def session_log(session_id: str):
        if session_id not in service.session_ids():
            return JSONResponse(status_code=404, content={"error": f"unknown session {session_id!r}"})
        from ..model import canonical_dumps

        return Response(
            content=canonical_dumps(service.packaged_log(session_id)),
            media_type="application/json",
        )

    return app
