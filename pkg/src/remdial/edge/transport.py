"""Transports between the edge client and the host.

The client is written against :class:`HostTransport`; an in-process
implementation backs the deterministic simulation, the HTTP one backs real
deployments, and the fault-injecting wrapper imposes outages and corruption
on either.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

from ..clock import Clock
from ..model import JSONDict, SchemaError
from ..wire import (
    Ack,
    Command,
    PollResponse,
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


class TransportError(RuntimeError):
    """The host could not be reached or answered outside the protocol."""


@runtime_checkable
class HostTransport(Protocol):
    def poll(self, session_id: str | None = None) -> PollResponse: ...
    def send_command(self, command: Command) -> Ack: ...
    def upload_media(self, notice: UploadNotice, data: bytes) -> Ack: ...
    def audio_ready(self, notice: UploadNotice) -> Ack: ...
    def image_ready(self, notice: UploadNotice) -> Ack: ...
    def fetch_log(self, session_id: str) -> JSONDict: ...


class InProcessTransport:
    """Direct calls into a HostService; zero transfer cost."""

    def __init__(self, service) -> None:
        self._service = service

    def poll(self, session_id: str | None = None) -> PollResponse:
        return self._service.poll(session_id)

    def send_command(self, command: Command) -> Ack:
        return self._service.submit_command(command)

    def upload_media(self, notice: UploadNotice, data: bytes) -> Ack:
        return self._service.media_upload(notice, data)

    def audio_ready(self, notice: UploadNotice) -> Ack:
        return self._service.audio_ready(notice)

    def image_ready(self, notice: UploadNotice) -> Ack:
        return self._service.image_ready(notice)

    def fetch_log(self, session_id: str) -> JSONDict:
        return self._service.packaged_log(session_id)


class HttpTransport:
    """Wire-protocol client over HTTP using httpx."""

    def __init__(self, base_url: str, client=None) -> None:
        import httpx

        self._base = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)

    def _request(self, method: str, path: str, **kwargs):
        import httpx

        try:
            response = self._client.request(method, self._base + path, **kwargs)
        except httpx.HTTPError as exc:
            raise TransportError(f"{method} {path}: {exc}") from exc
        if response.status_code >= 500:
            raise TransportError(f"{method} {path}: server error {response.status_code}")
        if response.status_code >= 400:
            raise SchemaError(f"{method} {path}: rejected ({response.text})")
        return response

    def _expect(self, response, message_type):
        message = decode(response.content)
        if not isinstance(message, message_type):
            raise SchemaError(f"expected {message_type.__name__}, got {type(message).__name__}")
        return message

    def poll(self, session_id: str | None = None) -> PollResponse:
        params = {} if session_id is None else {"session_id": session_id}
        return self._expect(self._request("GET", "/poll", params=params), PollResponse)

    def send_command(self, command: Command) -> Ack:
        return self._expect(
            self._request("POST", "/command", content=encode(command)), Ack
        )

    def upload_media(self, notice: UploadNotice, data: bytes) -> Ack:
        headers = {
            MEDIA_HEADER_KIND: notice.kind.value,
            MEDIA_HEADER_SESSION: notice.session_id,
            MEDIA_HEADER_TURN: str(notice.turn_index),
            MEDIA_HEADER_FILE: notice.file_name,
            MEDIA_HEADER_LENGTH: str(notice.byte_length),
            MEDIA_HEADER_CHECKSUM: notice.checksum,
        }
        return self._expect(
            self._request("POST", "/media", content=data, headers=headers), Ack
        )

    def audio_ready(self, notice: UploadNotice) -> Ack:
        return self._expect(
            self._request("POST", "/audio_ready", content=encode(notice)), Ack
        )

    def image_ready(self, notice: UploadNotice) -> Ack:
        return self._expect(
            self._request("POST", "/image_ready", content=encode(notice)), Ack
        )

    def fetch_log(self, session_id: str) -> JSONDict:
        import json

        return json.loads(self._request("GET", f"/session/{session_id}/log").content)


class FaultInjectingTransport:
    """Wraps a transport with scheduled outages and one-shot upload corruption."""

    def __init__(
        self,
        inner: HostTransport,
        clock: Clock,
        *,
        outages: list[tuple[float, float]] | None = None,
        corrupt_once: set[str] | None = None,
        black_hole: set[str] | None = None,
    ):
        self.inner = inner
        self.clock = clock
        self.outages = list(outages or [])
        self.corrupt_once = set(corrupt_once or ())
        self.black_hole = set(black_hole or ())

    def _check_outage(self, what: str) -> None:
        now = self.clock.now()
        for start, end in self.outages:
            if start <= now < end:
                raise TransportError(f"{what}: host unreachable ({start:.2f}s-{end:.2f}s outage)")

    def poll(self, session_id: str | None = None) -> PollResponse:
        self._check_outage("poll")
        return self.inner.poll(session_id)

    def send_command(self, command: Command) -> Ack:
        self._check_outage("command")
        return self.inner.send_command(command)

    def upload_media(self, notice: UploadNotice, data: bytes) -> Ack:
        self._check_outage("media")
        if notice.file_name in self.black_hole:
            raise TransportError(f"media {notice.file_name}: dropped by fault schedule")
        if notice.file_name in self.corrupt_once and data:
            self.corrupt_once.discard(notice.file_name)
            flipped = data[:-1] + bytes([data[-1] ^ 0xFF])  # same length, bad checksum
            return self.inner.upload_media(notice, flipped)
        return self.inner.upload_media(notice, data)

    def audio_ready(self, notice: UploadNotice) -> Ack:
        self._check_outage("audio_ready")
        return self.inner.audio_ready(notice)

    def image_ready(self, notice: UploadNotice) -> Ack:
        self._check_outage("image_ready")
        return self.inner.image_ready(notice)

    def fetch_log(self, session_id: str) -> JSONDict:
        self._check_outage("log")
        return self.inner.fetch_log(session_id)
