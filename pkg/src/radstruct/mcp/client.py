"""Tool client: id-correlated calls over in-process, stdio, or TCP transports.

All transports expose the same blocking ``request`` call; the stdio and
TCP transports demultiplex concurrent in-flight calls by response id on a
background reader thread.  The in-process transport dispatches straight
into a server object and is observably identical to the wire paths (same
validation, same error codes), minus serialization.
"""

from __future__ import annotations

import itertools
import subprocess
import socket
import threading
from typing import Any, Protocol

from radstruct.errors import TIMEOUT, FrameError, TransportError
from radstruct.mcp.messages import (
    TOOLS_LIST,
    LengthPrefixedFraming,
    LineFraming,
    ToolDescriptor,
    ToolError,
    ToolRequest,
    ToolResult,
)

DEFAULT_TIMEOUT_S = 300.0


class Transport(Protocol):
    def request(self, request: ToolRequest, timeout: float) -> ToolResult: ...

    def close(self) -> None: ...


class InProcessTransport:
    """Direct dispatch into a ToolServer; used by tests and single-process runs."""

    def __init__(self, server):
        self._server = server

    def request(self, request: ToolRequest, timeout: float) -> ToolResult:
        return self._server.handle_request(request)

    def close(self) -> None:
        pass


class _DemuxState:
    """Pending-call table shared by the wire transports."""

    def __init__(self):
        self.lock = threading.Lock()
        self.pending: dict[int, tuple[threading.Event, list[ToolResult]]] = {}
        self.failure: Exception | None = None

    def register(self, request_id: int) -> tuple[threading.Event, list[ToolResult]]:
        event, slot = threading.Event(), []
        with self.lock:
            if self.failure is not None:
                raise TransportError(str(self.failure))
            self.pending[request_id] = (event, slot)
        return event, slot

    def resolve(self, result: ToolResult) -> None:
        with self.lock:
            entry = self.pending.pop(result.id, None)
        if entry is not None:
            event, slot = entry
            slot.append(result)
            event.set()

    def fail_all(self, exc: Exception) -> None:
        with self.lock:
            self.failure = exc
            entries = list(self.pending.values())
            self.pending.clear()
        for event, _ in entries:
            event.set()

    def wait(self, request_id: int, event: threading.Event, slot: list[ToolResult], timeout: float) -> ToolResult:
        if not event.wait(timeout):
            with self.lock:
                self.pending.pop(request_id, None)
            return ToolResult(
                id=request_id,
                ok=False,
                error=ToolError(TIMEOUT, f"no response within {timeout:g}s"),
            )
        if slot:
            return slot[0]
        raise TransportError(f"connection lost: {self.failure}")


class TcpTransport:
    """Length-prefixed frames over a TCP socket."""

    def __init__(self, host: str, port: int, connect_timeout: float = 10.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._sock.settimeout(None)
        self._state = _DemuxState()
        self._write_lock = threading.Lock()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        decoder = LengthPrefixedFraming.decoder()
        try:
            while True:
                chunk = self._sock.recv(65536)
                if not chunk:
                    raise TransportError("server closed the connection")
                for message in decoder.feed(chunk):
                    if isinstance(message, ToolResult):
                        self._state.resolve(message)
        except (TransportError, FrameError, OSError) as exc:
            self._state.fail_all(exc)

    def request(self, request: ToolRequest, timeout: float) -> ToolResult:
        event, slot = self._state.register(request.id)
        frame = LengthPrefixedFraming.encode(request)
        try:
            with self._write_lock:
                self._sock.sendall(frame)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc
        return self._state.wait(request.id, event, slot, timeout)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class StdioTransport:
    """Newline-delimited frames over a subprocess's stdin/stdout."""

    def __init__(self, argv: list[str]):
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn {argv[0]!r}: {exc}") from exc
        self._state = _DemuxState()
        self._write_lock = threading.Lock()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        decoder = LineFraming.decoder()
        try:
            while True:
                line = self._proc.stdout.readline()
                if not line:
                    raise TransportError("server process closed its stdout")
                for message in decoder.feed(line):
                    if isinstance(message, ToolResult):
                        self._state.resolve(message)
        except (TransportError, FrameError, OSError, ValueError) as exc:
            self._state.fail_all(exc)

    def request(self, request: ToolRequest, timeout: float) -> ToolResult:
        event, slot = self._state.register(request.id)
        frame = LineFraming.encode(request)
        try:
            with self._write_lock:
                self._proc.stdin.write(frame)
                self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"send failed: {exc}") from exc
        return self._state.wait(request.id, event, slot, timeout)

    def close(self) -> None:
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        self._proc.wait(timeout=10)


class ToolClient:
    """Issues tool calls with unique ids; safe for concurrent use."""

    def __init__(self, transport: Transport, default_timeout: float = DEFAULT_TIMEOUT_S):
        self._transport = transport
        self._timeout = default_timeout
        self._ids = itertools.count(1)

    def list_tools(self, timeout: float | None = None) -> list[ToolDescriptor]:
        request = ToolRequest(id=next(self._ids), tool_name=TOOLS_LIST)
        result = self._transport.request(request, timeout or self._timeout)
        if not result.ok:
            raise TransportError(f"tools/list failed: {result.error.code}: {result.error.message}")
        return [ToolDescriptor.from_json_obj(t) for t in result.payload["tools"]]

    def call_tool(self, name: str, arguments: dict[str, Any], timeout: float | None = None) -> ToolResult:
        request = ToolRequest(id=next(self._ids), tool_name=name, params=arguments)
        return self._transport.request(request, timeout or self._timeout)

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ToolClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
