"""Tool server: registration, validated dispatch, and wire serving."""

from __future__ import annotations

import logging
import socketserver
import struct
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

from radstruct.errors import INVALID_PARAMS, TOOL_ERROR, TOOL_NOT_FOUND, FrameError
from radstruct.mcp.messages import (
    TOOLS_LIST,
    LengthPrefixedFraming,
    LineFraming,
    ToolDescriptor,
    ToolError,
    ToolRequest,
    ToolResult,
)
from radstruct.util import Clock

logger = logging.getLogger(__name__)

ToolHandler = Callable[[dict[str, Any]], dict[str, Any]]


class ToolFailure(Exception):
    """Raised by a tool handler to report a structured failure."""

    def __init__(self, message: str, code: str = TOOL_ERROR):
        super().__init__(message)
        self.code = code


@dataclass
class _RegisteredTool:
    descriptor: ToolDescriptor
    handler: ToolHandler
    reentrant: bool
    lock: threading.Lock


class ToolServer:
    """Holds the tool registry and executes validated calls.

    Safe for concurrent callers; tools registered as non-reentrant are
    serialized behind a per-tool lock (the cache tool uses this).
    """

    def __init__(self, clock: Clock | None = None):
        self._tools: dict[str, _RegisteredTool] = {}
        self._clock = clock or Clock()

    def register(self, descriptor: ToolDescriptor, handler: ToolHandler, reentrant: bool = True) -> None:
        if descriptor.name in self._tools:
            raise ValueError(f"tool {descriptor.name!r} already registered")
        if descriptor.name == TOOLS_LIST:
            raise ValueError(f"{TOOLS_LIST!r} is a reserved method name")
        self._tools[descriptor.name] = _RegisteredTool(
            descriptor=descriptor, handler=handler, reentrant=reentrant, lock=threading.Lock()
        )

    def list_tools(self) -> list[ToolDescriptor]:
        """All registered descriptors in registration order."""
        return [t.descriptor for t in self._tools.values()]

    def call_tool(self, name: str, params: dict[str, Any], request_id: int = 0) -> ToolResult:
        """Validate and execute one call, timing the handler.

        Unknown names and schema violations return error results without
        ever entering the tool body; handler exceptions become TOOL_ERROR.
        """
        start = self._clock.monotonic_ms()

        def done(ok: bool, payload=None, error=None) -> ToolResult:
            duration = self._clock.monotonic_ms() - start
            return ToolResult(id=request_id, ok=ok, payload=payload, error=error, duration_ms=duration)

        tool = self._tools.get(name)
        if tool is None:
            return done(False, error=ToolError(TOOL_NOT_FOUND, f"no tool named {name!r}"))
        problems = tool.descriptor.validate_params(params)
        if problems:
            return done(False, error=ToolError(INVALID_PARAMS, "; ".join(problems)))
        try:
            if tool.reentrant:
                payload = tool.handler(params)
            else:
                with tool.lock:
                    payload = tool.handler(params)
        except ToolFailure as exc:
            return done(False, error=ToolError(exc.code, str(exc)))
        except Exception as exc:  # noqa: BLE001 - tool crashes become wire errors
            logger.exception("tool %s crashed", name)
            return done(False, error=ToolError(TOOL_ERROR, f"{type(exc).__name__}: {exc}"))
        result_problems = tool.descriptor.validate_result(payload)
        if result_problems:
            return done(
                False,
                error=ToolError(TOOL_ERROR, f"tool produced invalid result: {'; '.join(result_problems)}"),
            )
        return done(True, payload=payload)

    def handle_request(self, request: ToolRequest) -> ToolResult:
        """Dispatch one protocol request (tools/list or tools/call)."""
        if request.tool_name == TOOLS_LIST:
            start = self._clock.monotonic_ms()
            payload = {"tools": [d.to_json_obj() for d in self.list_tools()]}
            return ToolResult(
                id=request.id,
                ok=True,
                payload=payload,
                duration_ms=self._clock.monotonic_ms() - start,
            )
        return self.call_tool(request.tool_name, request.params, request_id=request.id)


def serve_stdio(server: ToolServer, stdin=None, stdout=None, max_workers: int = 8) -> None:
    """Serve newline-delimited frames on stdio until EOF.

    Requests dispatch to a worker pool so slow tools do not block the read
    loop; responses are written whole under a lock, in completion order.
    """
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout.buffer
    decoder = LineFraming.decoder()
    write_lock = threading.Lock()

    def respond(request: ToolRequest) -> None:
        result = server.handle_request(request)
        with write_lock:
            stdout.write(LineFraming.encode(result))
            stdout.flush()

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        while True:
            line = stdin.readline()
            if not line:
                break
            for message in decoder.feed(line):
                if isinstance(message, ToolRequest):
                    pool.submit(respond, message)
        decoder.finish()


class TcpToolServer:
    """Threaded TCP listener speaking length-prefixed frames."""

    def __init__(self, server: ToolServer, host: str = "127.0.0.1", port: int = 0):
        self._tool_server = server

        outer = self

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                sock = self.request
                decoder = LengthPrefixedFraming.decoder()
                write_lock = threading.Lock()

                def respond(request: ToolRequest) -> None:
                    result = outer._tool_server.handle_request(request)
                    with write_lock:
                        try:
                            sock.sendall(LengthPrefixedFraming.encode(result))
                        except OSError:
                            pass

                threads: list[threading.Thread] = []
                try:
                    while True:
                        chunk = sock.recv(65536)
                        if not chunk:
                            break
                        for message in decoder.feed(chunk):
                            if isinstance(message, ToolRequest):
                                worker = threading.Thread(target=respond, args=(message,), daemon=True)
                                worker.start()
                                threads.append(worker)
                except (FrameError, OSError) as exc:
                    logger.warning("connection dropped: %s", exc)
                finally:
                    for worker in threads:
                        worker.join(timeout=5)

        class Listener(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._listener = Listener((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._listener.server_address

    def start(self) -> None:
        self._thread = threading.Thread(target=self._listener.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._listener.serve_forever()

    def stop(self) -> None:
        self._listener.shutdown()
        self._listener.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def _read_exact(stream, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_length_prefixed(stream) -> bytes | None:
    """Read one length-prefixed frame body from a blocking stream."""
    header = _read_exact(stream, 4)
    if len(header) < 4:
        return None
    (length,) = struct.unpack(">I", header)
    body = _read_exact(stream, length)
    if len(body) < length:
        raise FrameError("stream ended mid-frame", 4)
    return body
