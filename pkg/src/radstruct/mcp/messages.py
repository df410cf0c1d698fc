"""Wire messages and framing for the tool protocol.

Messages are JSON-RPC-2.0-shaped envelopes with two methods,
``tools/list`` and ``tools/call``.  Error codes are symbolic strings
(``TOOL_NOT_FOUND``, ``INVALID_PARAMS``, ...) rather than JSON-RPC's
numeric registry; the exact field layout is pinned in
``docs/protocol.md`` and by golden frame fixtures in the test suite.

Two framings carry the same JSON objects: newline-delimited frames for
stdio transports and 4-byte big-endian length-prefixed frames for TCP.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Any, Union

from radstruct.errors import FrameError

JSONRPC_VERSION = "2.0"
TOOLS_LIST = "tools/list"
TOOLS_CALL = "tools/call"

# Refuse absurd frame lengths before allocating; 64 MiB is far beyond any
# legitimate report or trace payload.
MAX_FRAME_BYTES = 64 * 1024 * 1024

_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
    "any": lambda v: True,
}


@dataclass(frozen=True)
class ParamSpec:
    """One named parameter or result field: semantic type + required flag."""

    type: str
    required: bool = True
    description: str = ""

    def __post_init__(self):
        if self.type not in _TYPE_CHECKS:
            raise ValueError(f"unknown semantic type {self.type!r}")

    def accepts(self, value: Any) -> bool:
        return _TYPE_CHECKS[self.type](value)


@dataclass(frozen=True)
class ToolDescriptor:
    """What the planner sees: name, purpose, and the call contract."""

    name: str
    description: str
    param_schema: dict[str, ParamSpec] = field(default_factory=dict)
    result_schema: dict[str, ParamSpec] = field(default_factory=dict)

    def validate_params(self, params: dict[str, Any]) -> list[str]:
        """Schema problems with a params map; empty means valid."""
        problems = []
        if not isinstance(params, dict):
            return [f"params must be an object, got {type(params).__name__}"]
        for name, spec in self.param_schema.items():
            if name not in params:
                if spec.required:
                    problems.append(f"missing required param {name!r}")
                continue
            if not spec.accepts(params[name]):
                problems.append(
                    f"param {name!r} must be {spec.type}, got {type(params[name]).__name__}"
                )
        for name in params:
            if name not in self.param_schema:
                problems.append(f"unknown param {name!r}")
        return problems

    def validate_result(self, payload: dict[str, Any]) -> list[str]:
        problems = []
        for name, spec in self.result_schema.items():
            if name not in payload:
                if spec.required:
                    problems.append(f"missing result field {name!r}")
                continue
            if not spec.accepts(payload[name]):
                problems.append(
                    f"result field {name!r} must be {spec.type}, got {type(payload[name]).__name__}"
                )
        return problems

    def to_json_obj(self) -> dict[str, Any]:
        def fields(schema: dict[str, ParamSpec]) -> dict[str, Any]:
            return {
                name: {"type": s.type, "required": s.required, "description": s.description}
                for name, s in schema.items()
            }

        return {
            "name": self.name,
            "description": self.description,
            "param_schema": fields(self.param_schema),
            "result_schema": fields(self.result_schema),
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "ToolDescriptor":
        def fields(raw: dict[str, Any]) -> dict[str, ParamSpec]:
            return {
                name: ParamSpec(
                    type=s["type"],
                    required=s.get("required", True),
                    description=s.get("description", ""),
                )
                for name, s in raw.items()
            }

        return cls(
            name=obj["name"],
            description=obj.get("description", ""),
            param_schema=fields(obj.get("param_schema", {})),
            result_schema=fields(obj.get("result_schema", {})),
        )


@dataclass(frozen=True)
class ToolRequest:
    id: int
    tool_name: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ToolError:
    code: str
    message: str


@dataclass(frozen=True)
class ToolResult:
    """Outcome of one call; exactly one of payload/error is present."""

    id: int
    ok: bool
    payload: dict[str, Any] | None = None
    error: ToolError | None = None
    duration_ms: int = 0

    def __post_init__(self):
        if self.ok and (self.payload is None or self.error is not None):
            raise ValueError("ok result must carry a payload and no error")
        if not self.ok and (self.error is None or self.payload is not None):
            raise ValueError("failed result must carry an error and no payload")


Message = Union[ToolRequest, ToolResult]


def to_wire_obj(message: Message) -> dict[str, Any]:
    """Message dataclass -> JSON-RPC-shaped object."""
    if isinstance(message, ToolRequest):
        if message.tool_name == TOOLS_LIST:
            return {"jsonrpc": JSONRPC_VERSION, "id": message.id, "method": TOOLS_LIST, "params": {}}
        return {
            "jsonrpc": JSONRPC_VERSION,
            "id": message.id,
            "method": TOOLS_CALL,
            "params": {"name": message.tool_name, "arguments": message.params},
        }
    if isinstance(message, ToolResult):
        if message.ok:
            return {
                "jsonrpc": JSONRPC_VERSION,
                "id": message.id,
                "result": {
                    "ok": True,
                    "payload": message.payload,
                    "duration_ms": message.duration_ms,
                },
            }
        return {
            "jsonrpc": JSONRPC_VERSION,
            "id": message.id,
            "error": {
                "code": message.error.code,
                "message": message.error.message,
                "data": {"duration_ms": message.duration_ms},
            },
        }
    raise TypeError(f"not a protocol message: {type(message).__name__}")


def from_wire_obj(obj: dict[str, Any]) -> Message:
    """JSON-RPC-shaped object -> message dataclass; shape errors raise."""
    if not isinstance(obj, dict):
        raise ValueError("frame payload must be a JSON object")
    if obj.get("jsonrpc") != JSONRPC_VERSION:
        raise ValueError(f"unsupported protocol version {obj.get('jsonrpc')!r}")
    if "id" not in obj:
        raise ValueError("message lacks an id")
    msg_id = obj["id"]
    if "method" in obj:
        method = obj["method"]
        if method == TOOLS_LIST:
            return ToolRequest(id=msg_id, tool_name=TOOLS_LIST, params={})
        if method == TOOLS_CALL:
            params = obj.get("params", {})
            if not isinstance(params, dict) or "name" not in params:
                raise ValueError("tools/call params must carry a tool name")
            return ToolRequest(
                id=msg_id, tool_name=params["name"], params=params.get("arguments", {})
            )
        raise ValueError(f"unknown method {method!r}")
    if "result" in obj:
        result = obj["result"]
        return ToolResult(
            id=msg_id,
            ok=True,
            payload=result.get("payload"),
            duration_ms=result.get("duration_ms", 0),
        )
    if "error" in obj:
        error = obj["error"]
        return ToolResult(
            id=msg_id,
            ok=False,
            error=ToolError(code=error["code"], message=error.get("message", "")),
            duration_ms=error.get("data", {}).get("duration_ms", 0),
        )
    raise ValueError("message is neither request, result, nor error")


def _dump(obj: dict[str, Any]) -> bytes:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class LineFraming:
    """Newline-delimited compact JSON; the stdio framing."""

    name = "line"

    @staticmethod
    def encode(message: Message) -> bytes:
        return _dump(to_wire_obj(message)) + b"\n"

    @staticmethod
    def decoder() -> "LineFrameDecoder":
        return LineFrameDecoder()


class LengthPrefixedFraming:
    """4-byte big-endian length header + JSON payload; the TCP framing."""

    name = "length-prefixed"

    @staticmethod
    def encode(message: Message) -> bytes:
        body = _dump(to_wire_obj(message))
        return struct.pack(">I", len(body)) + body

    @staticmethod
    def decoder() -> "LengthPrefixedFrameDecoder":
        return LengthPrefixedFrameDecoder()


class LineFrameDecoder:
    """Incremental decoder over a byte stream of newline frames."""

    def __init__(self):
        self._buffer = b""
        self._offset = 0  # absolute offset of buffer start in the stream

    def feed(self, data: bytes) -> list[Message]:
        self._buffer += data
        messages = []
        while True:
            newline = self._buffer.find(b"\n")
            if newline < 0:
                if len(self._buffer) > MAX_FRAME_BYTES:
                    raise FrameError("unterminated frame exceeds size limit", self._offset)
                return messages
            line = self._buffer[:newline]
            line_offset = self._offset
            self._buffer = self._buffer[newline + 1 :]
            self._offset += newline + 1
            if not line.strip():
                continue
            try:
                messages.append(from_wire_obj(json.loads(line.decode("utf-8"))))
            except (ValueError, UnicodeDecodeError, KeyError, TypeError) as exc:
                raise FrameError(f"bad frame: {exc}", line_offset) from exc

    def finish(self) -> None:
        """Signal end of stream; leftover bytes mean a truncated frame."""
        if self._buffer.strip():
            raise FrameError("truncated frame at end of stream", self._offset)


class LengthPrefixedFrameDecoder:
    """Incremental decoder for length-prefixed frames."""

    def __init__(self):
        self._buffer = b""
        self._offset = 0

    def feed(self, data: bytes) -> list[Message]:
        self._buffer += data
        messages = []
        while len(self._buffer) >= 4:
            (length,) = struct.unpack(">I", self._buffer[:4])
            if length > MAX_FRAME_BYTES:
                raise FrameError(f"frame length {length} exceeds limit", self._offset)
            if len(self._buffer) < 4 + length:
                return messages
            body = self._buffer[4 : 4 + length]
            body_offset = self._offset + 4
            self._buffer = self._buffer[4 + length :]
            self._offset += 4 + length
            try:
                messages.append(from_wire_obj(json.loads(body.decode("utf-8"))))
            except (ValueError, UnicodeDecodeError, KeyError, TypeError) as exc:
                raise FrameError(f"bad frame: {exc}", body_offset) from exc
        return messages

    def finish(self) -> None:
        if self._buffer:
            raise FrameError("truncated frame at end of stream", self._offset)


def encode_message(message: Message, framing=LineFraming) -> bytes:
    """Encode one message as a self-delimiting frame."""
    return framing.encode(message)


def decode_message(frame: bytes, framing=LineFraming) -> Message:
    """Decode exactly one frame; trailing bytes or truncation raise."""
    decoder = framing.decoder()
    messages = decoder.feed(frame)
    decoder.finish()
    if len(messages) != 1:
        raise FrameError(f"expected exactly one frame, decoded {len(messages)}", 0)
    return messages[0]
