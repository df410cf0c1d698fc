"""Exception taxonomy and wire-level error codes.

Tool failures travel as data (``ToolResult.error`` with a symbolic code);
exceptions are reserved for conditions the caller cannot continue past:
broken transports, corrupt files, exhausted budgets, bad configuration.
"""

from __future__ import annotations


class RadstructError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RadstructError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class FrameError(RadstructError):
    """A byte stream could not be decoded into a protocol frame."""

    def __init__(self, message: str, byte_offset: int = 0):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class TransportError(RadstructError):
    """The client lost its connection to the tool server."""


class CallTimeoutError(TransportError):
    """A tool call did not complete within its deadline."""


class EngineUnavailableError(RadstructError):
    """The language-model endpoint failed after all retry attempts."""


class MalformedOutputError(RadstructError):
    """Engine output never satisfied the requested schema, repairs included.

    Carries the final raw text so the pipeline trace can record what the
    engine actually said.
    """

    def __init__(self, message: str, raw_text: str = "", attempts: int = 0):
        super().__init__(message)
        self.raw_text = raw_text
        self.attempts = attempts


class StubUnsupportedError(RadstructError):
    """The deterministic stub engine was given a prompt role it cannot play."""


class PlanFailedError(RadstructError):
    """The planner produced no usable decision (bad tool name or output)."""

    def __init__(self, message: str, tool_name: str | None = None):
        super().__init__(message)
        self.tool_name = tool_name


class PipelineError(RadstructError):
    """A task run failed; ``trace`` holds the partial audit trail."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class BudgetExceededError(PipelineError):
    """The agent loop hit its iteration ceiling without terminating."""


class CacheCorruptError(RadstructError):
    """The cache log is unreadable; partial reads are refused."""


class AnnotatorUnavailableError(RadstructError):
    """The remote ontology annotator failed after retries."""


class EmptyInputError(ValueError, RadstructError):
    """A metrics operation received an empty corpus or pair list."""


# Symbolic error codes carried inside ToolResult.error on the wire.
TOOL_NOT_FOUND = "TOOL_NOT_FOUND"
INVALID_PARAMS = "INVALID_PARAMS"
TOOL_ERROR = "TOOL_ERROR"
TIMEOUT = "TIMEOUT"
