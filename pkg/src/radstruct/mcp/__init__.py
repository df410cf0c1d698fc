"""Tool-protocol substrate: typed messages, framing, server, and client."""

from radstruct.mcp.messages import (
    ParamSpec,
    ToolDescriptor,
    ToolError,
    ToolRequest,
    ToolResult,
    TOOLS_LIST,
)
from radstruct.mcp.server import ToolFailure, ToolServer
from radstruct.mcp.client import InProcessTransport, StdioTransport, TcpTransport, ToolClient

__all__ = [
    "ParamSpec",
    "ToolDescriptor",
    "ToolError",
    "ToolRequest",
    "ToolResult",
    "TOOLS_LIST",
    "ToolFailure",
    "ToolServer",
    "InProcessTransport",
    "StdioTransport",
    "TcpTransport",
    "ToolClient",
]
