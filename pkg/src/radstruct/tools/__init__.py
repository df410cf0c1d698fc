"""The six pipeline tools and their server registration."""

from radstruct.tools.cache import CacheEntry, CacheStore
from radstruct.tools.registry import CANONICAL_TOOL_NAMES, ToolContext, build_tool_server

__all__ = [
    "CacheEntry",
    "CacheStore",
    "CANONICAL_TOOL_NAMES",
    "ToolContext",
    "build_tool_server",
]
