"""Uniform chat-completion interface: remote HTTP client and offline stub."""

from radstruct.llm.base import ChatEngine, StructuredCompletion, complete
from radstruct.llm.config import EngineConfig, RetryPolicy
from radstruct.llm.parsing import ParseFailure, parse_structured_output, strip_reasoning
from radstruct.llm.remote import RemoteEngine
from radstruct.llm.stub import StubEngine, StubLexicon
from radstruct.llm.templates import PromptTemplate, TemplateLibrary

__all__ = [
    "ChatEngine",
    "StructuredCompletion",
    "complete",
    "EngineConfig",
    "RetryPolicy",
    "ParseFailure",
    "parse_structured_output",
    "strip_reasoning",
    "RemoteEngine",
    "StubEngine",
    "StubLexicon",
    "PromptTemplate",
    "TemplateLibrary",
]
