"""Engine configuration values."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from radstruct.errors import ConfigError


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_s: float = 0.5

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ConfigError(f"retry max_attempts must be >= 1, got {self.max_attempts}")
        if self.backoff_s < 0:
            raise ConfigError("retry backoff must be non-negative")


@dataclass(frozen=True)
class EngineConfig:
    """Connection and decoding settings for a chat-completion endpoint.

    The model identity is plain configuration; any endpoint speaking the
    prevailing open inference-server request shape works.  The API key is
    read from the named environment variable, never stored or logged.
    """

    endpoint_url: str = ""
    model_id: str = ""
    api_key_env: str = "RADSTRUCT_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 4096
    request_timeout_s: float = 120.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    # Requests per second allowed by the client-side token bucket;
    # 0 disables rate limiting.
    rate_limit_per_s: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        if self.rate_limit_per_s < 0:
            raise ConfigError("rate limit must be non-negative")

    def api_key(self) -> str:
        return os.environ.get(self.api_key_env, "")
