"""HTTP client for chat-completion endpoints.

Speaks the prevailing open inference-server request shape: POST a JSON
body {model, messages, temperature, max_tokens} and read the first
choice's message content.  Transient failures retry with exponential
backoff; a client-side token bucket caps the request rate when
configured.
"""

from __future__ import annotations

import logging
import threading
import time

import requests

from radstruct.errors import EngineUnavailableError
from radstruct.llm.config import EngineConfig

logger = logging.getLogger(__name__)


class TokenBucket:
    """Simple thread-safe rate limiter: ``rate`` tokens/s, burst ``capacity``."""

    def __init__(self, rate: float, capacity: float | None = None, clock=time.monotonic):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._clock = clock
        self._last = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
        self._last = now

    def try_acquire(self) -> float:
        """Take one token; returns 0, or the wait in seconds until one frees."""
        with self._lock:
            self._refill()
            if self._tokens >= 1.0:
                self._tokens -= 1.0
                return 0.0
            return (1.0 - self._tokens) / self.rate

    def acquire(self, sleep=time.sleep) -> None:
        while True:
            wait = self.try_acquire()
            if wait <= 0:
                return
            sleep(wait)


class RemoteEngine:
    """ChatEngine backed by an HTTP endpoint."""

    def __init__(self, config: EngineConfig, session: requests.Session | None = None, sleep=time.sleep):
        if not config.endpoint_url:
            raise EngineUnavailableError("no endpoint_url configured for the remote engine")
        self.config = config
        self._session = session or requests.Session()
        self._sleep = sleep
        self._bucket = TokenBucket(config.rate_limit_per_s) if config.rate_limit_per_s > 0 else None

    def chat(self, messages: list[dict[str, str]]) -> str:
        if self._bucket is not None:
            self._bucket.acquire(self._sleep)
        body = {
            "model": self.config.model_id,
            "messages": messages,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = self.config.api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: Exception | None = None
        for attempt in range(self.config.retry.max_attempts):
            if attempt:
                self._sleep(self.config.retry.backoff_s * 2 ** (attempt - 1))
            try:
                response = self._session.post(
                    self.config.endpoint_url,
                    json=body,
                    headers=headers,
                    timeout=self.config.request_timeout_s,
                )
                if response.status_code >= 500:
                    raise requests.RequestException(f"server error {response.status_code}")
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                logger.warning("engine request attempt %d failed: %s", attempt + 1, exc)
        raise EngineUnavailableError(
            f"engine unreachable after {self.config.retry.max_attempts} attempts: {last_error}"
        )
