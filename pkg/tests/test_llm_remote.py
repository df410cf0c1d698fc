import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from radstruct.errors import EngineUnavailableError, MalformedOutputError
from radstruct.llm.base import ChatEngine, complete
from radstruct.llm.config import EngineConfig, RetryPolicy
from radstruct.llm.remote import RemoteEngine, TokenBucket
from radstruct.llm.stub import StubEngine


class FakeCompletionServer:
    """Minimal chat-completion endpoint with scripted replies."""

    def __init__(self):
        self.replies: list = []
        self.requests: list = []
        self.fail_next = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers["Content-Length"])
                body = json.loads(self.rfile.read(length))
                outer.requests.append({"body": body, "auth": self.headers.get("Authorization")})
                if outer.fail_next > 0:
                    outer.fail_next -= 1
                    self.send_response(503)
                    self.end_headers()
                    return
                reply = outer.replies.pop(0) if outer.replies else "{}"
                payload = {"choices": [{"message": {"role": "assistant", "content": reply}}]}
                data = json.dumps(payload).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture()
def fake_server():
    server = FakeCompletionServer()
    yield server
    server.stop()


def engine_for(server, **overrides):
    config = EngineConfig(
        endpoint_url=server.url,
        model_id="test-model",
        retry=RetryPolicy(max_attempts=3, backoff_s=0.0),
        request_timeout_s=5.0,
        **overrides,
    )
    return RemoteEngine(config)


def test_remote_chat_roundtrip(fake_server):
    fake_server.replies.append('{"action": "final"}')
    engine = engine_for(fake_server)
    text = engine.chat([{"role": "user", "content": "hello"}])
    assert text == '{"action": "final"}'
    body = fake_server.requests[0]["body"]
    assert body["model"] == "test-model"
    assert body["temperature"] == 0.0
    assert body["messages"] == [{"role": "user", "content": "hello"}]


def test_remote_sends_api_key_from_env(fake_server, monkeypatch):
    monkeypatch.setenv("TEST_ENGINE_KEY", "sekrit")
    fake_server.replies.append("ok")
    engine = engine_for(fake_server, api_key_env="TEST_ENGINE_KEY")
    engine.chat([{"role": "user", "content": "x"}])
    assert fake_server.requests[0]["auth"] == "Bearer sekrit"


def test_remote_retries_transient_failures(fake_server):
    fake_server.fail_next = 2
    fake_server.replies.append("recovered")
    engine = engine_for(fake_server)
    assert engine.chat([{"role": "user", "content": "x"}]) == "recovered"
    assert len(fake_server.requests) == 3


def test_remote_gives_up_after_max_attempts(fake_server):
    fake_server.fail_next = 99
    engine = engine_for(fake_server)
    with pytest.raises(EngineUnavailableError):
        engine.chat([{"role": "user", "content": "x"}])
    assert len(fake_server.requests) == 3


def test_remote_unreachable_endpoint():
    config = EngineConfig(
        endpoint_url="http://127.0.0.1:9/unreachable",
        retry=RetryPolicy(max_attempts=2, backoff_s=0.0),
        request_timeout_s=0.2,
    )
    with pytest.raises(EngineUnavailableError):
        RemoteEngine(config).chat([{"role": "user", "content": "x"}])


def test_remote_through_complete_with_repair(fake_server):
    fake_server.replies.extend(["no json here", '<think>fixing</think>{"action": "final"}'])
    engine = engine_for(fake_server)
    result = complete(engine, "prompt", {"type": "object", "required": ["action"]})
    assert result.parsed_value == {"action": "final"}
    assert result.reasoning_text == "fixing"


def test_stub_and_remote_share_interface_and_errors(fake_server):
    # both satisfy the protocol...
    assert isinstance(StubEngine(), ChatEngine)
    assert isinstance(RemoteEngine(EngineConfig(endpoint_url="http://x")), ChatEngine)
    # ...and surface the same error taxonomy through complete()
    fake_server.replies.extend(["nope", "nope", "nope"])
    with pytest.raises(MalformedOutputError):
        complete(engine_for(fake_server), "prompt", {"type": "object", "required": ["zz"]})


def test_token_bucket_limits_rate():
    clock = {"now": 0.0}
    bucket = TokenBucket(rate=2.0, capacity=2.0, clock=lambda: clock["now"])
    assert bucket.try_acquire() == 0.0
    assert bucket.try_acquire() == 0.0
    wait = bucket.try_acquire()
    assert wait == pytest.approx(0.5)
    clock["now"] += 0.5
    assert bucket.try_acquire() == 0.0


def test_token_bucket_refill_caps_at_capacity():
    clock = {"now": 0.0}
    bucket = TokenBucket(rate=10.0, capacity=3.0, clock=lambda: clock["now"])
    for _ in range(3):
        assert bucket.try_acquire() == 0.0
    clock["now"] += 100.0
    for _ in range(3):
        assert bucket.try_acquire() == 0.0
    assert bucket.try_acquire() > 0.0


def test_engine_config_validation():
    from radstruct.errors import ConfigError

    with pytest.raises(ConfigError):
        EngineConfig(temperature=-1.0)
    with pytest.raises(ConfigError):
        RetryPolicy(max_attempts=0)
