import sys
import threading

import pytest

from radstruct.errors import TIMEOUT, TransportError
from radstruct.mcp.client import InProcessTransport, StdioTransport, TcpTransport, ToolClient
from radstruct.mcp.messages import ParamSpec, ToolDescriptor
from radstruct.mcp.server import TcpToolServer, ToolServer

ECHO_SERVER_SCRIPT = """
import sys
from radstruct.mcp.messages import ParamSpec, ToolDescriptor
from radstruct.mcp.server import ToolServer, serve_stdio

server = ToolServer()
server.register(
    ToolDescriptor(
        name="echo",
        description="echo",
        param_schema={"value": ParamSpec("any")},
        result_schema={"value": ParamSpec("any")},
    ),
    lambda params: {"value": params["value"]},
)
serve_stdio(server)
"""


def build_echo_server():
    server = ToolServer()
    server.register(
        ToolDescriptor(
            name="echo",
            description="echo",
            param_schema={"value": ParamSpec("any")},
            result_schema={"value": ParamSpec("any")},
        ),
        lambda params: {"value": params["value"]},
    )
    return server


@pytest.fixture()
def tcp_server():
    listener = TcpToolServer(build_echo_server(), port=0)
    listener.start()
    yield listener
    listener.stop()


def test_in_process_roundtrip():
    client = ToolClient(InProcessTransport(build_echo_server()))
    assert [d.name for d in client.list_tools()] == ["echo"]
    result = client.call_tool("echo", {"value": {"nested": [1, "two"]}})
    assert result.ok and result.payload == {"value": {"nested": [1, "two"]}}


def test_in_process_and_tcp_observably_identical(tcp_server):
    in_proc = ToolClient(InProcessTransport(build_echo_server()))
    host, port = tcp_server.address
    with ToolClient(TcpTransport(host, port)) as wire:
        for arguments in [{"value": 1}, {"value": None}, {}, {"value": "x", "extra": 2}]:
            a = in_proc.call_tool("echo", arguments)
            b = wire.call_tool("echo", arguments)
            assert a.ok == b.ok
            assert a.payload == b.payload
            assert (a.error and a.error.code) == (b.error and b.error.code)
        assert [d.to_json_obj() for d in in_proc.list_tools()] == [
            d.to_json_obj() for d in wire.list_tools()
        ]


def test_tcp_concurrent_calls_do_not_cross(tcp_server):
    host, port = tcp_server.address
    with ToolClient(TcpTransport(host, port)) as client:
        outcomes: dict[int, bool] = {}
        lock = threading.Lock()

        def call(i: int):
            result = client.call_tool("echo", {"value": i})
            with lock:
                outcomes[i] = result.ok and result.payload == {"value": i}

        threads = [threading.Thread(target=call, args=(i,)) for i in range(64)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(outcomes) == 64
        assert all(outcomes.values())


def test_tcp_timeout_returns_timeout_code():
    server = ToolServer()

    def sleepy(params):
        import time

        time.sleep(0.5)
        return {}

    server.register(ToolDescriptor(name="sleepy", description=""), sleepy)
    listener = TcpToolServer(server, port=0)
    listener.start()
    try:
        host, port = listener.address
        with ToolClient(TcpTransport(host, port)) as client:
            result = client.call_tool("sleepy", {}, timeout=0.05)
            assert not result.ok
            assert result.error.code == TIMEOUT
    finally:
        listener.stop()


def test_tcp_connect_refused_raises_transport_error():
    with pytest.raises(TransportError):
        TcpTransport("127.0.0.1", 1, connect_timeout=0.2)


def test_stdio_subprocess_roundtrip():
    transport = StdioTransport([sys.executable, "-c", ECHO_SERVER_SCRIPT])
    try:
        client = ToolClient(transport)
        assert [d.name for d in client.list_tools()] == ["echo"]
        results = [client.call_tool("echo", {"value": i}) for i in range(5)]
        assert all(r.ok and r.payload == {"value": i} for i, r in enumerate(results))
        missing = client.call_tool("echo", {})
        assert not missing.ok and missing.error.code == "INVALID_PARAMS"
    finally:
        transport.close()


def test_stdio_concurrent_calls(tmp_path):
    transport = StdioTransport([sys.executable, "-c", ECHO_SERVER_SCRIPT])
    try:
        client = ToolClient(transport)
        outcomes = {}
        lock = threading.Lock()

        def call(i):
            result = client.call_tool("echo", {"value": i})
            with lock:
                outcomes[i] = result.ok and result.payload == {"value": i}

        threads = [threading.Thread(target=call, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(outcomes) == 16 and all(outcomes.values())
    finally:
        transport.close()
