"""Tests for the chat client: request hashing, record/replay, and HTTP transport."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from acurai.llm import (
    CallableClient,
    ChatMessage,
    ChatRequest,
    ChatResponse,
    HTTPChatClient,
    LLMError,
    MissingFixtureError,
    RecordingClient,
    ReplayClient,
    load_cassette,
    record_replay_key,
    save_cassette,
)


def _request(user="What is calcium?", system="You are terse.", **kw):
    return ChatRequest.build(system, user, **kw)


class TestRequestShape:
    def test_build_produces_system_then_user(self):
        req = _request()
        assert [m.role for m in req.messages] == ["system", "user"]

    def test_empty_message_list_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(), model="m")

    def test_first_non_system_message_must_be_user(self):
        msgs = (ChatMessage("system", "s"), ChatMessage("assistant", "a"))
        with pytest.raises(ValueError):
            ChatRequest(messages=msgs, model="m")


class TestRecordReplayKey:
    def test_identical_requests_share_a_key(self):
        assert record_replay_key(_request()) == record_replay_key(_request())

    def test_temperature_changes_the_key(self):
        hot = _request(temperature=0.7)
        assert record_replay_key(_request()) != record_replay_key(hot)

    def test_model_changes_the_key(self):
        other = _request(model="gpt-4-0613")
        assert record_replay_key(_request()) != record_replay_key(other)

    def test_message_content_changes_the_key(self):
        other = _request(user="What is magnesium?")
        assert record_replay_key(_request()) != record_replay_key(other)

    def test_max_tokens_does_not_change_the_key(self):
        # Token caps are a transport knob, not part of the conversation:
        # recordings made with different caps should still replay.
        base = _request()
        capped = ChatRequest(messages=base.messages, model=base.model, max_tokens=64)
        assert record_replay_key(base) == record_replay_key(capped)

    def test_key_is_hex_sha256(self):
        key = record_replay_key(_request())
        assert len(key) == 64
        int(key, 16)


class TestReplayClient:
    def test_replays_recorded_content(self, tmp_path):
        req = _request()
        path = tmp_path / "cassette.json"
        save_cassette(
            {record_replay_key(req): {"content": "Calcium is a metal.", "model": req.model}},
            path,
        )
        resp = ReplayClient(path).chat(req)
        assert resp.content == "Calcium is a metal."
        assert resp.latency_ms == 0

    def test_missing_fixture_error_names_the_hash(self, tmp_path):
        path = tmp_path / "cassette.json"
        save_cassette({}, path)
        req = _request()
        with pytest.raises(MissingFixtureError) as exc:
            ReplayClient(path).chat(req)
        assert record_replay_key(req) in str(exc.value)

    def test_accepts_in_memory_mapping(self):
        req = _request()
        client = ReplayClient({record_replay_key(req): {"content": "ok", "model": "m"}})
        assert client.chat(req).content == "ok"


class TestRecordingClient:
    def test_records_then_replays_byte_identically(self, tmp_path):
        path = tmp_path / "cassette.json"
        inner = CallableClient(lambda r: "answer about " + r.messages[-1].content)
        recorded = RecordingClient(inner, path).chat(_request())
        replayed = ReplayClient(path).chat(_request())
        assert replayed.content == recorded.content

    def test_refuses_to_overwrite_existing_entries(self, tmp_path):
        path = tmp_path / "cassette.json"
        RecordingClient(CallableClient(lambda r: "first"), path).chat(_request())
        # A second recording pass with different inner output must keep the
        # original entry unless explicitly forced.
        kept = RecordingClient(CallableClient(lambda r: "second"), path).chat(_request())
        assert kept.content == "first"

    def test_overwrite_flag_forces_refresh(self, tmp_path):
        path = tmp_path / "cassette.json"
        RecordingClient(CallableClient(lambda r: "first"), path).chat(_request())
        forced = RecordingClient(CallableClient(lambda r: "second"), path, overwrite=True)
        assert forced.chat(_request()).content == "second"

    def test_cassette_round_trips_through_disk(self, tmp_path):
        path = tmp_path / "cassette.json"
        RecordingClient(CallableClient(lambda r: "x"), path).chat(_request())
        assert load_cassette(path) == load_cassette(path)
        text = path.read_text(encoding="utf-8")
        assert text.endswith("\n")
        assert json.loads(text)


class _StubHandler(BaseHTTPRequestHandler):
    """Minimal chat-completions endpoint used to exercise the HTTP client."""

    status = 200
    payload = None

    def do_POST(self):  # noqa: N802 (http.server naming)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        self.server.last_request = body
        self.send_response(self.status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        payload = self.payload or {
            "choices": [{"message": {"content": "stubbed reply"}}],
            "model": body.get("model", "stub"),
            "usage": {"prompt_tokens": 7, "completion_tokens": 3},
        }
        self.wfile.write(json.dumps(payload).encode("utf-8"))

    def log_message(self, *args):  # keep pytest output quiet
        pass


@pytest.fixture()
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        thread.join(timeout=2)


class TestHTTPChatClient:
    def test_posts_to_chat_completions_and_parses_reply(self, stub_server):
        _StubHandler.status = 200
        _StubHandler.payload = None
        base = "http://127.0.0.1:%d/v1" % stub_server.server_address[1]
        client = HTTPChatClient(base_url=base, api_key="test-key", retries=1)
        resp = client.chat(_request())
        assert resp.content == "stubbed reply"
        assert resp.usage == (7, 3)
        sent = stub_server.last_request
        assert sent["temperature"] == 0.0
        assert sent["messages"][0]["role"] == "system"

    def test_auth_failure_is_not_retried(self, stub_server):
        _StubHandler.status = 401
        _StubHandler.payload = {"error": {"message": "bad key"}}
        base = "http://127.0.0.1:%d/v1" % stub_server.server_address[1]
        client = HTTPChatClient(base_url=base, api_key="wrong", retries=3)
        with pytest.raises(LLMError) as exc:
            client.chat(_request())
        assert exc.value.kind == "auth"
        _StubHandler.status = 200
        _StubHandler.payload = None

    def test_malformed_body_surfaces_as_bad_response(self, stub_server):
        _StubHandler.status = 200
        _StubHandler.payload = {"unexpected": True}
        base = "http://127.0.0.1:%d/v1" % stub_server.server_address[1]
        client = HTTPChatClient(base_url=base, api_key="k", retries=1)
        with pytest.raises(LLMError) as exc:
            client.chat(_request())
        assert exc.value.kind == "bad-response"
        _StubHandler.payload = None


class TestCallableClient:
    def test_wraps_a_plain_function(self):
        client = CallableClient(lambda r: r.messages[-1].content.upper())
        assert client.chat(_request(user="hi")).content == "HI"

    def test_response_type(self):
        client = CallableClient(lambda r: "x")
        assert isinstance(client.chat(_request()), ChatResponse)
