import httpx
import pytest
import srsly

from stableqa.completion import CompletionClient, OracleBackend, ReplayBackend, ResponseCache, make_backend
from stableqa.errors import BackendError
from stableqa.types import BackendConfig, CompletionRequest, CompletionResponse


@pytest.fixture(autouse=True)
def no_sleep(monkeypatch):
    monkeypatch.setattr("retry.api.time.sleep", lambda _: None)


def endpoint(*statuses, text="go(Mary, kitchen)."):
    """Transport that answers with ``statuses`` in turn and records what it saw."""
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(request)
        status = statuses[min(len(seen), len(statuses)) - 1]
        if status != 200:
            return httpx.Response(status, text="slow down")
        return httpx.Response(200, json={"model": "m", "choices": [{"text": text}], "usage": {"total_tokens": 12}})

    return httpx.MockTransport(handler), seen


def client(tmp_path, transport, retries=2):
    return CompletionClient(
        config=BackendConfig(retries=retries),
        cache=ResponseCache(tmp_path / "cache"),
        api_key="test",
        base_url="http://backend.test/v1",
        transport=transport,
    )


def test_cache_round_trip(tmp_path):
    cache = ResponseCache(tmp_path)
    req = CompletionRequest(model="m", prompt="Sentence: Mary went home.")
    assert cache.get(req) is None
    cache.put(req, CompletionResponse(text="go(mary, home).", model="m"))
    hit = cache.get(req)
    assert hit.text == "go(mary, home)."
    assert hit.cached
    assert cache.keys() == [req.key]
    assert len(cache) == 1


def test_first_writer_wins(tmp_path):
    cache = ResponseCache(tmp_path)
    req = CompletionRequest(model="m", prompt="p")
    cache.put(req, CompletionResponse(text="first"))
    cache.put(req, CompletionResponse(text="second"))
    assert cache.get(req).text == "first"
    assert len(list(srsly.read_jsonl(cache.index_path))) == 1


def test_request_key_depends_on_settings():
    a = CompletionRequest(model="m", prompt="p")
    b = CompletionRequest(model="m", prompt="p", temperature=0.5)
    assert a.key != b.key
    assert a.key == CompletionRequest(model="m", prompt="p").key


def test_client_posts_and_caches(tmp_path):
    transport, seen = endpoint(200)
    backend = client(tmp_path, transport)
    first = backend.respond("babi_123_context", "Mary went to the kitchen.")
    second = backend.respond("babi_123_context", "Mary went to the kitchen.")
    assert first == second == "go(Mary, kitchen)."
    assert len(seen) == 1
    assert seen[0].url.path == "/v1/completions"
    assert seen[0].headers["Authorization"] == "Bearer test"
    body = srsly.json_loads(seen[0].content)
    assert body["prompt"].endswith("Sentence: Mary went to the kitchen.\nSemantic parse:")


def test_rate_limits_are_retried(tmp_path):
    transport, seen = endpoint(429, 200)
    backend = client(tmp_path, transport)
    assert backend.complete("prompt").text == "go(Mary, kitchen)."
    assert backend.calls == 2


def test_retries_run_out(tmp_path):
    transport, seen = endpoint(503)
    backend = client(tmp_path, transport, retries=2)
    with pytest.raises(BackendError) as err:
        backend.complete("prompt")
    assert err.value.status == 503
    assert len(seen) == 2
    assert len(backend.cache) == 0


def test_client_errors_are_not_retried(tmp_path):
    transport, seen = endpoint(400)
    backend = client(tmp_path, transport)
    with pytest.raises(BackendError) as err:
        backend.complete("prompt")
    assert err.value.status == 400
    assert len(seen) == 1


def test_replay_falls_back():
    backend = ReplayBackend({"Mary went home.": "go(mary, home)."}, fallback=OracleBackend())
    assert backend.respond("babi_123_context", "Mary went home.") == "go(mary, home)."
    assert "go(john,office)" in backend.respond("babi_123_context", "John went to the office.")
    assert ReplayBackend({}).respond("babi_123_context", "John went to the office.") == ""


def test_make_backend_reads_replay_file(tmp_path):
    path = tmp_path / "replay.jsonl"
    srsly.write_jsonl(path, [{"input": "Mary went home.", "response": "go(mary, home)."}])
    backend = make_backend("replay", replay=str(path))
    assert backend.name == "replay"
    assert backend.respond("babi_123_context", "Mary went home.") == "go(mary, home)."
    assert make_backend("oracle").name == "oracle"
    with pytest.raises(ValueError):
        make_backend("telepathy")
