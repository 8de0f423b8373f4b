"""Completion backends: the HTTP client with its on-disk cache, the oracle and canned replies.

Every backend answers ``respond(template, text)``: the prompt template id and the text
that fills its input slot. Callers never see the difference between a model and the oracle.
"""
import os
import tempfile
import threading
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import httpx
import srsly
from lazylines import LazyLines
from retry import retry

from .constants import CACHE_FOLDER, CONFIG
from .errors import BackendError, CacheWriteError
from .oracle import oracle_response
from .prompts import render_prompt
from .types import BackendConfig, CompletionRequest, CompletionResponse
from .utils import console


class ResponseCache:
    """One JSON file per request key under ``root/ab/cd/<key>.json`` plus an append-only index.

    Readers never see half-written entries: files are written next to their target and
    moved into place. The first writer of a key wins.
    """

    def __init__(self, root: Union[str, Path] = CACHE_FOLDER) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def path(self, key: str) -> Path:
        return self.root / key[:2] / key[2:4] / f"{key}.json"

    @property
    def index_path(self) -> Path:
        return self.root / "index.jsonl"

    def get(self, request: CompletionRequest) -> Optional[CompletionResponse]:
        path = self.path(request.key)
        if not path.exists():
            return None
        entry = srsly.read_json(path)
        return CompletionResponse(**entry["response"], cached=True)

    def put(self, request: CompletionRequest, response: CompletionResponse) -> None:
        key = request.key
        path = self.path(key)
        entry = {"key": key, "request": request.dict(), "response": response.dict(exclude={"cached"})}
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with self._lock:
                if path.exists():
                    return
                fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
                os.close(fd)
                srsly.write_json(tmp, entry)
                os.replace(tmp, path)
                with self.index_path.open("a", encoding="utf8") as f:
                    f.write(srsly.json_dumps({"key": key, "model": request.model}) + "\n")
        except OSError as err:
            raise CacheWriteError(f"could not store completion {key[:12]} under {self.root}: {err}") from err

    def __len__(self) -> int:
        return len(self.keys())

    def keys(self) -> list:
        if not self.index_path.exists():
            return []
        return (
            LazyLines(srsly.read_jsonl(self.index_path))
            .keep(lambda d: self.path(d["key"]).exists())
            .map(lambda d: d["key"])
            .collect()
        )


class TransientBackendError(BackendError):
    """Rate limits and server errors; retried."""


class CompletionClient:
    """Completion endpoint client. Requests are cached; transport failures are retried."""

    name = "llm"

    def __init__(
        self,
        config: BackendConfig = CONFIG.backend,
        cache: Optional[ResponseCache] = None,
        api_key: Optional[str] = None,
        base_url: Optional[str] = None,
        model: Optional[str] = None,
        transport: Optional[httpx.BaseTransport] = None,
    ) -> None:
        from dotenv import load_dotenv

        load_dotenv()
        self.config = config
        self.model = model or config.model
        self.cache = cache if cache is not None else ResponseCache()
        self.api_key = api_key or os.getenv("STABLEQA_API_KEY") or os.getenv("OPENAI_API_KEY")
        base_url = base_url or os.getenv("STABLEQA_BASE_URL") or config.base_url
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        self.http = httpx.Client(base_url=base_url, headers=headers, timeout=config.timeout, transport=transport)
        self.calls = 0
        self._post = retry(
            exceptions=(httpx.TransportError, TransientBackendError),
            tries=config.retries,
            delay=1,
            backoff=2,
            jitter=(0, 1),
        )(self._post_once)

    def request(self, prompt: str) -> CompletionRequest:
        return CompletionRequest(
            model=self.model,
            prompt=prompt,
            temperature=self.config.temperature,
            max_tokens=self.config.max_tokens,
            stop=self.config.stop,
        )

    def complete(self, prompt: str) -> CompletionResponse:
        req = self.request(prompt)
        hit = self.cache.get(req)
        if hit is not None:
            return hit
        if not self.api_key and "api.openai.com" in str(self.http.base_url):
            raise BackendError("no API key: set STABLEQA_API_KEY or warm the cache")
        try:
            response = self._post(req)
        except httpx.TransportError as err:
            raise BackendError(f"completion endpoint unreachable: {err}") from err
        self.cache.put(req, response)
        return response

    def _post_once(self, req: CompletionRequest) -> CompletionResponse:
        self.calls += 1
        resp = self.http.post("/completions", json=req.dict())
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientBackendError(f"completion endpoint returned {resp.status_code}", status=resp.status_code)
        if resp.status_code >= 400:
            raise BackendError(f"completion endpoint returned {resp.status_code}: {resp.text[:200]}", status=resp.status_code)
        body = resp.json()
        choices = body.get("choices") or [{}]
        return CompletionResponse(
            text=choices[0].get("text", ""),
            model=body.get("model", req.model),
            usage={k: v for k, v in (body.get("usage") or {}).items() if isinstance(v, int)},
        )

    def respond(self, template: str, text: str) -> str:
        return self.complete(render_prompt(template, text)).text

    def close(self) -> None:
        self.http.close()


class OracleBackend:
    """Answers with what the template-based parser reads from the input."""

    name = "oracle"

    def __init__(self) -> None:
        self.calls = 0

    def respond(self, template: str, text: str) -> str:
        self.calls += 1
        return oracle_response(template, text)


class ReplayBackend:
    """Canned completions keyed by input text, falling back to another backend.

    Without a fallback an unknown input gets an empty completion.
    """

    name = "replay"

    def __init__(
        self,
        responses: Union[Dict[str, str], Callable[[str, str], Optional[str]]],
        fallback=None,
    ) -> None:
        self.responses = responses
        self.fallback = fallback
        self.calls = 0

    def respond(self, template: str, text: str) -> str:
        self.calls += 1
        if callable(self.responses):
            reply = self.responses(template, text)
        else:
            reply = self.responses.get(text)
        if reply is not None:
            return reply
        if self.fallback is not None:
            return self.fallback.respond(template, text)
        console.log(f"No canned completion for [bold]{text[:40]}[/bold]")
        return ""


def make_backend(mode: str, model: Optional[str] = None, cache_dir: Optional[str] = None, replay: Optional[str] = None):
    """Backend for a parser mode: ``oracle``, ``llm`` or ``replay`` (a JSONL file of input/response)."""
    if mode == "oracle":
        return OracleBackend()
    if mode == "llm":
        cache = ResponseCache(cache_dir) if cache_dir else None
        return CompletionClient(model=model, cache=cache)
    if mode == "replay":
        responses = {} if replay is None else {d["input"]: d["response"] for d in srsly.read_jsonl(replay)}
        return ReplayBackend(responses, fallback=OracleBackend())
    raise ValueError(f"unknown parser mode {mode!r}")
