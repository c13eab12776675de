"""Provider-agnostic chat-completion client.

One client instance serves one role (generation, synthesis, anonymize,
attack). Responses cache on disk keyed by a content hash of (model,
temperature, seed, attempt, prompt); cache writes are atomic so
concurrent workers never read torn files. A replay bundle swaps the
network for canned prompt-hash -> response pairs, giving byte-stable
offline runs. API keys resolve from a named environment variable only;
they are never read from config values.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)


class ClientConfigError(ValueError):
    pass


class ClientHTTPError(RuntimeError):
    """Non-retryable HTTP failure (4xx) from the completion endpoint."""


class ClientTransportError(RuntimeError):
    """Transport or server failure that survived the retry budget."""


class ReplayMissError(KeyError):
    """The replay bundle holds no response for a requested prompt."""


@dataclass(frozen=True)
class ClientConfig:
    backend: str = "http"  # http | mock | replay
    base_url: str = ""
    model: str = ""
    api_key_env: str = ""
    temperature: float = 0.0
    seed: int | None = None
    max_retries: int = 3
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 30.0
    requests_per_minute: int | None = None
    timeout_s: float = 120.0
    cache_dir: str | None = None

    def __post_init__(self):
        if self.backend not in ("http", "mock", "replay"):
            raise ClientConfigError(f"unknown client backend {self.backend!r}")


def prompt_key(prompt: str) -> str:
    """Replay bundles key on the prompt content alone."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def load_bundle(path: str | Path) -> dict[str, str]:
    bundle: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                bundle[record["key"]] = record["response"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed bundle line: {exc}") from exc
    return bundle


class LLMClient:
    """complete(prompt) -> response text, with cache, retries and rate cap."""

    def __init__(self, config: ClientConfig, responder=None, bundle: dict[str, str] | None = None,
                 session=None):
        self.config = config
        self._responder = responder
        self._bundle = bundle
        self._session = session
        self._tls = threading.local()
        self._rate_lock = threading.Lock()
        self._last_request = 0.0
        if config.backend == "mock" and responder is None:
            raise ClientConfigError("mock backend needs a responder callable")
        if config.backend == "replay" and bundle is None:
            raise ClientConfigError("replay backend needs a loaded bundle")
        if config.backend == "http":
            if not config.base_url or not config.model:
                raise ClientConfigError("http backend needs base_url and model")
            if not config.api_key_env:
                raise ClientConfigError("http backend needs api_key_env naming the key variable")
            if os.environ.get(config.api_key_env) is None:
                raise ClientConfigError(f"environment variable {config.api_key_env} is not set")

    # -- usage accounting ------------------------------------------------

    def thread_usage(self) -> tuple[int, int]:
        """(prompt_tokens, completion_tokens) consumed by the calling thread."""
        return (getattr(self._tls, "prompt", 0), getattr(self._tls, "completion", 0))

    def _count(self, prompt_tokens: int, completion_tokens: int) -> None:
        self._tls.prompt = getattr(self._tls, "prompt", 0) + prompt_tokens
        self._tls.completion = getattr(self._tls, "completion", 0) + completion_tokens

    # -- cache -----------------------------------------------------------

    def _cache_key(self, prompt: str, attempt: int) -> str:
        material = "\x1f".join(
            (self.config.model, repr(self.config.temperature), repr(self.config.seed), str(attempt), prompt)
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _cache_path(self, key: str) -> Path | None:
        if not self.config.cache_dir:
            return None
        return Path(self.config.cache_dir) / f"{key}.json"

    def _cache_read(self, key: str) -> dict | None:
        path = self._cache_path(key)
        if path is None or not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError):
            log.warning("dropping unreadable cache file %s", path)
            return None

    def _cache_write(self, key: str, record: dict) -> None:
        path = self._cache_path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record, fh, ensure_ascii=False)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- rate limiting ---------------------------------------------------

    def _throttle(self) -> None:
        if not self.config.requests_per_minute:
            return
        interval = 60.0 / self.config.requests_per_minute
        with self._rate_lock:
            wait = self._last_request + interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    # -- backends --------------------------------------------------------

    def _http_call(self, prompt: str) -> tuple[str, int, int]:
        import requests

        session = self._session
        if session is None:
            session = requests.Session()
            self._session = session
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        if self.config.seed is not None:
            payload["seed"] = self.config.seed
        headers = {"Authorization": f"Bearer {os.environ[self.config.api_key_env]}"}
        last_exc: Exception | None = None
        for retry in range(self.config.max_retries + 1):
            self._throttle()
            try:
                resp = session.post(url, json=payload, headers=headers, timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                last_exc = exc
            else:
                if 400 <= resp.status_code < 500:
                    raise ClientHTTPError(f"completion endpoint returned {resp.status_code}: {resp.text[:200]}")
                if resp.status_code >= 500:
                    last_exc = ClientTransportError(f"server returned {resp.status_code}")
                else:
                    body = resp.json()
                    text = body["choices"][0]["message"]["content"]
                    usage = body.get("usage", {})
                    return (
                        text,
                        int(usage.get("prompt_tokens", len(prompt.split()))),
                        int(usage.get("completion_tokens", len(text.split()))),
                    )
            if retry < self.config.max_retries:
                delay = min(self.config.backoff_cap_s, self.config.backoff_base_s * (2.0**retry))
                time.sleep(delay)
        raise ClientTransportError(
            f"completion request failed after {self.config.max_retries + 1} attempts: {last_exc}"
        )

    def complete(self, prompt: str, stage: str = "", attempt: int = 0) -> str:
        """Return the model response for one prompt.

        `attempt` distinguishes intentional regenerations of the same
        prompt in the cache; replay lookups ignore it because a bundle
        stores the one response the run should see.
        """
        cfg = self.config
        key = self._cache_key(prompt, attempt)
        cached = self._cache_read(key)
        if cached is not None:
            self._count(cached.get("prompt_tokens", 0), cached.get("completion_tokens", 0))
            log.debug("cache hit stage=%s tokens=%s/%s", stage, cached.get("prompt_tokens"), cached.get("completion_tokens"))
            return cached["response"]
        if cfg.backend == "replay":
            pkey = prompt_key(prompt)
            if pkey not in self._bundle:
                raise ReplayMissError(
                    f"replay bundle has no response for stage {stage!r} (prompt {pkey[:12]}..., attempt {attempt})"
                )
            text = self._bundle[pkey]
            p_tok, c_tok = len(prompt.split()), len(text.split())
        elif cfg.backend == "mock":
            text = self._responder(prompt, stage=stage, attempt=attempt)
            p_tok, c_tok = len(prompt.split()), len(text.split())
        else:
            text, p_tok, c_tok = self._http_call(prompt)
        self._count(p_tok, c_tok)
        log.info("completion stage=%s backend=%s prompt_tokens=%d completion_tokens=%d", stage, cfg.backend, p_tok, c_tok)
        self._cache_write(key, {"response": text, "prompt_tokens": p_tok, "completion_tokens": c_tok})
        return text


@dataclass
class BundleRecorder:
    """Wrap a client and collect (prompt-hash -> response) pairs for a bundle."""

    inner: LLMClient
    records: dict[str, dict] = field(default_factory=dict)

    def complete(self, prompt: str, stage: str = "", attempt: int = 0) -> str:
        response = self.inner.complete(prompt, stage=stage, attempt=attempt)
        key = prompt_key(prompt)
        self.records[key] = {
            "key": key,
            "stage": stage,
            "prompt_head": prompt[:80],
            "response": response,
        }
        return response

    def thread_usage(self) -> tuple[int, int]:
        return self.inner.thread_usage()

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self.records):
                fh.write(json.dumps(self.records[key], ensure_ascii=False, sort_keys=True) + "\n")


def build_client(
    raw: dict,
    responder=None,
    bundle_path: str | Path | None = None,
) -> LLMClient:
    """Construct a client from a config mapping, honoring a replay override."""
    cfg = dict(raw)
    if bundle_path is not None:
        cfg["backend"] = "replay"
    config = ClientConfig(**cfg)
    bundle = load_bundle(bundle_path) if bundle_path is not None else None
    return LLMClient(config, responder=responder, bundle=bundle)
