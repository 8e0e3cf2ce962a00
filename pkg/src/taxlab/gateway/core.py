"""Chat-completions transport with retries, admission control, and a
JSON-lines transcript. A seeded mock backend stands in for a live server so
simulations replay byte-for-byte offline."""

import json
import os
import threading
import time
from dataclasses import dataclass, field

import requests


class GatewayError(Exception):
    """Base for transport failures."""


class ExhaustedRetries(GatewayError):
    """Ran out of retry budget on timeouts or server errors."""


class AuthFailure(GatewayError):
    """API key missing from the environment or rejected by the server."""


class MalformedResponse(GatewayError):
    """Server answered but not in chat-completions shape."""


@dataclass(frozen=True)
class ChatRequest:
    model: str
    system_prompt: str
    user_prompt: str
    temperature: float = 0.7
    max_tokens: int = 512
    request_id: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must be in [0, 2], got %r" % (self.temperature,))
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("prompts must be nonempty")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = ""
    api_key_env_var: str = "TAXLAB_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 8
    backend: str = "MOCK"
    backoff_base: float = 0.5
    backoff_factor: float = 2.0
    model: str = "mock-model"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.backend not in ("MOCK", "HTTP"):
            raise ValueError("backend must be MOCK or HTTP, got %r" % (self.backend,))
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def to_dict(self):
        return {
            "base_url": self.base_url,
            "api_key_env_var": self.api_key_env_var,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "max_in_flight": self.max_in_flight,
            "backend": self.backend,
            "backoff_base": self.backoff_base,
            "backoff_factor": self.backoff_factor,
            "model": self.model,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(**payload)


class Transcript:
    """Append-only JSON-lines record of every (request, reply) pair."""

    def __init__(self, path):
        self.path = str(path)
        self._lock = threading.Lock()

    def append(self, record):
        line = json.dumps(record)
        with self._lock:
            with open(self.path, "a") as fh:
                fh.write(line + "\n")

    @staticmethod
    def read(path):
        out = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out


class Gateway:
    """One logical connection: enforces max_in_flight across threads and
    funnels every exchange into the transcript (when configured)."""

    def __init__(self, config, mock_policy=None, transcript_path=None):
        self.config = config
        self.mock_policy = mock_policy
        self.transcript = Transcript(transcript_path) if transcript_path else None
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        self._session = requests.Session() if config.backend == "HTTP" else None
        if config.backend == "MOCK" and mock_policy is None:
            raise ValueError("MOCK backend needs a mock policy")

    def chat(self, request):
        with self._slots:
            started = time.perf_counter()
            if self.config.backend == "MOCK":
                from .mock import mock_chat
                reply, attempts = mock_chat(request, self.mock_policy), 1
            else:
                reply, attempts = self._chat_http(request)
            if self.transcript is not None:
                self.transcript.append({
                    "request_id": request.request_id,
                    "model": request.model,
                    "system_prompt": request.system_prompt,
                    "user_prompt": request.user_prompt,
                    "temperature": request.temperature,
                    "max_tokens": request.max_tokens,
                    "reply": reply,
                    "attempts": attempts,
                    "seconds": time.perf_counter() - started,
                })
            return reply

    def _chat_http(self, request):
        cfg = self.config
        key = os.environ.get(cfg.api_key_env_var)
        if not key:
            raise AuthFailure(
                "environment variable %s is not set" % (cfg.api_key_env_var,))
        payload = {
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": "Bearer %s" % key,
                   "Content-Type": "application/json"}
        last_error = None
        for attempt in range(cfg.max_retries + 1):
            if attempt > 0:
                time.sleep(cfg.backoff_base * cfg.backoff_factor ** (attempt - 1))
            try:
                resp = self._session.post(cfg.base_url, json=payload,
                                          headers=headers, timeout=cfg.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
                continue
            if resp.status_code in (401, 403):
                raise AuthFailure("server rejected credentials (%d)" % resp.status_code)
            if resp.status_code >= 500:
                last_error = RuntimeError("server error %d" % resp.status_code)
                continue
            if resp.status_code != 200:
                raise MalformedResponse(
                    "unexpected status %d: %s" % (resp.status_code, resp.text[:200]))
            try:
                body = resp.json()
                content = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse("missing choices[0].message.content") from exc
            if not isinstance(content, str):
                raise MalformedResponse("content is not text")
            return content, attempt + 1
        raise ExhaustedRetries(
            "gave up after %d attempts: %r" % (cfg.max_retries + 1, last_error))


def chat(request, config, mock_policy=None, transcript_path=None):
    """One-shot convenience wrapper; long-lived callers should hold a
    Gateway so the in-flight bound spans requests."""
    return Gateway(config, mock_policy=mock_policy,
                   transcript_path=transcript_path).chat(request)
