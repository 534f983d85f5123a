"""Timed client for chat-completions style model endpoints.

Measures the wall time between dispatching a query and receiving the complete
(non-streamed) response on a monotonic clock, and classifies the outcome as an
answer, a server-busy condition (overload status or timeout), or a transport
error. ``run_scripted_session`` drives a whole session from a list of prompts,
recording every event into a session log.

The HTTP transport and the clock are injectable so tests can script exact
fault sequences and latencies without a network or real waiting; see
``ScriptedEndpoint``.

Credentials are taken from the environment variable named by the endpoint
spec and are never written to logs or config files.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Callable, Sequence
from urllib.parse import urlparse

import httpx

from . import session as session_mod
from .session import SessionLog

# Status codes treated as overload. 429 is rate limiting, 503 service
# overload, 529 the "overloaded" code some model providers use.
SERVER_BUSY_CODES = frozenset({429, 503, 529})

ANSWER_ELIGIBLE = "answer-eligible"
SERVER_BUSY = "server_busy"
TRANSPORT_ERROR = "transport_error"
ANSWER = "answer"


class EndpointError(Exception):
    """Invalid endpoint specification or conversation."""


class ScriptedSessionError(Exception):
    """A scripted session aborted on a transport failure.

    Carries the partial session log for forensics; the log still has the
    failed query pending, since a transport error is a harness-side failure,
    not a framework response.
    """

    def __init__(self, message: str, log: SessionLog):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class EndpointSpec:
    """Where and how to reach one chat-completions-compatible endpoint."""

    base_url: str
    model_name: str
    api_key_ref: str = ""
    timeout_s: float = 300.0
    max_retries_sb: int = 2

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise EndpointError(f"timeout_s must be > 0, got {self.timeout_s}")
        if self.max_retries_sb < 0:
            raise EndpointError(f"max_retries_sb must be >= 0, got {self.max_retries_sb}")
        parsed = urlparse(self.base_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise EndpointError(f"base_url is not a valid http(s) URL: {self.base_url!r}")

    def to_dict(self) -> dict:
        return {
            "base_url": self.base_url,
            "model_name": self.model_name,
            "api_key_ref": self.api_key_ref,
            "timeout_s": self.timeout_s,
            "max_retries_sb": self.max_retries_sb,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EndpointSpec":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass(frozen=True)
class TimedResponse:
    """One query's outcome: full-response latency plus classification."""

    latency_s: float
    status: str  # answer | server_busy | transport_error
    text: str | None = None
    detail: str | None = None

    def __post_init__(self) -> None:
        if (self.status == ANSWER) != (self.text is not None):
            raise ValueError("text must be present exactly when status is 'answer'")


def classify_sb(status_code: int | None) -> str:
    """Classify an exchange by status code; ``None`` means the request timed out.

    Overload codes and timeouts are server-busy, 2xx answer-eligible, anything
    else a transport error. Total over all integers.
    """
    if status_code is None:
        return SERVER_BUSY
    if status_code in SERVER_BUSY_CODES:
        return SERVER_BUSY
    if 200 <= status_code < 300:
        return ANSWER_ELIGIBLE
    return TRANSPORT_ERROR


def send_query(
    endpoint: EndpointSpec,
    conversation: Sequence[tuple[str, str]],
    *,
    transport: httpx.BaseTransport | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> TimedResponse:
    """POST the conversation to the endpoint and time the complete exchange.

    The conversation is an ordered list of ``(role, text)`` pairs ending with
    a user turn. Latency covers request dispatch to last byte of the body on
    the supplied monotonic clock, so wall-clock regressions cannot produce
    negative values.
    """
    if not conversation:
        raise EndpointError("conversation must be nonempty")
    if conversation[-1][0] != "user":
        raise EndpointError("conversation must end with a user turn")

    headers = {"Content-Type": "application/json"}
    if endpoint.api_key_ref:
        key = os.environ.get(endpoint.api_key_ref)
        if key:
            headers["Authorization"] = f"Bearer {key}"
    body = {
        "model": endpoint.model_name,
        "messages": [{"role": role, "content": text} for role, text in conversation],
        "stream": False,
    }
    url = endpoint.base_url.rstrip("/") + "/chat/completions"

    start = clock()
    try:
        with httpx.Client(transport=transport, timeout=endpoint.timeout_s) as client:
            response = client.post(url, json=body, headers=headers)
            response.read()
    except httpx.TimeoutException:
        latency = max(clock() - start, 1e-9)
        return TimedResponse(
            latency_s=latency,
            status=SERVER_BUSY,
            detail=f"no response within {endpoint.timeout_s} s",
        )
    except httpx.HTTPError as exc:
        latency = max(clock() - start, 1e-9)
        return TimedResponse(
            latency_s=latency, status=TRANSPORT_ERROR, detail=f"{type(exc).__name__}: {exc}"
        )
    latency = max(clock() - start, 1e-9)

    verdict = classify_sb(response.status_code)
    if verdict == SERVER_BUSY:
        return TimedResponse(
            latency_s=latency, status=SERVER_BUSY, detail=f"HTTP {response.status_code}"
        )
    if verdict == TRANSPORT_ERROR:
        return TimedResponse(
            latency_s=latency,
            status=TRANSPORT_ERROR,
            detail=f"HTTP {response.status_code}: {response.text[:200]}",
        )
    try:
        text = response.json()["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        return TimedResponse(
            latency_s=latency,
            status=TRANSPORT_ERROR,
            detail=f"unparseable completion body: {exc}",
        )
    return TimedResponse(latency_s=latency, status=ANSWER, text=text)


def run_scripted_session(
    endpoint: EndpointSpec,
    script: Sequence[str],
    framework_label: str,
    task_label: str = "scripted",
    *,
    final_tag: str = "accepted",
    transport: httpx.BaseTransport | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> SessionLog:
    """Run every prompt of the script as one attempt and log the whole session.

    Within an attempt, server-busy responses are retried up to the endpoint's
    ``max_retries_sb``; each retry is a new query. Conversation context
    accumulates across attempts. Non-final attempts are tagged as
    ``rejected_misunderstood`` placeholders, the final one with ``final_tag``.
    Exhausted retries close the session with a failure marker; a transport
    error raises ScriptedSessionError carrying the partial log.
    """
    if not script:
        raise EndpointError("script must contain at least one prompt")
    if final_tag not in session_mod.OUTCOME_TAGS:
        raise ValueError(f"unknown final_tag {final_tag!r}")

    log = session_mod.open_session(framework_label, task_label)
    conversation: list[tuple[str, str]] = []
    for idx, prompt in enumerate(script):
        last = idx == len(script) - 1
        session_mod.append(log, "attempt_started", {"attempt": idx + 1})
        conversation.append(("user", prompt))
        answer = None
        for trial in range(endpoint.max_retries_sb + 1):
            session_mod.append(log, "query_sent", {"prompt": prompt})
            result = send_query(endpoint, conversation, transport=transport, clock=clock)
            if result.status == ANSWER:
                answer = result
                session_mod.append(
                    log,
                    "response_received",
                    {"latency_s": result.latency_s, "text": result.text},
                )
                break
            if result.status == SERVER_BUSY:
                session_mod.append(
                    log,
                    "sb_detected",
                    {"wait_s": result.latency_s, "detail": result.detail or ""},
                )
                continue
            raise ScriptedSessionError(
                f"transport failure on attempt {idx + 1}: {result.detail}", log
            )
        if answer is None:
            session_mod.append(
                log, "session_closed", {"status": "failed", "reason": "sb retries exhausted"}
            )
            return log
        conversation.append(("assistant", answer.text or ""))
        tag = final_tag if last else "rejected_misunderstood"
        session_mod.append(log, "outcome_tagged", {"tag": tag})
    session_mod.append(log, "session_closed", {"status": "completed"})
    return log


class ScriptedEndpoint:
    """Mock endpoint: an ordered fault/latency script plus a fake clock.

    Each script step is ``{"delay_ms": int, "status": int, "body": str}``; the
    body is served verbatim as the completion text for 2xx statuses. The
    transport advances the fake clock by the step's delay, so scripted
    latencies are observed by ``send_query`` without real waiting. A step
    whose ``status`` is the string ``"timeout"`` raises a timeout after
    advancing the clock.
    """

    def __init__(self, steps: Sequence[dict]):
        self._steps = list(steps)
        self._cursor = 0
        self._now = 0.0

    def clock(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += seconds

    def _handler(self, request: httpx.Request) -> httpx.Response:
        if self._cursor >= len(self._steps):
            raise AssertionError("scripted endpoint exhausted")
        step = self._steps[self._cursor]
        self._cursor += 1
        self._now += step.get("delay_ms", 0) / 1000.0
        status = step["status"]
        if status == "timeout":
            raise httpx.ReadTimeout("scripted timeout", request=request)
        if 200 <= status < 300:
            payload = {"choices": [{"message": {"role": "assistant", "content": step.get("body", "")}}]}
            return httpx.Response(status, json=payload)
        return httpx.Response(status, text=step.get("body", ""))

    @property
    def transport(self) -> httpx.MockTransport:
        return httpx.MockTransport(self._handler)
