"""Event-sourced record of one evaluation session.

A session is an append-only list of events: it opens, attempts are started,
queries are sent, each query resolves to either a response or a server-busy,
resolved attempts get outcome tags, and the session closes. Every statistic
the index family needs (attempts Q, queries N, SB count, latencies) is derived
from the event list, and the list itself is the audit artifact, persisted as
JSON Lines.

Event legality is enforced by a state machine at append time:

    opened -> attempt_started -> query_sent -> {response_received | sb_detected}
           -> {query_sent | outcome_tagged} -> ...

An ``accepted`` outcome terminates the session (only ``session_closed`` may
follow); rejected outcomes allow a new attempt. A session may not close while
a query is unresolved or an attempt has no query yet.

One writer per log; saved logs may be read concurrently.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

SCHEMA_VERSION = 1

EVENT_KINDS = (
    "session_opened",
    "attempt_started",
    "query_sent",
    "response_received",
    "sb_detected",
    "outcome_tagged",
    "session_closed",
)

OUTCOME_TAGS = (
    "accepted",
    "rejected_wrong_output",
    "rejected_runtime_error",
    "rejected_misunderstood",
)

# session states, as seen by the state machine
_OPENED = "opened"            # no attempt yet, or nothing since opening
_IN_ATTEMPT = "in_attempt"    # attempt started, no query sent yet
_PENDING = "pending"          # query sent, unresolved
_ANSWERED = "answered"        # last query got a response
_BUSY = "busy"                # last query got a server-busy
_TAGGED = "tagged"            # last attempt's outcome recorded (non-accepted)
_ACCEPTED = "accepted"        # accepted outcome recorded, session must close
_CLOSED = "closed"

_TRANSITIONS: dict[str, tuple[str, ...]] = {
    "attempt_started": (_OPENED, _TAGGED),
    "query_sent": (_IN_ATTEMPT, _ANSWERED, _BUSY),
    "response_received": (_PENDING,),
    "sb_detected": (_PENDING,),
    "outcome_tagged": (_ANSWERED, _BUSY),
    "session_closed": (_OPENED, _ANSWERED, _BUSY, _TAGGED, _ACCEPTED),
}


class SessionStateError(Exception):
    """An event was appended that the session state machine forbids."""


class SessionFormatError(Exception):
    """A persisted session log failed to parse or violated an invariant."""


def _utc_now_ms() -> str:
    now = datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%S.") + f"{now.microsecond // 1000:03d}Z"


_TS_FORMAT = "%Y-%m-%dT%H:%M:%S.%fZ"


def _parse_ts(ts: str) -> datetime:
    try:
        return datetime.strptime(ts, _TS_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise SessionFormatError(f"bad timestamp {ts!r}: {exc}") from None


def response_hash(text: str) -> str:
    """Stable content hash of a response body, for redacted log sharing."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    ts: str
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            ensure_ascii=False,
        )


@dataclass
class SessionLog:
    session_id: str
    framework_label: str
    task_label: str
    events: list[SessionEvent] = field(default_factory=list)

    @property
    def state(self) -> str:
        return _replay_state(self.events)

    @property
    def closed(self) -> bool:
        return self.state == _CLOSED


def _replay_state(events: Iterable[SessionEvent]) -> str:
    state = None
    for ev in events:
        state = _next_state(state, ev.kind, ev.payload)
    if state is None:
        raise SessionStateError("session has no events")
    return state


def _next_state(state: str | None, kind: str, payload: dict) -> str:
    if kind not in EVENT_KINDS:
        raise SessionStateError(f"unknown event kind {kind!r}")
    if state is None:
        if kind != "session_opened":
            raise SessionStateError(f"first event must be session_opened, got {kind!r}")
        return _OPENED
    if kind == "session_opened":
        raise SessionStateError("session_opened may only appear once, as the first event")
    if state == _CLOSED:
        raise SessionStateError(f"cannot append {kind!r}: session is closed")
    if state not in _TRANSITIONS[kind]:
        raise SessionStateError(f"{kind!r} is illegal in state {state!r}")
    if kind == "outcome_tagged":
        tag = payload.get("tag")
        if tag not in OUTCOME_TAGS:
            raise SessionStateError(f"unknown outcome tag {tag!r}")
        return _ACCEPTED if tag == "accepted" else _TAGGED
    return {
        "attempt_started": _IN_ATTEMPT,
        "query_sent": _PENDING,
        "response_received": _ANSWERED,
        "sb_detected": _BUSY,
        "session_closed": _CLOSED,
    }[kind]


def can_append(log: SessionLog, kind: str, payload: dict | None = None) -> bool:
    """True when ``append`` would accept this event in the current state."""
    try:
        _next_state(_replay_state(log.events), kind, dict(payload or {}))
        return True
    except SessionStateError:
        return False


def open_session(framework_label: str, task_label: str) -> SessionLog:
    """Start a new session log with its opening event."""
    if not framework_label:
        raise ValueError("framework_label must be nonempty")
    if not task_label:
        raise ValueError("task_label must be nonempty")
    session_id = uuid.uuid4().hex
    log = SessionLog(session_id=session_id, framework_label=framework_label, task_label=task_label)
    log.events.append(
        SessionEvent(
            seq=1,
            ts=_utc_now_ms(),
            kind="session_opened",
            payload={
                "schema": SCHEMA_VERSION,
                "session_id": session_id,
                "framework_label": framework_label,
                "task_label": task_label,
            },
        )
    )
    return log


def append(log: SessionLog, kind: str, payload: dict | None = None) -> SessionEvent:
    """Append an event if the state machine allows it in the current state.

    Payload requirements: ``query_sent`` needs ``prompt``; ``response_received``
    needs a positive ``latency_s`` plus ``text`` (its ``sha256`` is filled in
    automatically); ``outcome_tagged`` needs a known ``tag``.
    """
    payload = dict(payload or {})
    state = _replay_state(log.events)
    if kind == "query_sent" and "prompt" not in payload:
        raise ValueError("query_sent payload requires 'prompt'")
    if kind == "response_received":
        latency = payload.get("latency_s")
        if not isinstance(latency, (int, float)) or latency <= 0:
            raise ValueError("response_received payload requires latency_s > 0")
        if "text" not in payload:
            raise ValueError("response_received payload requires 'text'")
        payload.setdefault("sha256", response_hash(payload["text"]))
    _next_state(state, kind, payload)  # raises on illegal transition

    prev = log.events[-1]
    ts = _utc_now_ms()
    if ts < prev.ts:
        ts = prev.ts  # wall clock stepped back; keep timestamps non-decreasing
    event = SessionEvent(seq=prev.seq + 1, ts=ts, kind=kind, payload=payload)
    log.events.append(event)
    return event


def derive_stats(log: SessionLog, require_complete: bool = True):
    """Distill SessionStats from the event list.

    Attempts are counted from ``attempt_started`` events, queries from
    ``query_sent``, server-busy responses from ``sb_detected``; response times
    come from the ``latency_s`` of each ``response_received``. Requires a
    closed session unless ``require_complete`` is False.
    """
    from .indices import SessionStats

    state = _replay_state(log.events)  # validates ordering
    if require_complete and state != _CLOSED:
        raise SessionStateError(f"session is not complete (state {state!r})")
    attempts = sum(1 for ev in log.events if ev.kind == "attempt_started")
    queries = sum(1 for ev in log.events if ev.kind == "query_sent")
    sb = sum(1 for ev in log.events if ev.kind == "sb_detected")
    if attempts == 0 or queries == 0:
        raise SessionStateError("session recorded no attempts or queries")
    times = tuple(
        float(ev.payload["latency_s"]) for ev in log.events if ev.kind == "response_received"
    )
    sb_times = tuple(
        float(ev.payload["wait_s"])
        for ev in log.events
        if ev.kind == "sb_detected" and "wait_s" in ev.payload
    )
    if sb_times and len(sb_times) != sb:
        sb_times = ()  # only usable when every SB event recorded its wait
    return SessionStats(
        attempts_q=attempts,
        total_queries_n=queries,
        sb_count=sb,
        response_times_s=times,
        sb_wait_times_s=sb_times,
    )


def live_counters(log: SessionLog) -> dict:
    """Raw counters for an in-flight session; no completeness requirement."""
    _replay_state(log.events)
    return {
        "attempts_q": sum(1 for ev in log.events if ev.kind == "attempt_started"),
        "total_queries_n": sum(1 for ev in log.events if ev.kind == "query_sent"),
        "sb_count": sum(1 for ev in log.events if ev.kind == "sb_detected"),
        "response_times_s": [
            float(ev.payload["latency_s"])
            for ev in log.events
            if ev.kind == "response_received"
        ],
        "state": log.state,
    }


def save(log: SessionLog, path: str | Path) -> Path:
    """Write the log as JSON Lines, one event per line."""
    path = Path(path)
    _replay_state(log.events)
    lines = [ev.to_line() for ev in log.events]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load(path: str | Path) -> SessionLog:
    """Read a JSON Lines session log, validating every invariant.

    Raises SessionFormatError naming the offending line for malformed JSON,
    sequence gaps, timestamp regressions and state-machine violations.
    """
    path = Path(path)
    events: list[SessionEvent] = []
    state: str | None = None
    prev_seq = 0
    prev_ts = ""
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                raise SessionFormatError(f"{path}:{lineno}: blank line in event log")
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SessionFormatError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            missing = {"seq", "ts", "kind", "payload"} - set(record)
            if missing:
                raise SessionFormatError(f"{path}:{lineno}: missing fields {sorted(missing)}")
            seq, ts, kind, payload = record["seq"], record["ts"], record["kind"], record["payload"]
            if not isinstance(payload, dict):
                raise SessionFormatError(f"{path}:{lineno}: payload must be an object")
            if seq != prev_seq + 1:
                raise SessionFormatError(
                    f"{path}:{lineno}: seq {seq} breaks the sequence (expected {prev_seq + 1})"
                )
            _parse_ts(ts)
            if prev_ts and ts < prev_ts:
                raise SessionFormatError(f"{path}:{lineno}: timestamp {ts} precedes {prev_ts}")
            try:
                state = _next_state(state, kind, payload)
            except SessionStateError as exc:
                raise SessionFormatError(f"{path}:{lineno}: {exc}") from None
            events.append(SessionEvent(seq=seq, ts=ts, kind=kind, payload=payload))
            prev_seq, prev_ts = seq, ts
    if not events:
        raise SessionFormatError(f"{path}: empty session log")
    opener = events[0].payload
    if opener.get("schema") != SCHEMA_VERSION:
        raise SessionFormatError(
            f"{path}:1: unsupported schema version {opener.get('schema')!r}"
        )
    return SessionLog(
        session_id=opener.get("session_id", ""),
        framework_label=opener.get("framework_label", ""),
        task_label=opener.get("task_label", ""),
        events=events,
    )
