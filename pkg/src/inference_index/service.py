"""Local HTTP API that lets the human console drive a live evaluation.

Exposes sessions, prompt proxying, outcome tagging, prediction upload,
index evaluation and cross-framework comparison as REST-style JSON. The
service never executes LLM-generated code: predictions are produced
out-of-band and uploaded as per-variable arrays.

State is file-backed: every session log is rewritten to
``data_dir/sessions/<id>.jsonl`` after each event, uploads live in
``data_dir/predictions/<id>.json``. Requests within one session are
serialized by a per-session lock; different sessions are independent.

A prompt whose exchange fails at the transport level is NOT recorded as a
query: it never reached the framework, so it belongs to neither the answered
nor the server-busy count. The error comes back to the caller instead.

Error responses always carry ``{"code", "message", "detail"}``.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Callable

import httpx
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import llm_client, session as session_mod
from .config import HarnessConfig
from .indices import evaluate
from .metrics import MetricReport, metric_report
from .report import (
    METRIC_FIELDS,
    FrameworkResult,
    comparison_table,
    jsonable,
    mape_average,
    ranking_table,
)
from .session import SessionLog, SessionStateError


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class _SessionRuntime:
    def __init__(self, log: SessionLog):
        self.log = log
        self.lock = threading.Lock()
        self.metric_reports: dict[str, MetricReport] | None = None


class CreateSessionBody(BaseModel):
    framework_label: str
    task_label: str


class PromptBody(BaseModel):
    text: str
    new_attempt: bool = True


class OutcomeBody(BaseModel):
    tag: str


class PredictionsBody(BaseModel):
    predictions: dict[str, list[float]]
    truth: dict[str, list[float]]


def create_app(
    config: HarnessConfig,
    *,
    transport: httpx.BaseTransport | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    """Build the service app. Tests inject a mock transport and fake clock."""
    app = FastAPI(title="inference-index service")
    sessions: dict[str, _SessionRuntime] = {}
    cfg = config.index

    sessions_dir = Path(config.service.data_dir) / "sessions"
    uploads_dir = Path(config.service.data_dir) / "predictions"
    sessions_dir.mkdir(parents=True, exist_ok=True)
    uploads_dir.mkdir(parents=True, exist_ok=True)

    def runtime(session_id: str) -> _SessionRuntime:
        try:
            return sessions[session_id]
        except KeyError:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}") from None

    def persist(rt: _SessionRuntime) -> None:
        session_mod.save(rt.log, sessions_dir / f"{rt.log.session_id}.jsonl")

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "bad_request", "message": "invalid request body", "detail": str(exc)},
        )

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            log = session_mod.open_session(body.framework_label, body.task_label)
        except ValueError as exc:
            raise ApiError(400, "bad_request", str(exc)) from None
        rt = _SessionRuntime(log)
        sessions[log.session_id] = rt
        persist(rt)
        return {"session_id": log.session_id}

    @app.post("/sessions/{session_id}/prompts")
    def post_prompt(session_id: str, body: PromptBody):
        rt = runtime(session_id)
        endpoint = config.endpoints.get(rt.log.framework_label)
        if endpoint is None:
            raise ApiError(
                400,
                "unknown_endpoint",
                f"no endpoint configured for framework {rt.log.framework_label!r}",
            )
        with rt.lock:
            # validate the transition up front so illegal prompts never reach
            # the framework; events are appended only for completed exchanges
            if body.new_attempt:
                if not session_mod.can_append(rt.log, "attempt_started"):
                    raise ApiError(
                        409, "illegal_state", f"cannot start an attempt in state {rt.log.state!r}"
                    )
            elif not session_mod.can_append(rt.log, "query_sent", {"prompt": body.text}):
                raise ApiError(
                    409,
                    "illegal_state",
                    "a follow-up query needs an open attempt with its last query resolved",
                )
            conversation = _conversation_of(rt.log) + [("user", body.text)]
            result = llm_client.send_query(
                endpoint, conversation, transport=transport, clock=clock
            )
            if result.status == llm_client.TRANSPORT_ERROR:
                raise ApiError(
                    502, "transport_error", "exchange failed before reaching the framework",
                    detail=result.detail or "",
                )
            if body.new_attempt:
                session_mod.append(rt.log, "attempt_started")
            session_mod.append(rt.log, "query_sent", {"prompt": body.text})
            if result.status == llm_client.ANSWER:
                session_mod.append(
                    rt.log,
                    "response_received",
                    {"latency_s": result.latency_s, "text": result.text},
                )
            else:
                session_mod.append(
                    rt.log,
                    "sb_detected",
                    {"wait_s": result.latency_s, "detail": result.detail or ""},
                )
            persist(rt)
        return {
            "status": result.status,
            "latency_s": result.latency_s,
            "text": result.text,
            "detail": result.detail,
        }

    @app.post("/sessions/{session_id}/outcome")
    def tag_outcome(session_id: str, body: OutcomeBody):
        rt = runtime(session_id)
        with rt.lock:
            try:
                session_mod.append(rt.log, "outcome_tagged", {"tag": body.tag})
                if body.tag == "accepted":
                    session_mod.append(rt.log, "session_closed", {"status": "completed"})
            except (SessionStateError, ValueError) as exc:
                raise ApiError(409, "illegal_state", str(exc)) from None
            persist(rt)
        return {"acknowledged": True, "state": rt.log.state}

    @app.get("/sessions/{session_id}/stats")
    def get_live_stats(session_id: str):
        rt = runtime(session_id)
        counters = session_mod.live_counters(rt.log)
        times = counters["response_times_s"]
        artpq_s = sum(times) / len(times) if times else None
        n, sb, q = counters["total_queries_n"], counters["sb_count"], counters["attempts_q"]
        e_sbr = 1.0 - sb / n if n else None
        from .indices import consistency, response_time_index

        e_art = response_time_index(artpq_s, cfg) if artpq_s is not None else None
        e = (e_sbr + e_art) / 2.0 if (e_sbr is not None and e_art is not None) else None
        c = consistency(q, cfg.m) if q >= 1 else None
        return {
            "framework_label": rt.log.framework_label,
            "task_label": rt.log.task_label,
            **counters,
            "artpq_s": artpq_s,
            "provisional": {"e_sbr": e_sbr, "e_art": e_art, "e": e, "c": c},
        }

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str):
        rt = runtime(session_id)
        return {
            "session_id": session_id,
            "events": [
                {"seq": ev.seq, "ts": ev.ts, "kind": ev.kind, "payload": ev.payload}
                for ev in rt.log.events
            ],
        }

    @app.post("/sessions/{session_id}/predictions")
    def submit_predictions(session_id: str, body: PredictionsBody):
        rt = runtime(session_id)
        if not body.predictions or set(body.predictions) != set(body.truth):
            raise ApiError(
                400,
                "malformed_upload",
                "predictions and truth must cover the same nonempty variable set",
            )
        reports: dict[str, MetricReport] = {}
        for var in body.predictions:
            pred, truth = body.predictions[var], body.truth[var]
            if len(pred) != len(truth) or not pred:
                raise ApiError(
                    400,
                    "malformed_upload",
                    f"variable {var!r}: prediction and truth lengths differ or are empty",
                )
            try:
                reports[var] = metric_report(pred, truth, mask_eps=cfg.mask_eps)
            except ValueError as exc:
                raise ApiError(400, "malformed_upload", f"variable {var!r}: {exc}") from None
        with rt.lock:
            rt.metric_reports = reports
            payload = {
                "predictions": body.predictions,
                "truth": body.truth,
                "reports": {var: rep.to_dict() for var, rep in reports.items()},
            }
            (uploads_dir / f"{session_id}.json").write_text(
                json.dumps(jsonable(payload)), encoding="utf-8"
            )
        return {
            "reports": {var: jsonable(rep.to_dict()) for var, rep in reports.items()},
            "mape_av_pct": mape_average(reports),
        }

    def _framework_result(session_id: str) -> FrameworkResult:
        rt = runtime(session_id)
        if rt.metric_reports is None:
            raise ApiError(
                409, "incomplete_session", f"session {session_id!r} has no submitted predictions"
            )
        try:
            stats = session_mod.derive_stats(rt.log)
        except SessionStateError as exc:
            raise ApiError(409, "incomplete_session", str(exc)) from None
        accepted = any(
            ev.kind == "outcome_tagged" and ev.payload.get("tag") == "accepted"
            for ev in rt.log.events
        )
        if not accepted:
            raise ApiError(
                409, "incomplete_session", f"session {session_id!r} has no accepted outcome"
            )
        ini_report = evaluate(stats, mape_average(rt.metric_reports), cfg)
        return FrameworkResult(
            framework_label=rt.log.framework_label,
            metric_reports=rt.metric_reports,
            ini_report=ini_report,
            session_ref=session_id,
        )

    @app.get("/sessions/{session_id}/ini")
    def get_ini(session_id: str):
        result = _framework_result(session_id)
        return {
            "session_id": session_id,
            "framework_label": result.framework_label,
            **jsonable(result.ini_report.to_dict()),
        }

    @app.get("/compare")
    def compare(ids: str = ""):
        id_list = [part for part in ids.split(",") if part]
        if not id_list:
            raise ApiError(400, "bad_request", "compare needs at least one session id")
        results = [_framework_result(sid) for sid in id_list]
        tables = {
            metric: jsonable(comparison_table(results, metric)) for metric in METRIC_FIELDS
        }
        return {"ranking": jsonable(ranking_table(results)), "tables": tables}

    @app.get("/plots/{session_id}")
    def get_plot_series(session_id: str, variable: str = "", window: str = ""):
        rt = runtime(session_id)
        upload_path = uploads_dir / f"{session_id}.json"
        if rt.metric_reports is None or not upload_path.exists():
            raise ApiError(
                409, "incomplete_session", f"session {session_id!r} has no submitted predictions"
            )
        stored = json.loads(upload_path.read_text(encoding="utf-8"))
        variables = list(stored["truth"].keys())
        var = variable or variables[0]
        if var not in stored["truth"]:
            raise ApiError(400, "bad_request", f"unknown variable {var!r}; have {variables}")
        truth = stored["truth"][var]
        preds = stored["predictions"][var]
        start, end = 0, len(truth)
        if window:
            try:
                start_s, end_s = window.split(":")
                start, end = int(start_s), int(end_s)
            except ValueError:
                raise ApiError(400, "bad_request", f"window must be 'start:end', got {window!r}") from None
            if not 0 <= start < end <= len(truth):
                raise ApiError(
                    400, "bad_request", f"window [{start}, {end}) outside series of {len(truth)}"
                )
        return {
            "session_id": session_id,
            "framework_label": rt.log.framework_label,
            "variable": var,
            "variables": variables,
            "start_index": start,
            "index": list(range(start, end)),
            "truth": truth[start:end],
            "prediction": preds[start:end],
        }

    return app


def _conversation_of(log: SessionLog) -> list[tuple[str, str]]:
    conversation: list[tuple[str, str]] = []
    for ev in log.events:
        if ev.kind == "query_sent":
            conversation.append(("user", ev.payload["prompt"]))
        elif ev.kind == "response_received":
            conversation.append(("assistant", ev.payload.get("text", "")))
    return conversation


def run_service(
    config: HarnessConfig,
    *,
    transport: httpx.BaseTransport | None = None,
) -> None:
    """Serve until signaled (blocking)."""
    import uvicorn

    app = create_app(config, transport=transport)
    uvicorn.run(app, host=config.service.bind_address, port=config.service.port)
