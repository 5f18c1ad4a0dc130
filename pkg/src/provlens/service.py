"""HTTP service: sessions, event ingestion, scores, specs, and a live stream.

Raw actions (with dwell) are sent by clients; the server owns thresholding
and aggregate fan-out so every client gets identical semantics. Each session
is single-writer: event batches serialize on a per-session lock. Accepted
events append a message to the session's stream log, which subscribers read
in order over Server-Sent Events, so a connection never sees a seq gap.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

from fastapi import Depends, FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from . import session as sessionlib
from .errors import ProvenanceError
from .glyphspec import VisSpec, bind_spec_data
from .scoring import Strategy, score_table
from .tracking import (
    DEFAULT_DWELL_THRESHOLD_MS,
    HOVER_KINDS,
    RawAction,
    apply_event,
    attribute_profile,
    load_dataset,
)

STREAM_KEEPALIVE_S = 0.25


@dataclass
class LiveSession:
    """Server-side wrapper: session state + lock + stream log + dedupe set."""

    state: sessionlib.SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)
    stream_log: list[dict] = field(default_factory=list)
    stream_cond: threading.Condition = field(default_factory=threading.Condition)
    seen_action_ids: set[str] = field(default_factory=set)

    def emit(self, message: dict) -> None:
        with self.stream_cond:
            self.stream_log.append(message)
            self.stream_cond.notify_all()


class CreateSessionBody(BaseModel):
    mode: str = "edit"
    strategy: dict | str | None = None
    dwell_threshold_ms: int | None = None


class EventsBody(BaseModel):
    actions: list[dict]


class ImportBody(BaseModel):
    log: str
    mode: str = "view"
    override_hash: bool = False


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


_STATUS_BY_CODE = {
    "invalid_mode": 409,
    "stale_seq": 409,
    "hash_mismatch": 409,
    "unknown_entity": 400,
    "bad_spec": 400,
    "bad_dataset": 400,
    "bad_log": 400,
}


def create_app(
    data_dir: str | None = None,
    default_dwell_ms: int | None = None,
    token: str | None = None,
) -> FastAPI:
    """Build the service. ``data_dir`` enables snapshot persistence; ``token``
    enables the bearer-token stub."""
    app = FastAPI(title="provlens", version="0.1.0")
    # The browser UI is typically served from another origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
        expose_headers=["X-Session-Seq"],
    )
    registry: dict[str, LiveSession] = {}
    registry_lock = threading.Lock()
    dwell_default = default_dwell_ms if default_dwell_ms is not None else DEFAULT_DWELL_THRESHOLD_MS

    if data_dir:
        os.makedirs(data_dir, exist_ok=True)
        for name in sorted(os.listdir(data_dir)):
            if not name.endswith(".json"):
                continue
            with open(os.path.join(data_dir, name), "rb") as fh:
                state = sessionlib.restore(fh.read())
            live = LiveSession(state=state)
            _rebuild_stream(live)
            registry[state.session_id] = live

    def persist(live: LiveSession) -> None:
        if not data_dir:
            return
        path = os.path.join(data_dir, f"{live.state.session_id}.json")
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(sessionlib.snapshot(live.state))
        os.replace(tmp, path)

    def get_session(session_id: str) -> LiveSession:
        with registry_lock:
            live = registry.get(session_id)
        if live is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return live

    def require_token(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise ApiError(401, "unauthorized", "missing or invalid bearer token")

    auth = Depends(require_token)

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(ProvenanceError)
    async def on_provenance_error(request: Request, exc: ProvenanceError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"code": "bad_request", "message": str(exc)})

    @app.post("/sessions", dependencies=[auth])
    def create_session(body: CreateSessionBody):
        if body.mode not in sessionlib.SESSION_MODES:
            raise ApiError(409, "invalid_mode", f"unknown session mode {body.mode!r}")
        strategy = _parse_strategy(body.strategy) or Strategy()
        state = sessionlib.SessionState(
            mode=body.mode,
            strategy=strategy,
            dwell_threshold_ms=(
                body.dwell_threshold_ms if body.dwell_threshold_ms is not None else dwell_default
            ),
        )
        live = LiveSession(state=state)
        with registry_lock:
            registry[state.session_id] = live
        persist(live)
        return _api_session(live)

    @app.get("/sessions/{session_id}", dependencies=[auth])
    def show_session(session_id: str):
        return _api_session(get_session(session_id))

    @app.post("/sessions/{session_id}/dataset", dependencies=[auth])
    def upload_dataset(
        session_id: str,
        file: UploadFile,
        schema_file: UploadFile | None = File(default=None, alias="schema"),
        format: str | None = Form(default=None),
    ):
        live = get_session(session_id)
        payload = file.file.read()
        fmt = format or _infer_format(file.filename, payload)
        sidecar = json.loads(schema_file.file.read()) if schema_file is not None else None
        dataset = load_dataset(payload, fmt, schema=sidecar)
        with live.lock:
            live.state.attach_dataset(dataset)
            persist(live)
        return _dataset_summary(live)

    @app.get("/sessions/{session_id}/profile/{attribute}", dependencies=[auth])
    def profile(session_id: str, attribute: str):
        live = get_session(session_id)
        if live.state.dataset is None:
            raise ApiError(409, "invalid_mode", "session has no dataset")
        out = attribute_profile(live.state.dataset, attribute)
        out["seq"] = live.state.seq
        return out

    @app.post("/sessions/{session_id}/events", dependencies=[auth])
    def post_events(session_id: str, body: EventsBody):
        live = get_session(session_id)
        accepted = discarded = duplicates = 0
        with live.lock:
            try:
                for action in body.actions:
                    raw = _parse_action(action)
                    if raw.action_id is not None and raw.action_id in live.seen_action_ids:
                        duplicates += 1
                        continue
                    before = _scope_scores(live.state)
                    events = live.state.record_action(raw)
                    if raw.action_id is not None:
                        live.seen_action_ids.add(raw.action_id)
                    if not events:
                        discarded += 1
                        continue
                    accepted += 1
                    after = _scope_scores(live.state)
                    for event in events:
                        live.emit(_delta_message(event, before, after))
            finally:
                persist(live)
        return {
            "accepted": accepted,
            "discarded": discarded,
            "duplicates": duplicates,
            "seq": live.state.seq,
        }

    @app.get("/sessions/{session_id}/scores", dependencies=[auth])
    def scores(session_id: str, scope: str = "records", strategy: str | None = None):
        live = get_session(session_id)
        if live.state.ledger is None:
            raise ApiError(409, "invalid_mode", "session has no dataset")
        chosen = _parse_strategy(strategy) or live.state.strategy
        table = score_table(live.state.ledger, scope, chosen)
        out = table.to_json_dict()
        out["strategy"] = chosen.to_json_dict()
        out["seq"] = live.state.seq
        return out

    @app.post("/sessions/{session_id}/spec", dependencies=[auth])
    def bind_spec(session_id: str, body: dict):
        live = get_session(session_id)
        state = live.state
        if state.dataset is None:
            raise ApiError(409, "invalid_mode", "session has no dataset")
        spec = VisSpec.from_json_dict(body, state.dataset)
        tables = state.score_tables()
        rows = bind_spec_data(spec, state.dataset, tables["records"], tables["attributes"])
        return {"spec": spec.to_json_dict(), "rows": rows, "seq": state.seq}

    @app.get("/sessions/{session_id}/export", dependencies=[auth])
    def export(session_id: str):
        live = get_session(session_id)
        with live.lock:
            payload = sessionlib.export_log(live.state)
            seq = live.state.seq
        return Response(
            content=payload,
            media_type="application/x-ndjson",
            headers={"X-Session-Seq": str(seq)},
        )

    @app.post("/sessions/{session_id}/import", dependencies=[auth])
    def import_session(session_id: str, body: ImportBody):
        live = get_session(session_id)
        with live.lock:
            if live.state.dataset is None:
                raise ApiError(409, "invalid_mode", "upload a dataset before importing")
            if live.state.event_log:
                raise ApiError(409, "invalid_mode", "session already has events")
            state = sessionlib.import_log(
                body.log,
                live.state.dataset,
                body.mode,
                override_hash=body.override_hash,
                session_id=session_id,
            )
            live.state = state
            _rebuild_stream(live)
            persist(live)
        return _api_session(live)

    @app.get("/sessions/{session_id}/stream", dependencies=[auth])
    def stream(session_id: str, after: int = 0, until_seq: int | None = None):
        """SSE subscription: one message per accepted event, in seq order.

        ``after`` resumes past already-seen seqs; ``until_seq`` closes the
        stream once that seq has been delivered (bounded reads for audits and
        buffered test clients)."""
        live = get_session(session_id)

        def generate():
            index = 0
            with live.stream_cond:
                while index < len(live.stream_log) and live.stream_log[index]["seq"] <= after:
                    index += 1
            while True:
                with live.stream_cond:
                    pending = live.stream_log[index:]
                    if not pending:
                        live.stream_cond.wait(timeout=STREAM_KEEPALIVE_S)
                        pending = live.stream_log[index:]
                index += len(pending)
                for message in pending:
                    yield (
                        f"id: {message['seq']}\n"
                        f"data: {json.dumps(message, separators=(',', ':'))}\n\n"
                    )
                    if until_seq is not None and message["seq"] >= until_seq:
                        return
                if not pending:
                    yield ": keepalive\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app


def _parse_strategy(value) -> Strategy | None:
    if value is None:
        return None
    if isinstance(value, str):
        return Strategy.parse(value)
    return Strategy.from_json_dict(value)


def _parse_action(action: dict) -> RawAction:
    if not isinstance(action, dict) or "kind" not in action:
        raise ValueError("each action needs a kind")
    group = action.get("group")
    records = action.get("records")
    return RawAction(
        kind=action["kind"],
        attribute=action.get("attribute"),
        record=action.get("record"),
        records=tuple(records) if records is not None else None,
        group=(group[0], group[1]) if group is not None else None,
        dwell_ms=action.get("dwell_ms"),
        timestamp_ms=action.get("timestamp_ms"),
        action_id=action.get("action_id"),
        aggregate=bool(action.get("aggregate", False)),
    )


def _infer_format(filename: str | None, payload: bytes) -> str:
    if filename:
        lower = filename.lower()
        if lower.endswith(".json"):
            return "json-rows"
        if lower.endswith(".csv"):
            return "csv"
    head = payload.lstrip()[:1]
    return "json-rows" if head == b"[" else "csv"


def _scope_scores(state: sessionlib.SessionState) -> dict:
    tables = state.score_tables()
    return {
        scope: {
            entity: (row.frequency, row.recency) for entity, row in tables[scope].rows.items()
        }
        for scope in ("attributes", "records")
    }


def _delta_message(event, before: dict, after: dict) -> dict:
    scope = event.scope
    changed = {}
    for entity, (freq, rec) in after[scope].items():
        if before[scope][entity] != (freq, rec):
            changed[entity] = {"frequency": freq, "recency": rec}
    return {
        "seq": event.seq,
        "scope": scope,
        "changed_entities": sorted(changed),
        "scores": changed,
    }


def _rebuild_stream(live: LiveSession) -> None:
    """Recompute the stream log from the event log, e.g. after import/restore."""
    state = live.state
    live.stream_log = []
    if state.dataset is None:
        return
    shadow = sessionlib.SessionState(
        session_id=state.session_id,
        mode="edit",
        dataset=state.dataset,
        strategy=state.strategy,
        dwell_threshold_ms=state.dwell_threshold_ms,
    )
    for event in state.event_log:
        if event.kind in HOVER_KINDS and event.dwell_ms is not None:
            if event.dwell_ms < state.dwell_threshold_ms:
                continue
        before = _scope_scores(shadow)
        shadow.ledger = apply_event(shadow.ledger, event)
        shadow.event_log.append(event)
        after = _scope_scores(shadow)
        live.stream_log.append(_delta_message(event, before, after))


def _api_session(live: LiveSession) -> dict:
    state = live.state
    return {
        "session_id": state.session_id,
        "mode": state.mode,
        "strategy": state.strategy.to_json_dict(),
        "dwell_threshold_ms": state.dwell_threshold_ms,
        "dataset": _dataset_summary(live)["dataset"] if state.dataset else None,
        "seq": state.seq,
    }


def _dataset_summary(live: LiveSession) -> dict:
    dataset = live.state.dataset
    return {
        "dataset": {
            "attributes": [
                {"name": a.name, "kind": a.kind, "description": a.description}
                for a in dataset.attributes
            ],
            "record_count": len(dataset.records),
            "hash": sessionlib.dataset_hash(dataset),
        },
        "seq": live.state.seq,
    }


def app_from_env() -> FastAPI:
    """App factory driven by PROVLENS_* environment variables."""
    dwell = os.environ.get("PROVLENS_DWELL_MS")
    return create_app(
        data_dir=os.environ.get("PROVLENS_DATA_DIR"),
        default_dwell_ms=int(dwell) if dwell else None,
        token=os.environ.get("PROVLENS_TOKEN"),
    )
