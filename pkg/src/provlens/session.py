"""Session lifecycle: modes, event log persistence, and deterministic replay.

The event log is the source of truth: the ledger and every score are pure
functions of (dataset, event log, dwell threshold, strategy). Export writes a
JSONL stream (one header line, one line per event) that round-trips
byte-identically; snapshots embed the dataset for standalone restore.
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field

from .errors import (
    HashMismatchError,
    InvalidModeError,
    LogFormatError,
    StaleSeqError,
)
from .scoring import ScoreTable, Strategy, score_table
from .tracking import (
    DEFAULT_DWELL_THRESHOLD_MS,
    Dataset,
    HOVER_KINDS,
    InteractionEvent,
    ProvenanceLedger,
    RawAction,
    apply_event,
    normalize_action,
)

FORMAT_VERSION = 1

SESSION_MODES = ("edit", "view", "hybrid")


def dataset_hash(dataset: Dataset) -> str:
    """Content hash of a dataset's canonical JSON form (sha256 hex)."""
    payload = json.dumps(dataset.to_json_dict(), separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class SessionState:
    """One analysis session: mode, dataset, event log, and the derived ledger."""

    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    mode: str = "edit"
    dataset: Dataset | None = None
    strategy: Strategy = field(default_factory=Strategy)
    dwell_threshold_ms: int = DEFAULT_DWELL_THRESHOLD_MS
    event_log: list[InteractionEvent] = field(default_factory=list)
    ledger: ProvenanceLedger | None = None

    def __post_init__(self):
        if self.mode not in SESSION_MODES:
            raise InvalidModeError(f"unknown session mode {self.mode!r}")
        if self.dataset is not None and self.ledger is None:
            self.ledger = replay(self.event_log, self.dataset, self.dwell_threshold_ms)

    @property
    def seq(self) -> int:
        return self.event_log[-1].seq if self.event_log else 0

    def attach_dataset(self, dataset: Dataset) -> None:
        if self.event_log:
            raise InvalidModeError("cannot replace the dataset of a session with events")
        self.dataset = dataset
        self.ledger = ProvenanceLedger.for_dataset(dataset, self.dwell_threshold_ms)

    def record_action(self, raw: RawAction, timestamp_ms: int | None = None) -> list[InteractionEvent]:
        """Normalize and apply one raw UI action; returns the accepted events
        (empty when the action was discarded by the dwell gate or the
        provenance self-tracking exclusion)."""
        if self.mode == "view":
            raise InvalidModeError("view-mode session rejects new interactions")
        if self.dataset is None or self.ledger is None:
            raise InvalidModeError("session has no dataset")
        ts = timestamp_ms
        if raw.timestamp_ms is None and ts is None:
            ts = max(time.time_ns() // 1_000_000, self._last_timestamp())
        events = normalize_action(
            raw,
            self.dataset,
            dwell_threshold_ms=self.dwell_threshold_ms,
            next_seq=self.seq + 1,
            timestamp_ms=ts,
        )
        for event in events:
            if event.timestamp_ms < self._last_timestamp():
                raise ValueError(
                    f"event timestamp {event.timestamp_ms} earlier than preceding event"
                )
            self.ledger = apply_event(self.ledger, event)
            self.event_log.append(event)
        return events

    def _last_timestamp(self) -> int:
        return self.event_log[-1].timestamp_ms if self.event_log else 0

    def score_tables(self, strategy: Strategy | None = None) -> dict[str, ScoreTable]:
        if self.ledger is None:
            raise InvalidModeError("session has no dataset")
        strategy = strategy or self.strategy
        return {
            "attributes": score_table(self.ledger, "attributes", strategy),
            "records": score_table(self.ledger, "records", strategy),
        }


def replay(
    events: list[InteractionEvent],
    dataset: Dataset,
    dwell_threshold_ms: int = DEFAULT_DWELL_THRESHOLD_MS,
) -> ProvenanceLedger:
    """Fold an event list into a fresh ledger; hover events under the dwell
    threshold are dropped, so the result is a pure function of its inputs."""
    ledger = ProvenanceLedger.for_dataset(dataset, dwell_threshold_ms)
    for event in events:
        if event.kind in HOVER_KINDS and event.dwell_ms is not None:
            if event.dwell_ms < dwell_threshold_ms:
                continue
        ledger = apply_event(ledger, event)
    return ledger


def export_log(state: SessionState) -> bytes:
    """Serialize a session to JSONL: header line, then one line per event."""
    header = {
        "spec_version": FORMAT_VERSION,
        "session_id": state.session_id,
        "dataset_hash": dataset_hash(state.dataset) if state.dataset else None,
        "dwell_threshold_ms": state.dwell_threshold_ms,
        "strategy": state.strategy.to_json_dict(),
    }
    lines = [json.dumps(header, separators=(",", ":"))]
    lines.extend(json.dumps(e.to_json_dict(), separators=(",", ":")) for e in state.event_log)
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_log(
    data: bytes | str,
    dataset: Dataset,
    mode: str = "view",
    *,
    override_hash: bool = False,
    session_id: str | None = None,
) -> SessionState:
    """Rebuild a session from exported log bytes.

    The header's dataset hash must match the given dataset unless
    ``override_hash`` is set. The raw event list is kept verbatim (re-export is
    byte-identical); the ledger is rebuilt by replay under the header's dwell
    threshold.
    """
    if mode not in ("view", "hybrid"):
        raise InvalidModeError(f"import requires view or hybrid mode, not {mode!r}")
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LogFormatError("line 1: missing header")

    header = _parse_line(lines[0], 1)
    if header.get("spec_version") != FORMAT_VERSION:
        raise LogFormatError(f"line 1: unsupported spec_version {header.get('spec_version')!r}")
    expected = header.get("dataset_hash")
    actual = dataset_hash(dataset)
    if expected != actual and not override_hash:
        raise HashMismatchError(
            f"log was recorded against dataset {expected}, loaded dataset is {actual}"
        )

    try:
        strategy = Strategy.from_json_dict(header["strategy"])
        threshold = int(header["dwell_threshold_ms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LogFormatError(f"line 1: bad header field: {exc}") from None

    events = []
    last_seq = 0
    last_ts = None
    for i, line in enumerate(lines[1:], start=2):
        payload = _parse_line(line, i)
        try:
            event = InteractionEvent.from_json_dict(payload)
        except ValueError as exc:
            raise LogFormatError(f"line {i}: {exc}") from None
        if event.seq <= last_seq:
            raise StaleSeqError(f"line {i}: seq {event.seq} not greater than {last_seq}")
        if last_ts is not None and event.timestamp_ms < last_ts:
            raise LogFormatError(f"line {i}: timestamp decreases")
        last_seq = event.seq
        last_ts = event.timestamp_ms
        events.append(event)

    ledger = replay(events, dataset, threshold)
    state = SessionState(
        session_id=session_id or header.get("session_id") or uuid.uuid4().hex,
        mode=mode,
        dataset=dataset,
        strategy=strategy,
        dwell_threshold_ms=threshold,
        event_log=events,
        ledger=ledger,
    )
    return state


def _parse_line(line: str, number: int) -> dict:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"line {number}: {exc}") from None
    if not isinstance(payload, dict):
        raise LogFormatError(f"line {number}: expected a JSON object")
    return payload


def snapshot(state: SessionState) -> bytes:
    """Single-document JSON snapshot embedding the dataset, for crash recovery."""
    payload = {
        "spec_version": FORMAT_VERSION,
        "session_id": state.session_id,
        "mode": state.mode,
        "strategy": state.strategy.to_json_dict(),
        "dwell_threshold_ms": state.dwell_threshold_ms,
        "dataset": state.dataset.to_json_dict() if state.dataset else None,
        "events": [e.to_json_dict() for e in state.event_log],
    }
    return json.dumps(payload, separators=(",", ":")).encode("utf-8")


def restore(data: bytes | str) -> SessionState:
    """Rebuild a session from snapshot bytes; scores come out identical."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"corrupt snapshot: {exc}") from None
    if not isinstance(payload, dict) or payload.get("spec_version") != FORMAT_VERSION:
        raise LogFormatError("corrupt snapshot: bad or missing spec_version")
    try:
        dataset = Dataset.from_json_dict(payload["dataset"]) if payload.get("dataset") else None
        events = [InteractionEvent.from_json_dict(e) for e in payload["events"]]
        strategy = Strategy.from_json_dict(payload["strategy"])
        state = SessionState(
            session_id=payload["session_id"],
            mode=payload["mode"],
            dataset=dataset,
            strategy=strategy,
            dwell_threshold_ms=int(payload["dwell_threshold_ms"]),
            event_log=events,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LogFormatError(f"corrupt snapshot: {exc}") from None
    return state
