"""End-to-end acceptance checks, one test per criterion.

The conftest hook prints a PASS/FAIL line per criterion after the run.
Tolerances are exact as stated: score equalities at 1e-9, wall-clock bounds
asserted inside the tests that carry them.
"""

from __future__ import annotations

import json
import random
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from provlens import (
    ChannelBinding,
    InteractionEvent,
    ProvenanceLedger,
    RawAction,
    ScoreRow,
    ScoreTable,
    SessionState,
    Strategy,
    apply_event,
    export_log,
    filter_entities,
    frequency_scores,
    import_log,
    load_dataset,
    recency_scores,
    resolve_scale,
    score_table,
    sort_entities,
    top_n,
)
from provlens.service import create_app
from conftest import GLYPH_PANEL_CSV, GLYPH_PANEL_SEQUENCE, MOVIES_CSV, fig1_actions
from oracles import (
    make_dataset,
    oracle_frequency,
    oracle_recency,
    random_events,
    touch_of,
)

TOL = 1e-9
MODES = ("relative", "absolute", "binary")


def test_fig1_golden_case():
    started = time.monotonic()
    dataset = load_dataset(MOVIES_CSV, "csv")
    state = SessionState(mode="edit", dataset=dataset)
    for raw in fig1_actions():
        state.record_action(raw)
    tables = state.score_tables()

    expected_attrs = {"Running Time": (1.0, 0.5), "IMDB Rating": (1.0, 1.0)}
    for name, row in tables["attributes"].rows.items():
        f, r = expected_attrs.get(name, (0.0, 0.0))
        assert abs(row.frequency - f) <= TOL
        assert abs(row.recency - r) <= TOL

    expected_records = {"m0": (1.0, 0.5), "m1": (1.0, 1.0)}  # Godzilla, Kingpin
    for rid, row in tables["records"].rows.items():
        f, r = expected_records.get(rid, (0.0, 0.0))
        assert abs(row.frequency - f) <= TOL
        assert abs(row.recency - r) <= TOL

    assert time.monotonic() - started < 1.0


def test_aggregate_fanout():
    dataset = make_dataset(3, 50)
    ids = dataset.record_ids

    ledger = ProvenanceLedger.for_dataset(dataset)
    five = InteractionEvent(
        seq=1, timestamp_ms=1_000, kind="record-hover",
        record_targets=frozenset(ids[:5]), dwell_ms=400, aggregate=True,
    )
    ledger = apply_event(ledger, five)
    for rid in ids[:5]:
        assert ledger.record_entries[rid].units == 0.2

    rng = random.Random(2024)
    ledger = ProvenanceLedger.for_dataset(dataset)
    ts = 1_000
    for seq in range(1, 1_001):
        size = rng.randint(1, 20)
        ts += rng.randint(0, 3)
        event = InteractionEvent(
            seq=seq, timestamp_ms=ts, kind="record-hover",
            record_targets=frozenset(rng.sample(ids, size)), dwell_ms=300, aggregate=True,
        )
        before = sum(e.units for e in ledger.record_entries.values())
        ledger = apply_event(ledger, event)
        after = sum(e.units for e in ledger.record_entries.values())
        assert abs((after - before) - 1.0) <= TOL


def test_fig2_sort_filter_golden():
    dataset = load_dataset(GLYPH_PANEL_CSV, "csv")
    state = SessionState(mode="edit", dataset=dataset)
    for i, name in enumerate(GLYPH_PANEL_SEQUENCE):
        state.record_action(RawAction(kind="encode-assign", attribute=name, timestamp_ms=1_000 + i))
    table = state.score_tables()["attributes"]

    ordered = sort_entities(table.entities(), table, "frequency", "desc")
    assert ordered[0] == "Title"

    kept = filter_entities(table.entities(), table, "frequency", (0.5, 1.0))
    assert set(kept) == {"Title", "Worldwide Gross", "Production Budget", "Genre"}
    assert len(kept) == 4


def test_oracle_equivalence_500_streams():
    started = time.monotonic()
    rng = random.Random(31415)
    for trial in range(500):
        n_attrs = rng.randint(2, 10)
        n_records = rng.randint(2, 50)
        dataset = make_dataset(n_attrs, n_records)
        events = random_events(rng, dataset, rng.randint(1, 200))

        incremental = ProvenanceLedger.for_dataset(dataset)
        for event in events:
            incremental = apply_event(incremental, event)

        touches = [touch_of(e) for e in events]
        for scope, roster in (("attributes", dataset.attribute_names), ("records", dataset.record_ids)):
            for fmode in MODES:
                got = frequency_scores(incremental, scope, fmode)
                want = oracle_frequency(touches, roster, scope, fmode)
                for entity in roster:
                    assert abs(got[entity] - want[entity]) <= TOL
            for rmode in MODES:
                got = recency_scores(incremental, scope, rmode)
                want = oracle_recency(touches, roster, scope, rmode)
                for entity in roster:
                    assert abs(got[entity] - want[entity]) <= TOL
    elapsed = time.monotonic() - started
    assert elapsed < 30.0


def test_relative_recency_law():
    rng = random.Random(2718)
    for trial in range(200):
        dataset = make_dataset(rng.randint(2, 8), rng.randint(3, 30))
        events = random_events(rng, dataset, rng.randint(1, 80))
        ledger = ProvenanceLedger.for_dataset(dataset)
        for event in events:
            ledger = apply_event(ledger, event)
        for scope in ("attributes", "records"):
            total = ledger.event_count(scope)
            if total == 0:
                continue
            entries = ledger.entries(scope)
            scores = recency_scores(ledger, scope, "relative")
            final_entities = [e for e, entry in entries.items() if entry.last_touch == total]
            assert final_entities
            for entity in final_entities:
                assert scores[entity] == 1.0
            ordered = sorted(entries, key=lambda e: entries[e].last_touch)
            for earlier, later in zip(ordered, ordered[1:]):
                if entries[earlier].last_touch == entries[later].last_touch:
                    assert scores[earlier] == scores[later]
                else:
                    assert scores[earlier] < scores[later]


def test_round_trip_100_sessions():
    rng = random.Random(1618)
    for trial in range(100):
        dataset = make_dataset(rng.randint(2, 8), rng.randint(3, 25))
        state = SessionState(mode="edit", dataset=dataset)
        ts = 1_000
        for _ in range(rng.randint(0, 60)):
            ts += rng.choice([0, 1, 20])
            if rng.random() < 0.5:
                raw = RawAction(
                    kind="encode-assign",
                    attribute=rng.choice(dataset.attribute_names),
                    timestamp_ms=ts,
                )
            elif rng.random() < 0.3:
                raw = RawAction(
                    kind="record-hover",
                    records=tuple(rng.sample(dataset.record_ids, rng.randint(1, 3))),
                    aggregate=True,
                    dwell_ms=rng.randint(250, 600),
                    timestamp_ms=ts,
                )
            else:
                raw = RawAction(
                    kind="table-row-hover",
                    record=rng.choice(dataset.record_ids),
                    dwell_ms=rng.randint(0, 600),
                    timestamp_ms=ts,
                )
            state.record_action(raw)

        first = export_log(state)
        imported = import_log(first, dataset, mode="view", session_id=state.session_id)
        second = export_log(imported)
        assert second == first
        ours = state.score_tables()
        theirs = imported.score_tables()
        for scope in ("attributes", "records"):
            assert ours[scope].to_json_dict() == theirs[scope].to_json_dict()


def test_top_n_cardinality():
    rng = random.Random(777)
    for trial in range(1_000):
        size = rng.randint(1, 25)
        rows = {}
        last_touches = {}
        next_touch = 1
        for i in range(size):
            entity = f"e{i:02d}"
            if rng.random() < 0.7:
                last_touches[entity] = next_touch
                next_touch += 1
                rows[entity] = (rng.choice([0.2, 0.5, 0.5, 1.0]), last_touches[entity])
            else:
                rows[entity] = (0.0, None)
        interacted = [e for e, (_, lt) in rows.items() if lt is not None]
        interacted.sort(key=lambda e: (-rows[e][0], -(rows[e][1] or 0), e))
        ranks = {e: i + 1 for i, e in enumerate(interacted)}
        table = ScoreTable(
            scope="records",
            rows={
                e: ScoreRow(
                    frequency=f, recency=f, rank_frequency=ranks.get(e),
                    rank_recency=ranks.get(e), last_touch=lt,
                )
                for e, (f, lt) in rows.items()
            },
        )
        n = rng.randint(1, 30)
        got = top_n(list(rows), table, "frequency", n)
        assert len(got) == min(n, len(interacted))
        assert got == interacted[:n]


def test_dwell_gate():
    dataset = load_dataset(MOVIES_CSV, "csv")
    state = SessionState(mode="edit", dataset=dataset, dwell_threshold_ms=250)
    outcomes = []
    for i, dwell in enumerate((100, 249, 250, 400)):
        events = state.record_action(
            RawAction(kind="record-hover", record="m0", dwell_ms=dwell, timestamp_ms=1_000 + i)
        )
        outcomes.append(bool(events))
    assert outcomes == [False, False, True, True]


def test_scale_reverse_involution_and_argmax():
    rng = random.Random(424242)
    binding = ChannelBinding(channel="x", field="frequency", scale_reverse=True)
    forward = ChannelBinding(channel="x", field="frequency")
    for trial in range(1_000):
        values = [rng.random() for _ in range(rng.randint(1, 40))]
        twice = resolve_scale(binding, resolve_scale(binding, values))
        assert all(abs(a - b) <= TOL for a, b in zip(twice, values))

        argmax = values.index(max(values))
        identity = resolve_scale(forward, values)
        reverse = resolve_scale(binding, values)
        assert identity.index(max(identity)) == argmax
        assert reverse.index(min(reverse)) == argmax


def test_service_contract():
    # View-mode sessions refuse event posts.
    with TestClient(create_app()) as client:
        sid = client.post("/sessions", json={"mode": "view"}).json()["session_id"]
        client.post(
            f"/sessions/{sid}/dataset",
            files={"file": ("movies.csv", MOVIES_CSV.encode(), "text/csv")},
        )
        denied = client.post(
            f"/sessions/{sid}/events",
            json={"actions": [{"kind": "record-hover", "record": "m0", "dwell_ms": 400}]},
        )
        assert denied.status_code == 409
        assert denied.json()["code"] == "invalid_mode"

    # A live subscriber sees exactly one gap-free message per accepted event
    # across a 500-event session.
    app = create_app()
    config = uvicorn.Config(app, host="127.0.0.1", port=8931, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        assert time.monotonic() < deadline, "server failed to start"
        time.sleep(0.01)

    base = "http://127.0.0.1:8931"
    messages: list[dict] = []
    done = threading.Event()
    try:
        with httpx.Client(base_url=base, timeout=30) as client:
            sid = client.post("/sessions", json={"mode": "edit"}).json()["session_id"]
            client.post(
                "/sessions/" + sid + "/dataset",
                files={"file": ("movies.csv", MOVIES_CSV.encode(), "text/csv")},
            )

            def subscribe():
                with httpx.stream("GET", f"{base}/sessions/{sid}/stream", timeout=60) as response:
                    for line in response.iter_lines():
                        if line.startswith("data: "):
                            messages.append(json.loads(line[len("data: "):]))
                            if len(messages) >= 500:
                                break
                done.set()

            subscriber = threading.Thread(target=subscribe, daemon=True)
            subscriber.start()
            time.sleep(0.2)

            rng = random.Random(9)
            record_ids = [f"m{i}" for i in range(6)]
            sent = 0
            ts = 1_000
            while sent < 500:
                batch = []
                for _ in range(min(25, 500 - sent)):
                    ts += rng.randint(0, 2)
                    if rng.random() < 0.5:
                        batch.append(
                            {"kind": "encode-assign", "attribute": rng.choice(["Genre", "Title"]),
                             "timestamp_ms": ts}
                        )
                    else:
                        batch.append(
                            {"kind": "record-hover", "record": rng.choice(record_ids),
                             "dwell_ms": 400, "timestamp_ms": ts}
                        )
                    sent += 1
                result = client.post(f"/sessions/{sid}/events", json={"actions": batch}).json()
                assert result["discarded"] == 0

            assert done.wait(30), "subscriber did not receive all messages"
    finally:
        server.should_exit = True
        thread.join(timeout=10)

    seqs = [m["seq"] for m in messages]
    assert len(seqs) == 500
    assert seqs == list(range(1, 501))
