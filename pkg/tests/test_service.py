from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from provlens.service import create_app
from conftest import MOVIES_CSV


@pytest.fixture
def client():
    with TestClient(create_app()) as c:
        yield c


def make_session(client, mode="edit", **kw):
    response = client.post("/sessions", json={"mode": mode, **kw})
    assert response.status_code == 200, response.text
    return response.json()["session_id"]


def upload_movies(client, sid):
    response = client.post(
        f"/sessions/{sid}/dataset",
        files={"file": ("movies.csv", MOVIES_CSV.encode("utf-8"), "text/csv")},
    )
    assert response.status_code == 200, response.text
    return response.json()


def fig1_payload():
    return {
        "actions": [
            {"kind": "encode-assign", "attribute": "Running Time", "timestamp_ms": 1000,
             "action_id": "a1"},
            {"kind": "encode-assign", "attribute": "IMDB Rating", "timestamp_ms": 2000,
             "action_id": "a2"},
            {"kind": "record-hover", "record": "m0", "dwell_ms": 400, "timestamp_ms": 3000,
             "action_id": "a3"},
            {"kind": "record-hover", "record": "m1", "dwell_ms": 400, "timestamp_ms": 4000,
             "action_id": "a4"},
        ]
    }


def read_sse(client, url, until_seq):
    """Read a bounded SSE subscription and return its data messages.

    The buffered test client cannot consume an infinite stream, so these tests
    use the ``until_seq`` bound; live-push delivery is exercised against a real
    server in the acceptance suite."""
    sep = "&" if "?" in url else "?"
    response = client.get(f"{url}{sep}until_seq={until_seq}")
    assert response.status_code == 200
    messages = []
    for line in response.text.splitlines():
        if line.startswith("data: "):
            messages.append(json.loads(line[len("data: "):]))
    return messages


class TestSessionLifecycle:
    def test_create_upload_score_walkthrough(self, client):
        sid = make_session(client)
        summary = upload_movies(client, sid)
        assert summary["dataset"]["record_count"] == 6

        result = client.post(f"/sessions/{sid}/events", json=fig1_payload()).json()
        assert result == {"accepted": 4, "discarded": 0, "duplicates": 0, "seq": 4}

        attrs = client.get(f"/sessions/{sid}/scores", params={"scope": "attributes"}).json()
        assert attrs["rows"]["Running Time"] == {
            "frequency": 1.0, "recency": 0.5, "rank_frequency": 2, "rank_recency": 2,
        }
        assert attrs["rows"]["IMDB Rating"]["recency"] == 1.0
        assert attrs["seq"] == 4

        records = client.get(f"/sessions/{sid}/scores", params={"scope": "records"}).json()
        assert records["rows"]["m0"]["recency"] == 0.5
        assert records["rows"]["m1"]["recency"] == 1.0

    def test_unknown_session_404(self, client):
        response = client.get("/sessions/nope/scores")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_session"

    def test_view_mode_post_conflict(self, client):
        sid = make_session(client, mode="view")
        upload_movies(client, sid)
        response = client.post(f"/sessions/{sid}/events", json=fig1_payload())
        assert response.status_code == 409
        assert response.json()["code"] == "invalid_mode"

    def test_duplicate_action_ids_are_idempotent(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        action = {"kind": "record-hover", "record": "m0", "dwell_ms": 400,
                  "timestamp_ms": 1000, "action_id": "dup"}
        first = client.post(f"/sessions/{sid}/events", json={"actions": [action]}).json()
        assert (first["accepted"], first["duplicates"]) == (1, 0)
        second = client.post(f"/sessions/{sid}/events", json={"actions": [action]}).json()
        assert (second["accepted"], second["duplicates"]) == (0, 1)
        assert second["seq"] == first["seq"]
        scores = client.get(f"/sessions/{sid}/scores", params={"scope": "records"}).json()
        assert scores["rows"]["m0"]["frequency"] == 1.0

    def test_subthreshold_hover_discarded(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        result = client.post(
            f"/sessions/{sid}/events",
            json={"actions": [{"kind": "record-hover", "record": "m0", "dwell_ms": 100}]},
        ).json()
        assert result["accepted"] == 0 and result["discarded"] == 1

    def test_unknown_entity_rejected(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        response = client.post(
            f"/sessions/{sid}/events",
            json={"actions": [{"kind": "encode-assign", "attribute": "Budget"}]},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "unknown_entity"

    def test_read_your_writes(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        posted = client.post(f"/sessions/{sid}/events", json=fig1_payload()).json()
        got = client.get(f"/sessions/{sid}/scores", params={"scope": "records"}).json()
        assert got["seq"] == posted["seq"]

    def test_strategy_override_on_read(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(f"/sessions/{sid}/events", json=fig1_payload())
        binary = client.get(
            f"/sessions/{sid}/scores", params={"scope": "records", "strategy": "bin"}
        ).json()
        assert binary["rows"]["m0"]["recency"] == 0.0
        assert binary["rows"]["m1"]["recency"] == 1.0


class TestDatasetEndpoint:
    def test_json_upload_with_sidecar(self, client):
        sid = make_session(client)
        rows = json.dumps([{"id": "a", "v": 1}, {"id": "b", "v": 2}])
        schema = json.dumps({"v": "categorical"})
        response = client.post(
            f"/sessions/{sid}/dataset",
            files={
                "file": ("rows.json", rows.encode(), "application/json"),
                "schema": ("schema.json", schema.encode(), "application/json"),
            },
        )
        assert response.status_code == 200
        kinds = {a["name"]: a["kind"] for a in response.json()["dataset"]["attributes"]}
        assert kinds["v"] == "categorical"

    def test_bad_dataset_rejected(self, client):
        sid = make_session(client)
        response = client.post(
            f"/sessions/{sid}/dataset",
            files={"file": ("movies.csv", b"a,b\n1\n", "text/csv")},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_dataset"

    def test_profile_endpoint(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        profile = client.get(f"/sessions/{sid}/profile/Genre").json()
        assert profile["kind"] == "categorical"
        assert sum(profile["categories"].values()) == pytest.approx(100.0)


class TestSpecEndpoint:
    def test_bind_spec(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(f"/sessions/{sid}/events", json=fig1_payload())
        spec = {
            "mark": "point",
            "scope": "records",
            "encodings": {"x": {"field": "frequency"}, "y": {"field": "IMDB Rating"}},
            "transforms": [{"kind": "sort", "metric": "recency", "direction": "desc"}],
        }
        response = client.post(f"/sessions/{sid}/spec", json=spec)
        assert response.status_code == 200
        body = response.json()
        assert body["rows"][0]["id"] == "m1"  # most recent first
        assert body["spec"]["encodings"]["x"]["kind"] == "quantitative"

    def test_bad_spec_code(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        response = client.post(
            f"/sessions/{sid}/spec",
            json={"mark": "point", "scope": "records", "encodings": {"x": {"field": "nope"}}},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_spec"


class TestExportImportEndpoints:
    def test_round_trip(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(f"/sessions/{sid}/events", json=fig1_payload())
        exported = client.get(f"/sessions/{sid}/export")
        assert exported.status_code == 200
        assert exported.headers["x-session-seq"] == "4"

        other = make_session(client, mode="edit")
        upload_movies(client, other)
        imported = client.post(
            f"/sessions/{other}/import",
            json={"log": exported.text, "mode": "view"},
        )
        assert imported.status_code == 200
        assert imported.json()["mode"] == "view"
        assert imported.json()["seq"] == 4

        scores = client.get(f"/sessions/{other}/scores", params={"scope": "records"}).json()
        assert scores["rows"]["m1"]["recency"] == 1.0
        # View mode now rejects events.
        rejected = client.post(f"/sessions/{other}/events", json=fig1_payload())
        assert rejected.status_code == 409

    def test_import_hash_mismatch(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        exported = client.get(f"/sessions/{sid}/export").text

        other = make_session(client)
        response = client.post(
            f"/sessions/{other}/dataset",
            files={"file": ("tiny.csv", b"id,Genre\nz,Action\n", "text/csv")},
        )
        assert response.status_code == 200
        result = client.post(f"/sessions/{other}/import", json={"log": exported, "mode": "view"})
        assert result.status_code == 409
        assert result.json()["code"] == "hash_mismatch"


class TestStream:
    def test_one_message_per_accepted_event(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(f"/sessions/{sid}/events", json=fig1_payload())
        messages = read_sse(client, f"/sessions/{sid}/stream", 4)
        assert [m["seq"] for m in messages] == [1, 2, 3, 4]
        assert messages[0]["scope"] == "attributes"
        assert "Running Time" in messages[0]["changed_entities"]
        assert messages[2]["scores"]["m0"]["frequency"] == 1.0

    def test_resume_after_seq(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(f"/sessions/{sid}/events", json=fig1_payload())
        messages = read_sse(client, f"/sessions/{sid}/stream?after=2", 4)
        assert [m["seq"] for m in messages] == [3, 4]

    def test_discarded_actions_emit_nothing(self, client):
        sid = make_session(client)
        upload_movies(client, sid)
        client.post(
            f"/sessions/{sid}/events",
            json={"actions": [
                {"kind": "record-hover", "record": "m0", "dwell_ms": 10},
                {"kind": "record-hover", "record": "m0", "dwell_ms": 400},
            ]},
        )
        messages = read_sse(client, f"/sessions/{sid}/stream", 1)
        assert len(messages) == 1 and messages[0]["seq"] == 1


class TestPersistence:
    def test_sessions_survive_restart(self, tmp_path):
        data_dir = str(tmp_path / "sessions")
        with TestClient(create_app(data_dir=data_dir)) as client:
            sid = make_session(client)
            upload_movies(client, sid)
            client.post(f"/sessions/{sid}/events", json=fig1_payload())

        with TestClient(create_app(data_dir=data_dir)) as client:
            scores = client.get(f"/sessions/{sid}/scores", params={"scope": "records"}).json()
            assert scores["rows"]["m1"]["recency"] == 1.0
            # The rebuilt stream log still covers the old events.
            messages = read_sse(client, f"/sessions/{sid}/stream", 4)
            assert [m["seq"] for m in messages] == [1, 2, 3, 4]


class TestAuthStub:
    def test_bearer_token_required_when_configured(self):
        with TestClient(create_app(token="sesame")) as client:
            denied = client.post("/sessions", json={"mode": "edit"})
            assert denied.status_code == 401
            allowed = client.post(
                "/sessions", json={"mode": "edit"}, headers={"Authorization": "Bearer sesame"}
            )
            assert allowed.status_code == 200
