# Drive the HTTP service end to end: create a session, upload the dataset,
# post raw actions, and watch score deltas arrive on the event stream.
#
# Everything runs in-process; the server thread shuts down at the end.

import json
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from provlens.service import create_app

DATA = Path(__file__).parent / "data" / "movies.csv"
PORT = 8741

server = uvicorn.Server(uvicorn.Config(create_app(), host="127.0.0.1", port=PORT, log_level="error"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.01)

base = f"http://127.0.0.1:{PORT}"
with httpx.Client(base_url=base, timeout=10) as client:
    # (1) Create an edit-mode session and upload the movies dataset.
    session = client.post("/sessions", json={"mode": "edit"}).json()
    sid = session["session_id"]
    summary = client.post(
        f"/sessions/{sid}/dataset",
        files={"file": ("movies.csv", DATA.read_bytes(), "text/csv")},
    ).json()
    print("uploaded:", summary["dataset"]["record_count"], "records")

    # (2) Subscribe to the stream before interacting.
    received = []
    caught_up = threading.Event()

    def subscribe():
        with httpx.stream("GET", f"{base}/sessions/{sid}/stream", timeout=30) as response:
            for line in response.iter_lines():
                if line.startswith("data: "):
                    received.append(json.loads(line[6:]))
                    if len(received) >= 3:
                        break
        caught_up.set()

    threading.Thread(target=subscribe, daemon=True).start()
    time.sleep(0.2)

    # (3) Post raw actions. The 120 ms hover dies at the server's dwell gate;
    # the rest are accepted and fan out onto the stream.
    actions = [
        {"kind": "record-hover", "record": "m2", "dwell_ms": 120, "timestamp_ms": 1_000},
        {"kind": "encode-assign", "attribute": "IMDB Rating", "timestamp_ms": 2_000},
        {"kind": "record-hover", "record": "m2", "dwell_ms": 450, "timestamp_ms": 3_000},
        {"kind": "record-hover", "group": ["Genre", "Comedy"], "dwell_ms": 600, "timestamp_ms": 4_000},
    ]
    result = client.post(f"/sessions/{sid}/events", json={"actions": actions}).json()
    print("posted:", result)

    caught_up.wait(10)
    print("\nstream messages:")
    for message in received:
        print(f"  seq={message['seq']} scope={message['scope']} "
              f"changed={message['changed_entities']}")

    # (4) Read the resulting table and export the log for archival.
    scores = client.get(f"/sessions/{sid}/scores", params={"scope": "records"}).json()
    hot = {e: r for e, r in scores["rows"].items() if r["frequency"] > 0}
    print("\nnonzero record scores:")
    for entity, row in hot.items():
        print(f"  {entity}: frequency={row['frequency']:.3f} recency={row['recency']:.3f}")

    log_text = client.get(f"/sessions/{sid}/export").text
    print(f"\nexported log: {len(log_text.splitlines())} lines")

server.should_exit = True
thread.join(timeout=5)
print("server stopped")
