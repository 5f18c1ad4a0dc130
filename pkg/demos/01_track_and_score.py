# Track a short analysis session and read back frequency/recency scores.
#
# The story: an analyst builds a Running Time x IMDB Rating scatterplot and
# then inspects two movies, Godzilla and Kingpin. Four interactions total:
# two attribute encodes, two record hovers.

from pathlib import Path

from provlens import RawAction, SessionState, Strategy, load_dataset

DATA = Path(__file__).parent / "data" / "movies.csv"

# (1) Load the dataset. Column kinds are inferred; `id` supplies record ids.
dataset = load_dataset(DATA.read_bytes(), "csv")
print(f"{len(dataset.records)} movies, attributes: {dataset.attribute_names}")

# (2) Start an edit-mode session (live tracking, empty ledger).
state = SessionState(mode="edit", dataset=dataset)

# (3) Replay the four interactions. Hovers carry a measured dwell; anything
# under the 250 ms threshold would be discarded as accidental.
state.record_action(RawAction(kind="encode-assign", attribute="Running Time", timestamp_ms=1_000))
state.record_action(RawAction(kind="encode-assign", attribute="IMDB Rating", timestamp_ms=2_000))
state.record_action(RawAction(kind="record-hover", record="m0", dwell_ms=420, timestamp_ms=3_000))
state.record_action(RawAction(kind="record-hover", record="m1", dwell_ms=380, timestamp_ms=4_000))

# (4) Scores. Both touched attributes hit frequency 1.0 (one interaction each
# is the scope maximum); recency spaces the touches evenly: the y-encode came
# after the x-encode, so IMDB Rating is 1.0 and Running Time 0.5.
tables = state.score_tables()
for scope in ("attributes", "records"):
    print(f"\n{scope} (relative strategy):")
    for entity, row in tables[scope].rows.items():
        if row.frequency > 0 or row.recency > 0:
            print(f"  {entity:14s} frequency={row.frequency:.2f} recency={row.recency:.2f}")

# (5) The same ledger under the other scoring strategies.
for label in ("absolute", "binary"):
    table = state.score_tables(Strategy(label, label))["records"]
    cells = {e: (round(r.frequency, 3), round(r.recency, 3))
             for e, r in table.rows.items() if r.frequency > 0}
    print(f"\nrecords under {label}/{label}: {cells}")

# (6) One hover on an aggregate mark (a Drama bar) splits a single unit of
# interaction evenly across the bar's constituent movies.
state.record_action(RawAction(kind="record-hover", group=("Genre", "Drama"),
                              dwell_ms=500, timestamp_ms=5_000))
table = state.score_tables()["records"]
dramas = [rid for rid, values in dataset.records if values["Genre"] == "Drama"]
print(f"\nafter hovering the Drama bar ({len(dramas)} movies):")
for rid in dramas:
    row = table.rows[rid]
    print(f"  {rid}: frequency={row.frequency:.3f} recency={row.recency:.3f}")
