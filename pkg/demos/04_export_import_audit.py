# Post-hoc audit: export one analyst's session, import it read-only, and see
# the same tables they saw; or import in hybrid mode and keep working.

import random
from pathlib import Path

from provlens import InvalidModeError, RawAction, SessionState, export_log, import_log, load_dataset

DATA = Path(__file__).parent / "data" / "movies.csv"
dataset = load_dataset(DATA.read_bytes(), "csv")

# (1) The analyst's session: a burst of exploration, then export.
analyst = SessionState(mode="edit", dataset=dataset)
rng = random.Random(23)
ts = 1_000
for _ in range(25):
    ts += rng.randint(1, 100)
    if rng.random() < 0.3:
        analyst.record_action(RawAction(kind="filter-apply",
                                        attribute=rng.choice(dataset.attribute_names),
                                        timestamp_ms=ts))
    else:
        analyst.record_action(RawAction(kind="record-hover",
                                        record=rng.choice(dataset.record_ids),
                                        dwell_ms=rng.randint(250, 900), timestamp_ms=ts))
log_bytes = export_log(analyst)
print(f"exported {len(log_bytes)} bytes, {len(analyst.event_log)} events")
print("first two lines:")
for line in log_bytes.decode().splitlines()[:2]:
    print(" ", line[:100])

# (2) The reviewer imports the log in view mode. The header's dataset hash is
# checked, the ledger is rebuilt by replay, and the tables come out identical.
reviewer = import_log(log_bytes, dataset, mode="view")
theirs = analyst.score_tables()["records"].to_json_dict()
ours = reviewer.score_tables()["records"].to_json_dict()
print("\nreviewer sees identical record scores:", ours == theirs)

# (3) View mode is read-only; new interactions are refused.
try:
    reviewer.record_action(RawAction(kind="record-hover", record="m0", dwell_ms=400))
except InvalidModeError as exc:
    print("view-mode hover rejected:", exc)

# (4) Export is stable: importing and re-exporting is byte-identical, so logs
# can be archived, diffed, and rehashed.
print("re-export byte-identical:", export_log(reviewer) == log_bytes)

# (5) Hybrid mode continues on top of the imported history.
collaborator = import_log(log_bytes, dataset, mode="hybrid")
collaborator.record_action(RawAction(kind="record-hover", record="m6",
                                     dwell_ms=500, timestamp_ms=ts + 1_000))
print(f"hybrid session: {len(collaborator.event_log)} events "
      f"(imported {len(analyst.event_log)} + 1 new)")
