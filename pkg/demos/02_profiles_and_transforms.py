# Attribute profiles, plus provenance-driven sorting, filtering, and the
# exact top-N selection that score filters cannot give you under ties.

import random
from pathlib import Path

from provlens import (
    RawAction,
    SessionState,
    attribute_profile,
    filter_entities,
    load_dataset,
    sort_entities,
    top_n,
)

DATA = Path(__file__).parent / "data" / "movies.csv"
dataset = load_dataset(DATA.read_bytes(), "csv")

# (1) Distribution summaries back the attribute panel: quartile bins for
# numerical columns, category percentages otherwise.
profile = attribute_profile(dataset, "Running Time")
print("Running Time quartiles:", [round(q, 1) for q in profile["quartiles"]])
print("bin percentages:       ", profile["bin_pcts"])
print("Genre categories:      ", attribute_profile(dataset, "Genre")["categories"])

# (2) Simulate a meandering session: repeated hovers concentrate on a few
# movies, leaving plenty of frequency ties elsewhere.
rng = random.Random(7)
state = SessionState(mode="edit", dataset=dataset)
ts = 1_000
for _ in range(40):
    ts += rng.randint(1, 30)
    state.record_action(RawAction(
        kind="record-hover",
        record=rng.choice(dataset.record_ids[:8]),
        dwell_ms=rng.randint(250, 800),
        timestamp_ms=ts,
    ))
table = state.score_tables()["records"]

# (3) Sort records by descending frequency: ties resolve by most recent last
# touch, then id, so the order is total and reproducible.
ordered = sort_entities(table.entities(), table, "frequency", "desc")
print("\nmost frequently visited:", ordered[:5])

# (4) A score filter keeps whatever happens to clear the cutoff; with ties it
# can return more (or fewer) movies than wanted.
half_or_more = filter_entities(table.entities(), table, "frequency", (0.5, 1.0))
print(f"frequency >= 0.5 matches {len(half_or_more)} movies: {half_or_more}")

# (5) top_n ranks first, so "show exactly three" means exactly three, ties or
# not. This is the rank-based fix for range filters overshooting.
exactly_three = top_n(table.entities(), table, "recency", 3)
print("three most recent:", exactly_three)
assert len(exactly_three) == 3
