# Declarative visualization specs where frequency/recency bind to channels
# exactly like data columns: glyph designs, reversed scales, aggregation.

import random
from pathlib import Path

from provlens import (
    ChannelBinding,
    RawAction,
    SessionState,
    TransformSpec,
    bind_spec_data,
    build_vis_spec,
    load_dataset,
    resolve_scale,
)

DATA = Path(__file__).parent / "data" / "movies.csv"
dataset = load_dataset(DATA.read_bytes(), "csv")

rng = random.Random(11)
state = SessionState(mode="edit", dataset=dataset)
ts = 1_000
for _ in range(30):
    ts += rng.randint(1, 50)
    if rng.random() < 0.4:
        state.record_action(RawAction(kind="encode-assign",
                                      attribute=rng.choice(dataset.attribute_names),
                                      timestamp_ms=ts))
    else:
        state.record_action(RawAction(kind="record-hover",
                                      record=rng.choice(dataset.record_ids),
                                      dwell_ms=rng.randint(260, 700), timestamp_ms=ts))
tables = state.score_tables()

# (1) An attribute-panel glyph: bar mark, fill encodes frequency. The heaviest
# attribute renders darkest; the canonical JSON is what a renderer consumes.
glyph = build_vis_spec(
    "bar",
    [ChannelBinding(channel="fill", field="frequency")],
    [],
    "attributes",
    dataset,
)
print("glyph spec:", glyph.to_json())

# (2) A sorted, filtered panel: point on x by frequency, descending, keeping
# only attributes at or above half the maximum focus.
panel = build_vis_spec(
    "point",
    [ChannelBinding(channel="x", field="frequency")],
    [
        TransformSpec(kind="sort", metric="frequency", direction="desc"),
        TransformSpec(kind="filter", metric="frequency", range=(0.5, 1.0)),
    ],
    "attributes",
    dataset,
)
rows = bind_spec_data(panel, dataset, tables["records"], tables["attributes"])
print("\npanel rows (frequency >= 0.5, descending):")
for row in rows:
    print(f"  {row['attribute']:24s} {row['frequency']:.2f}")

# (3) Reversed scales flip positions without touching scores: useful when
# visited points should shrink instead of grow.
binding = ChannelBinding(channel="size", field="recency", scale_reverse=True)
values = [0.0, 0.25, 1.0]
print("\nreversed size positions for", values, "->", resolve_scale(binding, values))

# (4) The reviewer's genre bar chart: Genre on x, summed frequency on y.
# Short bars expose barely-explored genres at a glance.
genre_focus = build_vis_spec(
    "bar",
    [
        ChannelBinding(channel="x", field="Genre"),
        ChannelBinding(channel="y", field="frequency", aggregate="sum"),
    ],
    [],
    "records",
    dataset,
)
print("\ntotal focus by genre:")
for row in bind_spec_data(genre_focus, dataset, tables["records"], tables["attributes"]):
    print(f"  {row['Genre']:10s} {row['frequency']:.2f}")
