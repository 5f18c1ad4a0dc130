"""Declarative visualization specs where provenance fields are first-class.

A VisSpec is renderer-facing JSON (mark + channel bindings + transforms), not
drawing commands, so any grammar-of-graphics renderer can consume it.
Provenance fields are always quantitative with a fixed [0, 1] domain, which
keeps encodings comparable across time and sessions. Glyph specs (the
attribute-panel rendering) restrict marks to point/bar/text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import BadSpecError
from .scoring import METRICS, ScoreTable
from .tracking import Dataset
from .transform import TransformSpec, apply_transforms

SPEC_VERSION = 1

MARK_TYPES = ("point", "bar", "line", "area", "text")
GLYPH_MARKS = ("point", "bar", "text")

# Canonical channel order; also the serialization order.
CHANNELS = (
    "x",
    "y",
    "column",
    "row",
    "fill",
    "fillOpacity",
    "stroke",
    "strokeOpacity",
    "strokeWidth",
    "size",
    "shape",
    "tooltip",
    "text",
    "annotation",
)

# Channels that render values directly and carry no scale.
SCALELESS_CHANNELS = ("tooltip", "text", "annotation")

AGGREGATE_OPS = ("sum", "mean", "count")

POSITIONAL_MARKS = ("point", "bar", "line", "area")


@dataclass(frozen=True)
class ChannelBinding:
    """One field assigned to one encoding channel.

    ``field_kind`` is resolved against the dataset during validation;
    provenance fields are always quantitative.
    """

    channel: str
    field: str
    aggregate: str | None = None
    scale_reverse: bool = False
    field_kind: str = "quantitative"


@dataclass(frozen=True)
class VisSpec:
    """A validated mark + bindings + transforms description for one scope."""

    mark: str
    scope: str
    bindings: tuple[ChannelBinding, ...]
    transforms: tuple[TransformSpec, ...] = ()

    def binding(self, channel: str) -> ChannelBinding | None:
        for b in self.bindings:
            if b.channel == channel:
                return b
        return None

    def to_json_dict(self) -> dict:
        encodings = {}
        for channel in CHANNELS:
            b = self.binding(channel)
            if b is None:
                continue
            enc: dict = {"field": b.field, "kind": b.field_kind}
            if b.aggregate is not None:
                enc["aggregate"] = b.aggregate
            if b.scale_reverse:
                enc["reverse"] = True
            encodings[channel] = enc
        return {
            "spec_version": SPEC_VERSION,
            "mark": self.mark,
            "scope": self.scope,
            "encodings": encodings,
            "transforms": [t.to_json_dict() for t in self.transforms],
        }

    def to_json(self) -> str:
        """Canonical serialization: fixed key order, compact separators."""
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict, dataset: Dataset) -> "VisSpec":
        if not isinstance(data, dict):
            raise BadSpecError("spec must be a JSON object")
        version = data.get("spec_version", SPEC_VERSION)
        if version != SPEC_VERSION:
            raise BadSpecError(f"unsupported spec_version {version!r}")
        encodings = data.get("encodings", {})
        if not isinstance(encodings, dict):
            raise BadSpecError("encodings must be an object keyed by channel")
        bindings = []
        for channel, enc in encodings.items():
            if not isinstance(enc, dict) or "field" not in enc:
                raise BadSpecError(f"channel {channel!r}: binding needs a field")
            bindings.append(
                ChannelBinding(
                    channel=channel,
                    field=enc["field"],
                    aggregate=enc.get("aggregate"),
                    scale_reverse=bool(enc.get("reverse", False)),
                )
            )
        try:
            transforms = [TransformSpec.from_json_dict(t) for t in data.get("transforms", [])]
        except (ValueError, TypeError, KeyError, IndexError) as exc:
            raise BadSpecError(f"bad transform: {exc}") from None
        return build_vis_spec(
            mark=data.get("mark", ""),
            bindings=bindings,
            transforms=transforms,
            scope=data.get("scope", "records"),
            dataset=dataset,
        )


def _known_field_kind(field: str, dataset: Dataset) -> str:
    if field in METRICS:
        return "quantitative"
    if dataset.has_attribute(field):
        return "quantitative" if dataset.attribute(field).kind == "numerical" else "nominal"
    raise BadSpecError(f"unknown field {field!r}")


def build_vis_spec(
    mark: str,
    bindings: list[ChannelBinding],
    transforms: list[TransformSpec],
    scope: str,
    dataset: Dataset,
) -> VisSpec:
    """Validate and assemble a VisSpec.

    Rejects unknown marks/channels/fields, duplicate channels, shape bound to
    a quantitative field, missing x/y on positional marks, and line/area in
    the attribute-glyph context (those marks need at least two values).
    """
    if mark not in MARK_TYPES:
        raise BadSpecError(f"unknown mark {mark!r}")
    if scope not in ("records", "attributes"):
        raise BadSpecError(f"unknown scope {scope!r}")
    if scope == "attributes" and mark not in GLYPH_MARKS:
        raise BadSpecError(f"mark {mark!r} is not available for attribute glyphs")

    seen = set()
    checked = []
    for b in bindings:
        if b.channel not in CHANNELS:
            raise BadSpecError(f"unknown channel {b.channel!r}")
        if b.channel in seen:
            raise BadSpecError(f"duplicate binding for channel {b.channel!r}")
        seen.add(b.channel)
        kind = _known_field_kind(b.field, dataset)
        if b.channel == "shape" and kind != "nominal":
            raise BadSpecError("shape accepts only categorical fields")
        if b.aggregate is not None and b.aggregate not in AGGREGATE_OPS:
            raise BadSpecError(f"unknown aggregate {b.aggregate!r}")
        checked.append(
            ChannelBinding(
                channel=b.channel,
                field=b.field,
                aggregate=b.aggregate,
                scale_reverse=b.scale_reverse,
                field_kind=kind,
            )
        )

    # Attribute glyphs sit on panel rows, so a lone fill/size/... binding is
    # enough there; main-visualization marks need a position.
    if scope == "records" and mark in POSITIONAL_MARKS and not ({"x", "y"} & seen):
        raise BadSpecError(f"mark {mark!r} needs an x or y binding")

    for t in transforms:
        if t.metric not in METRICS and not dataset.has_attribute(t.metric):
            raise BadSpecError(f"transform names unknown metric {t.metric!r}")

    ordered = tuple(sorted(checked, key=lambda b: CHANNELS.index(b.channel)))
    return VisSpec(mark=mark, scope=scope, bindings=ordered, transforms=tuple(transforms))


def resolve_scale(binding: ChannelBinding, values: list[float]) -> list[float]:
    """Map normalized values to channel positions: identity, or 1−v when the
    binding's scale is reversed. Scaleless channels have no positions."""
    if binding.channel in SCALELESS_CHANNELS:
        raise BadSpecError(f"channel {binding.channel!r} has no scale")
    if binding.scale_reverse:
        return [1.0 - v for v in values]
    return list(values)


@dataclass(frozen=True)
class AugmentedTable:
    """Dataset rows with provenance columns, plus the attribute side table."""

    records: list[dict]
    attributes: list[dict]


def augmented_table(
    dataset: Dataset,
    record_scores: ScoreTable,
    attribute_scores: ScoreTable,
) -> AugmentedTable:
    """Join score tables onto the dataset.

    Every record row gains ``frequency`` and ``recency`` columns that behave
    exactly like data columns; a side table carries per-attribute scores.
    """
    if record_scores.scope != "records" or attribute_scores.scope != "attributes":
        raise BadSpecError(
            f"scope mismatch: got ({record_scores.scope!r}, {attribute_scores.scope!r}), "
            "expected ('records', 'attributes')"
        )
    if list(record_scores.rows) != dataset.record_ids or list(attribute_scores.rows) != dataset.attribute_names:
        raise BadSpecError("score tables were not derived from this dataset")

    records = []
    for rid, values in dataset.records:
        row = {"id": rid}
        for name in dataset.attribute_names:
            row[name] = values.get(name)
        score = record_scores.rows[rid]
        row["frequency"] = score.frequency
        row["recency"] = score.recency
        records.append(row)

    attributes = []
    for name in dataset.attribute_names:
        score = attribute_scores.rows[name]
        attributes.append({"attribute": name, "frequency": score.frequency, "recency": score.recency})
    return AugmentedTable(records=records, attributes=attributes)


def aggregate_series(spec: VisSpec, table: AugmentedTable, dataset: Dataset) -> list[dict]:
    """Group augmented rows by the spec's categorical channel and aggregate the
    bound field per group ({sum, mean, count}). Groups with no rows are simply
    absent; rows with a null grouping value are dropped."""
    agg_bindings = [b for b in spec.bindings if b.aggregate is not None]
    if len(agg_bindings) != 1:
        raise BadSpecError("aggregation needs exactly one aggregate binding")
    agg = agg_bindings[0]

    group_fields = []
    for b in spec.bindings:
        if b.channel == agg.channel or b.channel in SCALELESS_CHANNELS:
            continue
        if b.field_kind == "nominal" and b.field not in group_fields:
            group_fields.append(b.field)
    if len(group_fields) != 1:
        raise BadSpecError("aggregation needs exactly one categorical grouping channel")
    group_field = group_fields[0]

    groups: dict = {}
    order = []
    for row in table.records:
        key = row.get(group_field)
        if key is None:
            continue
        if key not in groups:
            groups[key] = []
            order.append(key)
        value = row.get(agg.field)
        if value is not None:
            groups[key].append(float(value))

    out = []
    for key in order:
        values = groups[key]
        if not values:
            continue
        if agg.aggregate == "sum":
            result = sum(values)
        elif agg.aggregate == "mean":
            result = sum(values) / len(values)
        else:
            result = float(len(values))
        out.append({group_field: key, agg.field: result})
    return out


def bind_spec_data(
    spec: VisSpec,
    dataset: Dataset,
    record_scores: ScoreTable,
    attribute_scores: ScoreTable,
) -> list[dict]:
    """Produce render-ready rows for a spec: augmented rows in transform order,
    aggregated when the spec carries an aggregate binding."""
    table = augmented_table(dataset, record_scores, attribute_scores)
    if spec.scope == "attributes":
        rows = {r["attribute"]: r for r in table.attributes}
        entities = apply_transforms(list(rows), attribute_scores, list(spec.transforms))
        return [rows[e] for e in entities]

    rows = {r["id"]: r for r in table.records}
    entities = apply_transforms(list(rows), record_scores, list(spec.transforms), dataset)
    selected = [rows[e] for e in entities]
    if any(b.aggregate is not None for b in spec.bindings):
        return aggregate_series(spec, AugmentedTable(records=selected, attributes=table.attributes), dataset)
    return selected
