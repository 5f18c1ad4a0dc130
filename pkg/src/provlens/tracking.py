"""Dataset ingestion, interaction normalization, and the provenance ledger.

The ledger is an append-only accumulator fed by a stream of interaction
events. Attribute-directed interactions (inspect, encode, filter, sort) and
record-directed interactions (mark hovers, table-row hovers) form two
independent scopes, each with its own event counter and rank sequence.
A direct interaction deposits one full unit on its target; a hover on an
aggregate mark splits one unit evenly across the mark's N constituent
records, all of which share the event's rank and timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import DatasetError, StaleSeqError, UnknownEntityError

DEFAULT_DWELL_THRESHOLD_MS = 250

ATTRIBUTE_KINDS = ("numerical", "categorical")

# Derived fields attached by the scoring layer; reserved so a dataset column
# can never shadow them.
PROVENANCE_FIELDS = ("frequency", "recency")

# Event kinds, partitioned by the scope they touch.
ATTRIBUTE_EVENT_KINDS = ("attribute-inspect", "encode-assign", "filter-apply", "sort-apply")
RECORD_EVENT_KINDS = ("record-hover", "table-row-hover")
EVENT_KINDS = ATTRIBUTE_EVENT_KINDS + RECORD_EVENT_KINDS
HOVER_KINDS = RECORD_EVENT_KINDS

SCOPES = ("attributes", "records")


@dataclass(frozen=True)
class AttributeDescriptor:
    """One dataset column: a unique name, a fixed kind, optional tooltip text."""

    name: str
    kind: str
    description: str | None = None

    def __post_init__(self):
        if self.kind not in ATTRIBUTE_KINDS:
            raise DatasetError(f"attribute {self.name!r}: unknown kind {self.kind!r}")


class Dataset:
    """Typed tabular data: an ordered attribute roster plus ordered records.

    Records are ``(record_id, values)`` pairs where ``values`` maps attribute
    names to scalars (float for numerical, str for categorical) or None.
    """

    def __init__(self, attributes: list[AttributeDescriptor], records: list[tuple[str, dict]]):
        self.attributes = list(attributes)
        self.records = [(rid, dict(values)) for rid, values in records]
        self._by_name = {a.name: a for a in self.attributes}
        self._by_id = dict(self.records)
        if len(self._by_name) != len(self.attributes):
            raise DatasetError("duplicate attribute names")
        if len(self._by_id) != len(self.records):
            dupes = [rid for rid, n in Counter(r[0] for r in self.records).items() if n > 1]
            raise DatasetError(f"duplicate record ids: {sorted(dupes)[:5]}")
        for name in self._by_name:
            if name in PROVENANCE_FIELDS:
                raise DatasetError(f"attribute name {name!r} is reserved for provenance fields")
        for rid, values in self.records:
            for key in values:
                if key not in self._by_name:
                    raise DatasetError(f"record {rid!r} has value for undeclared attribute {key!r}")

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def record_ids(self) -> list[str]:
        return [rid for rid, _ in self.records]

    def attribute(self, name: str) -> AttributeDescriptor:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownEntityError(f"unknown attribute {name!r}") from None

    def has_attribute(self, name: str) -> bool:
        return name in self._by_name

    def has_record(self, record_id: str) -> bool:
        return record_id in self._by_id

    def record_values(self, record_id: str) -> dict:
        try:
            return self._by_id[record_id]
        except KeyError:
            raise UnknownEntityError(f"unknown record {record_id!r}") from None

    def column(self, name: str) -> list:
        self.attribute(name)
        return [values.get(name) for _, values in self.records]

    def to_json_dict(self) -> dict:
        return {
            "attributes": [
                {"name": a.name, "kind": a.kind, "description": a.description}
                for a in self.attributes
            ],
            "records": [[rid, {k: values[k] for k in sorted(values)}] for rid, values in self.records],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Dataset":
        attributes = [
            AttributeDescriptor(a["name"], a["kind"], a.get("description"))
            for a in data["attributes"]
        ]
        records = [(rid, values) for rid, values in data["records"]]
        return cls(attributes, records)


def _parses_as_finite_real(value) -> bool:
    if value is None or isinstance(value, bool):
        return False
    try:
        return np.isfinite(float(value))
    except (TypeError, ValueError):
        return False


def _coerce(value, kind: str, *, attribute: str, row: int):
    if value is None or value == "":
        return None
    if kind == "numerical":
        if not _parses_as_finite_real(value):
            raise DatasetError(
                f"row {row}: value {value!r} for numerical attribute {attribute!r} "
                "is not a finite real"
            )
        return float(value)
    return str(value)


def load_dataset(
    source,
    format: str = "csv",
    schema: Mapping[str, str] | None = None,
    descriptions: Mapping[str, str] | None = None,
) -> Dataset:
    """Parse a CSV (RFC-4180) or JSON array-of-objects byte stream into a Dataset.

    Attribute kinds are inferred per column (every non-null value parses as a
    finite real -> numerical, otherwise categorical) unless overridden by the
    ``schema`` sidecar mapping. Record ids come from an ``id`` column when one
    exists, else they are assigned "r0", "r1", ... in row order.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    if format == "csv":
        names, rows = _parse_csv(text)
    elif format == "json-rows":
        names, rows = _parse_json_rows(text)
    else:
        raise DatasetError(f"unknown dataset format {format!r}")

    if not names:
        raise DatasetError("empty dataset: no attributes")
    if not rows:
        raise DatasetError("empty dataset: no records")

    schema = dict(schema or {})
    for name, kind in schema.items():
        if name not in names:
            raise DatasetError(f"schema sidecar names unknown attribute {name!r}")
        if kind not in ATTRIBUTE_KINDS:
            raise DatasetError(f"schema sidecar: unknown kind {kind!r} for {name!r}")

    kinds = {}
    for name in names:
        if name in schema:
            kinds[name] = schema[name]
            continue
        non_null = [row.get(name) for row in rows if row.get(name) not in (None, "")]
        kinds[name] = (
            "numerical" if non_null and all(_parses_as_finite_real(v) for v in non_null) else "categorical"
        )

    descriptions = descriptions or {}
    attributes = [AttributeDescriptor(n, kinds[n], descriptions.get(n)) for n in names]

    records = []
    for i, row in enumerate(rows):
        if "id" in names:
            rid = row.get("id")
            if rid in (None, ""):
                raise DatasetError(f"row {i + 1}: missing id value")
            rid = str(rid)
        else:
            rid = f"r{i}"
        values = {n: _coerce(row.get(n), kinds[n], attribute=n, row=i + 1) for n in names}
        records.append((rid, values))

    return Dataset(attributes, records)


def _parse_csv(text: str) -> tuple[list[str], list[dict]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty dataset: no header row") from None
    rows = []
    for i, cells in enumerate(reader):
        if not cells:
            continue
        if len(cells) != len(header):
            raise DatasetError(
                f"malformed row {i + 1}: expected {len(header)} fields, got {len(cells)}"
            )
        rows.append(dict(zip(header, cells)))
    return header, rows


def _parse_json_rows(text: str) -> tuple[list[str], list[dict]]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, list):
        raise DatasetError("json-rows input must be an array of objects")
    names: list[str] = []
    rows = []
    for i, item in enumerate(payload):
        if not isinstance(item, dict):
            raise DatasetError(f"malformed row {i + 1}: not an object")
        for key in item:
            if key not in names:
                names.append(key)
        rows.append(item)
    return names, rows


@dataclass(frozen=True)
class InteractionEvent:
    """One accepted user interaction.

    ``seq`` is assigned at ingestion and strictly increases within a session;
    timestamps are epoch milliseconds and never decrease in seq order. Hover
    kinds carry the measured dwell. An aggregate hover lists every constituent
    record id in ``record_targets``.
    """

    seq: int
    timestamp_ms: int
    kind: str
    attribute_targets: frozenset[str] = frozenset()
    record_targets: frozenset[str] = frozenset()
    dwell_ms: int | None = None
    aggregate: bool = False

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if not self.attribute_targets and not self.record_targets:
            raise ValueError("event must target at least one entity")
        if self.kind in HOVER_KINDS:
            if self.dwell_ms is None or self.dwell_ms < 0:
                raise ValueError(f"{self.kind} events carry a non-negative dwell_ms")
            if self.attribute_targets:
                raise ValueError(f"{self.kind} events target records only")
            if not self.aggregate and len(self.record_targets) != 1:
                raise ValueError("non-aggregate hover targets exactly one record")
        else:
            if self.record_targets:
                raise ValueError(f"{self.kind} events target attributes only")
            if len(self.attribute_targets) != 1:
                raise ValueError(f"{self.kind} events target exactly one attribute")
            if self.aggregate:
                raise ValueError("aggregate applies to record hovers only")

    @property
    def scope(self) -> str:
        return "records" if self.kind in HOVER_KINDS else "attributes"

    def to_json_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp_ms": self.timestamp_ms,
            "kind": self.kind,
            "attribute_targets": sorted(self.attribute_targets),
            "record_targets": sorted(self.record_targets),
            "dwell_ms": self.dwell_ms,
            "aggregate": self.aggregate,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "InteractionEvent":
        try:
            return cls(
                seq=int(data["seq"]),
                timestamp_ms=int(data["timestamp_ms"]),
                kind=data["kind"],
                attribute_targets=frozenset(data.get("attribute_targets") or ()),
                record_targets=frozenset(data.get("record_targets") or ()),
                dwell_ms=None if data.get("dwell_ms") is None else int(data["dwell_ms"]),
                aggregate=bool(data.get("aggregate", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"invalid event: {exc}") from None


@dataclass(frozen=True)
class RawAction:
    """A UI action descriptor, as reported by a client before normalization.

    ``attribute`` names the target of attribute-scoped kinds. Hover kinds name
    either a single ``record``, an explicit constituent ``records`` list, or a
    ``group`` of (attribute, value) that the dataset resolves to constituents.
    """

    kind: str
    attribute: str | None = None
    record: str | None = None
    records: tuple[str, ...] | None = None
    group: tuple[str, object] | None = None
    dwell_ms: int | None = None
    timestamp_ms: int | None = None
    action_id: str | None = None
    aggregate: bool = False


def _resolve_group(dataset: Dataset, attribute: str, value) -> list[str]:
    kind = dataset.attribute(attribute).kind
    if value is not None:
        value = float(value) if kind == "numerical" else str(value)
    return [rid for rid, values in dataset.records if values.get(attribute) == value]


def normalize_action(
    raw: RawAction,
    dataset: Dataset,
    *,
    dwell_threshold_ms: int = DEFAULT_DWELL_THRESHOLD_MS,
    next_seq: int = 1,
    timestamp_ms: int | None = None,
) -> list[InteractionEvent]:
    """Turn a raw UI action into zero or one interaction events.

    Returns an empty list for hovers under the dwell threshold and for
    attribute actions that target a provenance field (derived fields are not
    self-tracked). Everything else yields exactly one event with ``next_seq``
    assigned.
    """
    if raw.kind not in EVENT_KINDS:
        raise ValueError(f"unknown interaction kind {raw.kind!r}")

    ts = raw.timestamp_ms if raw.timestamp_ms is not None else timestamp_ms
    if ts is None:
        ts = time.time_ns() // 1_000_000

    if raw.kind in HOVER_KINDS:
        if raw.dwell_ms is None or raw.dwell_ms < 0:
            raise ValueError(f"{raw.kind} action must carry a non-negative dwell_ms")
        if raw.dwell_ms < dwell_threshold_ms:
            return []
        aggregate = raw.aggregate or raw.group is not None or (
            raw.records is not None and raw.record is None
        )
        if aggregate and raw.kind == "record-hover":
            if raw.records is not None:
                targets = list(raw.records)
            elif raw.group is not None:
                targets = _resolve_group(dataset, raw.group[0], raw.group[1])
            else:
                targets = []
            if not targets:
                raise ValueError("aggregate hover resolved to an empty record set")
            return [
                InteractionEvent(
                    seq=next_seq,
                    timestamp_ms=ts,
                    kind=raw.kind,
                    record_targets=frozenset(targets),
                    dwell_ms=raw.dwell_ms,
                    aggregate=True,
                )
            ]
        if raw.record is None:
            raise ValueError(f"{raw.kind} action must name a record")
        return [
            InteractionEvent(
                seq=next_seq,
                timestamp_ms=ts,
                kind=raw.kind,
                record_targets=frozenset([raw.record]),
                dwell_ms=raw.dwell_ms,
            )
        ]

    if raw.attribute is None:
        raise ValueError(f"{raw.kind} action must name an attribute")
    if raw.attribute in PROVENANCE_FIELDS:
        return []  # provenance fields are not self-tracked
    return [
        InteractionEvent(
            seq=next_seq,
            timestamp_ms=ts,
            kind=raw.kind,
            attribute_targets=frozenset([raw.attribute]),
        )
    ]


@dataclass(frozen=True)
class LedgerEntry:
    """Accumulated interaction units plus the (rank, timestamp) touch history."""

    entity: str
    units: float = 0.0
    touches: tuple[tuple[int, int], ...] = ()

    @property
    def last_touch(self) -> int:
        return self.touches[-1][0]

    @property
    def last_timestamp_ms(self) -> int:
        return self.touches[-1][1]


@dataclass(frozen=True)
class ProvenanceLedger:
    """Per-entity interaction units and touch history, split by scope.

    Immutable: ``apply_event`` returns a new ledger. Entity rosters are carried
    along so phantom entities are rejected at the door.
    """

    attribute_roster: tuple[str, ...]
    record_roster: tuple[str, ...]
    attribute_entries: dict[str, LedgerEntry] = field(default_factory=dict)
    record_entries: dict[str, LedgerEntry] = field(default_factory=dict)
    attribute_event_count: int = 0
    record_event_count: int = 0
    dwell_threshold_ms: int = DEFAULT_DWELL_THRESHOLD_MS
    last_seq: int = 0

    @classmethod
    def for_dataset(
        cls, dataset: Dataset, dwell_threshold_ms: int = DEFAULT_DWELL_THRESHOLD_MS
    ) -> "ProvenanceLedger":
        return cls(
            attribute_roster=tuple(dataset.attribute_names),
            record_roster=tuple(dataset.record_ids),
            dwell_threshold_ms=dwell_threshold_ms,
        )

    def roster(self, scope: str) -> tuple[str, ...]:
        _check_scope(scope)
        return self.attribute_roster if scope == "attributes" else self.record_roster

    def entries(self, scope: str) -> dict[str, LedgerEntry]:
        _check_scope(scope)
        return self.attribute_entries if scope == "attributes" else self.record_entries

    def event_count(self, scope: str) -> int:
        _check_scope(scope)
        return self.attribute_event_count if scope == "attributes" else self.record_event_count

    def serialize(self) -> str:
        """Canonical JSON form; byte-identical for identical ledger states."""
        payload = {
            "attribute_event_count": self.attribute_event_count,
            "record_event_count": self.record_event_count,
            "dwell_threshold_ms": self.dwell_threshold_ms,
            "last_seq": self.last_seq,
            "attribute_entries": {
                name: {"units": e.units, "touches": [list(t) for t in e.touches]}
                for name, e in sorted(self.attribute_entries.items())
            },
            "record_entries": {
                rid: {"units": e.units, "touches": [list(t) for t in e.touches]}
                for rid, e in sorted(self.record_entries.items())
            },
        }
        return json.dumps(payload, separators=(",", ":"))


def _check_scope(scope: str):
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")


def apply_event(ledger: ProvenanceLedger, event: InteractionEvent) -> ProvenanceLedger:
    """Fold one event into the ledger, returning the successor state.

    Attribute targets gain +1 unit. Record targets gain +1, or +1/N each when
    the hover was on an aggregate mark of N constituents. Every touched entity
    is stamped with the same (scope rank, timestamp) pair, and the touched
    scope's event count advances by one.
    """
    if event.seq <= ledger.last_seq:
        raise StaleSeqError(
            f"event seq {event.seq} not greater than applied seq {ledger.last_seq}"
        )

    if event.scope == "attributes":
        roster = set(ledger.attribute_roster)
        for name in event.attribute_targets:
            if name not in roster:
                raise UnknownEntityError(f"unknown attribute {name!r}")
        rank = ledger.attribute_event_count + 1
        entries = dict(ledger.attribute_entries)
        for name in event.attribute_targets:
            entries[name] = _touch(entries.get(name), name, 1.0, rank, event.timestamp_ms)
        return replace(
            ledger,
            attribute_entries=entries,
            attribute_event_count=rank,
            last_seq=event.seq,
        )

    roster = set(ledger.record_roster)
    for rid in event.record_targets:
        if rid not in roster:
            raise UnknownEntityError(f"unknown record {rid!r}")
    rank = ledger.record_event_count + 1
    delta = 1.0 / len(event.record_targets) if event.aggregate else 1.0
    entries = dict(ledger.record_entries)
    for rid in event.record_targets:
        entries[rid] = _touch(entries.get(rid), rid, delta, rank, event.timestamp_ms)
    return replace(
        ledger,
        record_entries=entries,
        record_event_count=rank,
        last_seq=event.seq,
    )


def _touch(entry: LedgerEntry | None, entity: str, delta: float, rank: int, ts: int) -> LedgerEntry:
    if entry is None:
        entry = LedgerEntry(entity)
    return LedgerEntry(entity, entry.units + delta, entry.touches + ((rank, ts),))


def attribute_profile(dataset: Dataset, name: str) -> dict:
    """Summarize one attribute's value distribution as percentage counts.

    Numerical attributes report the five quartile boundaries (sorted-rank
    quantiles with linear interpolation) and the percentage of non-null values
    falling in each of the four quartile bins. Categorical attributes report
    the percentage per category in first-appearance order. Nulls are excluded
    from both and reported separately as ``null_pct``.
    """
    descriptor = dataset.attribute(name)
    column = dataset.column(name)
    non_null = [v for v in column if v is not None]
    null_pct = 100.0 * (len(column) - len(non_null)) / len(column)

    profile: dict = {"attribute": name, "kind": descriptor.kind, "null_pct": null_pct}
    if descriptor.kind == "numerical":
        if not non_null:
            profile["quartiles"] = []
            profile["bin_pcts"] = []
            return profile
        quartiles = [float(q) for q in np.quantile(non_null, [0.0, 0.25, 0.5, 0.75, 1.0])]
        counts = [0, 0, 0, 0]
        for v in non_null:
            for b in range(4):
                upper_ok = v <= quartiles[b + 1] if b == 3 else v < quartiles[b + 1]
                if quartiles[b] <= v and upper_ok:
                    counts[b] += 1
                    break
        profile["quartiles"] = quartiles
        profile["bin_pcts"] = [100.0 * c / len(non_null) for c in counts]
        return profile

    if not non_null:
        profile["categories"] = {}
        return profile
    counts = Counter()
    order = []
    for v in non_null:
        if v not in counts:
            order.append(v)
        counts[v] += 1
    profile["categories"] = {c: 100.0 * counts[c] / len(non_null) for c in order}
    return profile
