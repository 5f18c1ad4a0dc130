"""Frequency and recency provenance scores.

Both metrics are normalized to [0, 1] per scope. The default relative
strategy divides an entity's accumulated units by the scope maximum
(frequency) and its most recent interaction's serial rank by the scope's
event count (recency), so the interactions are spread evenly between 0 and 1.
Absolute and binary variants of both metrics are also provided, plus dense
ordinal ranks with a deterministic tie policy for exact top-N selection.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tracking import ProvenanceLedger

SCORE_MODES = ("relative", "absolute", "binary")
METRICS = ("frequency", "recency")

_MODE_ALIASES = {
    "rel": "relative",
    "abs": "absolute",
    "bin": "binary",
    "relative": "relative",
    "absolute": "absolute",
    "binary": "binary",
}


@dataclass(frozen=True)
class Strategy:
    """The scoring mode for each provenance metric. Defaults to relative/relative."""

    frequency_mode: str = "relative"
    recency_mode: str = "relative"

    def __post_init__(self):
        for mode in (self.frequency_mode, self.recency_mode):
            if mode not in SCORE_MODES:
                raise ValueError(f"unknown score mode {mode!r}")

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """Parse "rel", "absolute", or a "freq:rec" pair like "rel:bin"."""
        parts = text.split(":")
        if len(parts) == 1:
            parts = [parts[0], parts[0]]
        if len(parts) != 2:
            raise ValueError(f"cannot parse strategy {text!r}")
        modes = []
        for part in parts:
            mode = _MODE_ALIASES.get(part.strip().lower())
            if mode is None:
                raise ValueError(f"unknown score mode {part!r}")
            modes.append(mode)
        return cls(*modes)

    def to_json_dict(self) -> dict:
        return {"frequency_mode": self.frequency_mode, "recency_mode": self.recency_mode}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Strategy":
        return cls(data["frequency_mode"], data["recency_mode"])


def frequency_scores(ledger: ProvenanceLedger, scope: str, mode: str = "relative") -> dict[str, float]:
    """Per-entity frequency in [0, 1] over the full scope roster.

    relative: units / max units; absolute: units / total units; binary: 1 if
    ever interacted. All zero when the scope has no interactions.
    """
    _check_mode(mode)
    entries = ledger.entries(scope)
    units = {entity: entries[entity].units if entity in entries else 0.0 for entity in ledger.roster(scope)}
    if mode == "binary":
        return {entity: 1.0 if u > 0 else 0.0 for entity, u in units.items()}
    denom = max(units.values(), default=0.0) if mode == "relative" else sum(units.values())
    if denom <= 0:
        return {entity: 0.0 for entity in units}
    return {entity: u / denom for entity, u in units.items()}


def recency_scores(ledger: ProvenanceLedger, scope: str, mode: str = "relative") -> dict[str, float]:
    """Per-entity recency in [0, 1] over the full scope roster.

    relative: rank of the entity's last touch over the scope's event count;
    absolute: last-touch timestamp normalized between the scope's first and
    last event timestamps; binary: 1 only for entities stamped by the scope's
    last event. Entities never touched score 0 in every mode.
    """
    _check_mode(mode)
    entries = ledger.entries(scope)
    total = ledger.event_count(scope)
    scores = {entity: 0.0 for entity in ledger.roster(scope)}
    if total == 0:
        return scores

    if mode == "relative":
        for entity, entry in entries.items():
            scores[entity] = entry.last_touch / total
        return scores

    if mode == "binary":
        for entity, entry in entries.items():
            scores[entity] = 1.0 if entry.last_touch == total else 0.0
        return scores

    first_ts = min(e.touches[0][1] for e in entries.values() if e.touches[0][0] == 1)
    last_ts = max(e.last_timestamp_ms for e in entries.values())
    span = last_ts - first_ts
    for entity, entry in entries.items():
        if total <= 1 or span == 0:
            scores[entity] = 1.0
        else:
            scores[entity] = (entry.last_timestamp_ms - first_ts) / span
    return scores


def provenance_ranks(
    ledger: ProvenanceLedger,
    scope: str,
    metric: str,
    strategy: Strategy | None = None,
) -> dict[str, int]:
    """Ordinal rank per interacted entity: 1 is the highest score in scope.

    Ranks are dense (1..k over the k interacted entities) because ties are
    broken into a total order: more recent last touch first, then lexicographic
    entity id. Uninteracted entities are unranked.
    """
    strategy = strategy or Strategy()
    scores = _metric_scores(ledger, scope, metric, strategy)
    entries = ledger.entries(scope)
    interacted = [entity for entity in ledger.roster(scope) if entity in entries]
    ordered = sorted(
        interacted,
        key=lambda entity: (-scores[entity], -entries[entity].last_touch, entity),
    )
    return {entity: i + 1 for i, entity in enumerate(ordered)}


def _metric_scores(ledger, scope, metric, strategy):
    if metric == "frequency":
        return frequency_scores(ledger, scope, strategy.frequency_mode)
    if metric == "recency":
        return recency_scores(ledger, scope, strategy.recency_mode)
    raise ValueError(f"unknown provenance metric {metric!r}")


@dataclass(frozen=True)
class ScoreRow:
    frequency: float
    recency: float
    rank_frequency: int | None
    rank_recency: int | None
    # Scope rank of the entity's latest touch; feeds the tie policy. Not part
    # of the wire format.
    last_touch: int | None = None


@dataclass(frozen=True)
class ScoreTable:
    """Both provenance metrics plus ordinal ranks for one scope, roster order."""

    scope: str
    rows: dict[str, ScoreRow]

    def entities(self) -> list[str]:
        return list(self.rows)

    def interacted(self) -> list[str]:
        return [entity for entity, row in self.rows.items() if row.last_touch is not None]

    def score(self, entity: str, metric: str) -> float:
        row = self.rows[entity]
        if metric == "frequency":
            return row.frequency
        if metric == "recency":
            return row.recency
        raise ValueError(f"unknown provenance metric {metric!r}")

    def rank(self, entity: str, metric: str) -> int | None:
        row = self.rows[entity]
        if metric == "frequency":
            return row.rank_frequency
        if metric == "recency":
            return row.rank_recency
        raise ValueError(f"unknown provenance metric {metric!r}")

    def to_json_dict(self) -> dict:
        return {
            "scope": self.scope,
            "rows": {
                entity: {
                    "frequency": row.frequency,
                    "recency": row.recency,
                    "rank_frequency": row.rank_frequency,
                    "rank_recency": row.rank_recency,
                }
                for entity, row in self.rows.items()
            },
        }


def score_table(ledger: ProvenanceLedger, scope: str, strategy: Strategy | None = None) -> ScoreTable:
    """Join the two score maps and ordinal ranks into one table."""
    strategy = strategy or Strategy()
    freq = frequency_scores(ledger, scope, strategy.frequency_mode)
    rec = recency_scores(ledger, scope, strategy.recency_mode)
    rank_f = provenance_ranks(ledger, scope, "frequency", strategy)
    rank_r = provenance_ranks(ledger, scope, "recency", strategy)
    entries = ledger.entries(scope)
    rows = {}
    for entity in ledger.roster(scope):
        entry = entries.get(entity)
        rows[entity] = ScoreRow(
            frequency=freq[entity],
            recency=rec[entity],
            rank_frequency=rank_f.get(entity),
            rank_recency=rank_r.get(entity),
            last_touch=entry.last_touch if entry else None,
        )
    return ScoreTable(scope=scope, rows=rows)


def _check_mode(mode: str):
    if mode not in SCORE_MODES:
        raise ValueError(f"unknown score mode {mode!r}")
