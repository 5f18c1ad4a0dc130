"""Provenance-driven data transformations: sort, range filter, exact top-N.

Transforms are pure views over a ScoreTable snapshot; they never mutate
scores. ``top_n`` selects by ordinal rank rather than score so it returns an
exact cardinality even when scores tie.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownEntityError
from .scoring import METRICS, ScoreTable
from .tracking import Dataset

TRANSFORM_KINDS = ("sort", "filter", "topn")
DIRECTIONS = ("asc", "desc")


@dataclass(frozen=True)
class TransformSpec:
    """One declarative transform over a provenance metric or data attribute."""

    kind: str
    metric: str
    direction: str = "desc"
    range: tuple[float, float] | None = None
    values: tuple[str, ...] | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "sort" and self.direction not in DIRECTIONS:
            raise ValueError(f"unknown sort direction {self.direction!r}")
        if self.kind == "filter" and self.range is None and self.values is None:
            raise ValueError("filter transform needs a range or a value set")
        if self.range is not None:
            lo, hi = self.range
            if lo > hi:
                raise ValueError(f"inverted range [{lo}, {hi}]")
            if self.metric in METRICS and (lo < 0.0 or hi > 1.0):
                raise ValueError(f"provenance range [{lo}, {hi}] not within [0, 1]")
        if self.kind == "topn":
            if self.n is None or self.n < 1:
                raise ValueError("topn transform needs n >= 1")

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind, "metric": self.metric}
        if self.kind == "sort":
            out["direction"] = self.direction
        if self.range is not None:
            out["range"] = list(self.range)
        if self.values is not None:
            out["values"] = list(self.values)
        if self.n is not None:
            out["n"] = self.n
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "TransformSpec":
        rng = data.get("range")
        values = data.get("values")
        return cls(
            kind=data.get("kind", ""),
            metric=data.get("metric", ""),
            direction=data.get("direction", "desc"),
            range=None if rng is None else (float(rng[0]), float(rng[1])),
            values=None if values is None else tuple(str(v) for v in values),
            n=data.get("n"),
        )


def _metric_values(entities, table: ScoreTable, metric: str, dataset: Dataset | None):
    if metric in METRICS:
        return {e: table.score(e, metric) for e in entities}
    if dataset is not None and dataset.has_attribute(metric):
        if table.scope != "records":
            raise UnknownEntityError(f"data attribute {metric!r} only orders records")
        return {e: dataset.record_values(e).get(metric) for e in entities}
    raise UnknownEntityError(f"unknown metric {metric!r}")


def _tie_key(table: ScoreTable, entity: str):
    # More recent last touch first, then lexicographic id; untouched entities
    # sort as least recent.
    last = table.rows[entity].last_touch or 0
    return (-last, entity)


def sort_entities(
    entities: list[str],
    table: ScoreTable,
    metric: str,
    direction: str = "desc",
    dataset: Dataset | None = None,
) -> list[str]:
    """Total order by a provenance metric or data attribute value.

    Ties always resolve by the scoring tie policy (most recent last touch
    first, then id); null data values sort last in either direction.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown sort direction {direction!r}")
    values = _metric_values(entities, table, metric, dataset)
    present = [e for e in entities if values[e] is not None]
    missing = sorted((e for e in entities if values[e] is None), key=lambda e: _tie_key(table, e))
    ordered = sorted(present, key=lambda e: _tie_key(table, e))
    ordered.sort(key=lambda e: values[e], reverse=direction == "desc")
    return ordered + missing


def filter_entities(
    entities: list[str],
    table: ScoreTable,
    metric: str,
    range: tuple[float, float] | None = None,
    values: tuple[str, ...] | None = None,
    dataset: Dataset | None = None,
) -> list[str]:
    """Keep exactly the entities whose metric falls in [lo, hi] (inclusive both
    ends) or whose value is in the given category set. Input order preserved."""
    metric_values = _metric_values(entities, table, metric, dataset)
    if values is not None:
        allowed = set(values)
        return [e for e in entities if metric_values[e] is not None and str(metric_values[e]) in allowed]
    if range is None:
        raise ValueError("filter needs a range or a value set")
    lo, hi = range
    if lo > hi:
        raise ValueError(f"inverted range [{lo}, {hi}]")
    if metric in METRICS and (lo < 0.0 or hi > 1.0):
        raise ValueError(f"provenance range [{lo}, {hi}] not within [0, 1]")
    return [e for e in entities if metric_values[e] is not None and lo <= metric_values[e] <= hi]


def top_n(entities: list[str], table: ScoreTable, metric: str, n: int) -> list[str]:
    """The first n entities by ordinal provenance rank.

    Always returns exactly min(n, #interacted) entities: rank order is a total
    order, so score ties cannot inflate or deflate the result.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if metric not in METRICS:
        raise UnknownEntityError(f"unknown provenance metric {metric!r}")
    ranked = [e for e in entities if table.rank(e, metric) is not None]
    ranked.sort(key=lambda e: table.rank(e, metric))
    return ranked[:n]


def apply_transforms(
    entities: list[str],
    table: ScoreTable,
    specs: list[TransformSpec],
    dataset: Dataset | None = None,
) -> list[str]:
    """Fold an ordered transform list over an entity list."""
    out = list(entities)
    for spec in specs:
        if spec.kind == "sort":
            out = sort_entities(out, table, spec.metric, spec.direction, dataset)
        elif spec.kind == "filter":
            out = filter_entities(out, table, spec.metric, spec.range, spec.values, dataset)
        else:
            out = top_n(out, table, spec.metric, spec.n)
    return out
