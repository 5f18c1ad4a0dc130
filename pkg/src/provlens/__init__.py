"""provlens: interaction provenance as first-class data attributes.

Track a user's interactions with data attributes and records, model them as
two normalized provenance attributes (frequency, recency), and expose those
as encodable, sortable, filterable fields — with bit-exact session
export/import for post-hoc audit.
"""

from .errors import (
    BadSpecError,
    DatasetError,
    HashMismatchError,
    InvalidModeError,
    LogFormatError,
    ProvenanceError,
    StaleSeqError,
    UnknownEntityError,
)
from .glyphspec import (
    AugmentedTable,
    ChannelBinding,
    VisSpec,
    aggregate_series,
    augmented_table,
    bind_spec_data,
    build_vis_spec,
    resolve_scale,
)
from .scoring import (
    ScoreRow,
    ScoreTable,
    Strategy,
    frequency_scores,
    provenance_ranks,
    recency_scores,
    score_table,
)
from .session import (
    SessionState,
    dataset_hash,
    export_log,
    import_log,
    replay,
    restore,
    snapshot,
)
from .tracking import (
    AttributeDescriptor,
    Dataset,
    InteractionEvent,
    LedgerEntry,
    ProvenanceLedger,
    RawAction,
    apply_event,
    attribute_profile,
    load_dataset,
    normalize_action,
)
from .transform import TransformSpec, apply_transforms, filter_entities, sort_entities, top_n

__version__ = "0.1.0"

__all__ = [
    "AttributeDescriptor",
    "AugmentedTable",
    "BadSpecError",
    "ChannelBinding",
    "Dataset",
    "DatasetError",
    "HashMismatchError",
    "InteractionEvent",
    "InvalidModeError",
    "LedgerEntry",
    "LogFormatError",
    "ProvenanceError",
    "ProvenanceLedger",
    "RawAction",
    "ScoreRow",
    "ScoreTable",
    "SessionState",
    "StaleSeqError",
    "Strategy",
    "TransformSpec",
    "UnknownEntityError",
    "VisSpec",
    "aggregate_series",
    "apply_event",
    "apply_transforms",
    "attribute_profile",
    "augmented_table",
    "bind_spec_data",
    "build_vis_spec",
    "dataset_hash",
    "export_log",
    "filter_entities",
    "frequency_scores",
    "import_log",
    "load_dataset",
    "normalize_action",
    "provenance_ranks",
    "recency_scores",
    "replay",
    "resolve_scale",
    "restore",
    "score_table",
    "snapshot",
    "sort_entities",
    "top_n",
]
