"""Command-line tool: serve the API, replay logs, audit and export provenance.

Outputs are byte-deterministic for fixed inputs and flags; floats print with
six significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .errors import ProvenanceError
from .glyphspec import VisSpec, bind_spec_data
from .scoring import Strategy, score_table
from .session import import_log
from .tracking import Dataset, load_dataset
from .transform import top_n


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _read_dataset(path: str, schema_path: str | None = None, fmt: str | None = None) -> Dataset:
    if fmt is None:
        fmt = "json-rows" if path.lower().endswith(".json") else "csv"
    schema = None
    if schema_path:
        with open(schema_path, "r", encoding="utf-8") as fh:
            schema = json.load(fh)
    with open(path, "rb") as fh:
        return load_dataset(fh.read(), fmt, schema=schema)


def _read_session(dataset: Dataset, log_path: str, override_hash: bool = False):
    with open(log_path, "rb") as fh:
        return import_log(fh.read(), dataset, mode="view", override_hash=override_hash)


def _print_table(table, out) -> None:
    header = ["entity", "frequency", "recency", "rank_frequency", "rank_recency"]
    rows = [
        [entity, _fmt(r.frequency), _fmt(r.recency), _fmt(r.rank_frequency), _fmt(r.rank_recency)]
        for entity, r in table.rows.items()
    ]
    widths = [max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i]) for i in range(5)]
    out.write("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() + "\n")


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        data_dir=args.data_dir,
        default_dwell_ms=args.dwell_ms,
        token=os.environ.get("PROVLENS_TOKEN"),
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _scope_name(value: str | None) -> str | None:
    return "attributes" if value == "attrs" else value


def cmd_replay(args) -> int:
    dataset = _read_dataset(args.dataset, args.schema)
    state = _read_session(dataset, args.log, args.override_hash)
    strategy = Strategy.parse(args.strategy) if args.strategy else state.strategy
    scope = _scope_name(args.scope)
    scopes = [scope] if scope else ["attributes", "records"]
    tables = {scope: score_table(state.ledger, scope, strategy) for scope in scopes}

    if args.format == "json":
        payload = {scope: tables[scope].to_json_dict() for scope in scopes}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["scope", "entity", "frequency", "recency", "rank_frequency", "rank_recency"])
        for scope in scopes:
            for entity, r in tables[scope].rows.items():
                writer.writerow(
                    [scope, entity, _fmt(r.frequency), _fmt(r.recency), _fmt(r.rank_frequency), _fmt(r.rank_recency)]
                )
        return 0
    for scope in scopes:
        sys.stdout.write(f"# {scope}\n")
        _print_table(tables[scope], sys.stdout)
    return 0


def cmd_augment(args) -> int:
    dataset = _read_dataset(args.dataset, args.schema)
    state = _read_session(dataset, args.log, args.override_hash)
    table = score_table(state.ledger, "records", state.strategy)
    columns = dataset.attribute_names + ["frequency", "recency"]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rid, values in dataset.records:
            row = [_fmt(values.get(name)) for name in dataset.attribute_names]
            score = table.rows[rid]
            writer.writerow(row + [_fmt(score.frequency), _fmt(score.recency)])
    return 0


def cmd_query(args) -> int:
    dataset = _read_dataset(args.dataset, args.schema)
    state = _read_session(dataset, args.log, args.override_hash)
    strategy = Strategy.parse(args.strategy) if args.strategy else state.strategy
    table = score_table(state.ledger, _scope_name(args.scope), strategy)
    for entity in top_n(table.entities(), table, args.metric, args.top):
        sys.stdout.write(entity + "\n")
    return 0


def cmd_spec(args) -> int:
    dataset = _read_dataset(args.dataset, args.schema)
    state = _read_session(dataset, args.log, args.override_hash)
    with open(args.file, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    spec = VisSpec.from_json_dict(payload, dataset)
    tables = state.score_tables()
    rows = bind_spec_data(spec, dataset, tables["records"], tables["attributes"])
    sys.stdout.write(json.dumps({"spec": spec.to_json_dict(), "rows": rows}, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provlens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_inputs(p):
        p.add_argument("--dataset", required=True, help="dataset file (.csv or .json)")
        p.add_argument("--log", required=True, help="exported provenance log (JSONL)")
        p.add_argument("--schema", help="schema sidecar JSON file")
        p.add_argument("--override-hash", action="store_true", help="accept a dataset-hash mismatch")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PROVLENS_PORT", "8000")))
    p.add_argument("--data-dir", default=os.environ.get("PROVLENS_DATA_DIR"))
    p.add_argument(
        "--dwell-ms",
        type=int,
        default=int(os.environ["PROVLENS_DWELL_MS"]) if os.environ.get("PROVLENS_DWELL_MS") else None,
        help="default dwell threshold for new sessions",
    )
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="rebuild scores from a log and print them")
    add_inputs(p)
    p.add_argument("--strategy", help="rel|abs|bin, or freq:rec pair like rel:bin")
    p.add_argument("--scope", choices=["attrs", "attributes", "records"])
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("augment", help="write the provenance-augmented dataset as CSV")
    add_inputs(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("query", help="exact top-N entities by provenance rank")
    add_inputs(p)
    p.add_argument("--top", type=int, required=True)
    p.add_argument("--metric", choices=["frequency", "recency"], default="recency")
    p.add_argument("--scope", choices=["attrs", "attributes", "records"], default="records")
    p.add_argument("--strategy", help="rel|abs|bin, or freq:rec pair")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("spec", help="validate a VisSpec and emit bound data")
    add_inputs(p)
    p.add_argument("--file", required=True, help="VisSpec JSON file")
    p.set_defaults(func=cmd_spec)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProvenanceError as exc:
        sys.stderr.write(f"provlens: error [{exc.code}]: {exc}\n")
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"provlens: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
