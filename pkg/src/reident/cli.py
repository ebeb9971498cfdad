"""``reident`` command line: ingest, audit, match, transform, stats, synth.

Every option can also come from a JSON config file (``--config`` or the
REIDENT_CONFIG environment variable) whose keys are the long option names
with underscores; command-line flags win. Exit status: 0 success, 1 data
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

from .matcher import (
    AuditConfig,
    CANONICAL_FIELDS,
    DEFAULT_DROPPABLE,
    PublicRecordsTable,
    build_index,
    enrich,
    evaluate_predicates,
    match_with_relaxation,
    parse_public_records,
    prepare_external,
    run_audit,
)
from .matcher.enrich import write_public_records
from .model.io import (
    SchemaError,
    open_text,
    parse_external_dataset,
    parse_hospital_dataset,
    read_dictionary,
    read_groups,
    read_incident_map,
    read_prefix_list,
    write_csv,
    write_external_csv,
    write_hospital_csv,
)
from .privacy import (
    QI_FIELDS,
    check_qi,
    default_sensitive_prefixes,
    k_anonymity_histogram,
    read_population_table,
    safe_harbor,
    uniqueness_fraction,
)
from .synthgen import SynthConfig, SynthConfigError, generate

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class DataError(Exception):
    """Bad input data; reported on stderr with exit status 1."""


class UsageError(Exception):
    """Bad invocation; exit status 2."""


DEFAULTS = {
    "max_drop": 2,
    "slack_days": 0,
    "format": "table",
    "threads": 1,
    "engine": "index",
    "droppable": ",".join(f for f in CANONICAL_FIELDS if f in DEFAULT_DROPPABLE),
    "out": ".",
    "seed": 0,
}


def _opt(args, key):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in args.config_values:
        return args.config_values[key]
    return DEFAULTS.get(key)


def _need(args, key):
    value = _opt(args, key)
    if value is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return value


def _path(args, key, required=False):
    value = _need(args, key) if required else _opt(args, key)
    if value is None:
        return None
    if not Path(value).exists():
        raise DataError(f"{key.replace('_', '-')} file not found: {value}")
    return value


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _fields(value) -> frozenset[str]:
    items = value if isinstance(value, (list, tuple)) else [v for v in str(value).split(",")]
    return frozenset(v.strip() for v in items if v.strip())


def _check_reports(reports, allow_errors=False):
    errors = [e for r in reports for e in r.errors]
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    if errors and not allow_errors:
        raise DataError(f"{len(errors)} row error(s) in input; fix them or pass --allow-row-errors")


def _load_inputs(args):
    """Hospital data, prepared externals, public records and their parse reports."""
    hospital, h_rep = parse_hospital_dataset(_path(args, "hospital", required=True))
    externals, e_rep = parse_external_dataset(_path(args, "external", required=True))
    reports = [h_rep, e_rep]
    public = PublicRecordsTable(())
    if _opt(args, "public_records"):
        public, p_rep = parse_public_records(_path(args, "public_records"))
        reports.append(p_rep)
    incident_map = read_incident_map(_path(args, "incident_map")) if _opt(args, "incident_map") else None
    dictionary = read_dictionary(_path(args, "dictionary")) if _opt(args, "dictionary") else None
    groups = read_groups(_path(args, "groups")) if _opt(args, "groups") else None
    externals = [prepare_external(e, incident_map, dictionary, groups) for e in externals]
    return hospital, externals, public, reports


def _audit_config(args) -> AuditConfig:
    sensitive = _opt(args, "sensitive")
    prefixes = read_prefix_list(_path(args, "sensitive")) if sensitive else default_sensitive_prefixes()
    try:
        return AuditConfig(
            droppable=_fields(_opt(args, "droppable")),
            max_drop=int(_opt(args, "max_drop")),
            slack_days=int(_opt(args, "slack_days")),
            sensitive_prefixes=prefixes,
            engine=_opt(args, "engine"),
            threads=int(_opt(args, "threads")),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands ------------------------------------------------------------------


def cmd_ingest(args) -> int:
    reports = []
    parsed = {}
    if _opt(args, "hospital"):
        parsed["hospital"], rep = parse_hospital_dataset(_path(args, "hospital"))
        reports.append(rep)
    if _opt(args, "external"):
        parsed["external"], rep = parse_external_dataset(_path(args, "external"))
        reports.append(rep)
    if _opt(args, "public_records"):
        table, rep = parse_public_records(_path(args, "public_records"))
        parsed["public_records"] = table.rows
        reports.append(rep)
    try:
        for key, reader in (("dictionary", read_dictionary), ("groups", read_groups),
                            ("incident_map", read_incident_map), ("population", read_population_table),
                            ("sensitive", read_prefix_list)):
            if _opt(args, key):
                value = reader(_path(args, key))
                print(f"{key}: {len(value)} entries")
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if not reports and not parsed and not any(_opt(args, k) for k in ("dictionary", "groups", "incident_map", "population", "sensitive")):
        raise UsageError("nothing to ingest; pass at least one input file")

    total = 0
    for rep in reports:
        print(f"{rep.file}: {rep.rows} rows, {len(rep.errors)} errors")
        for e in rep.errors:
            print(f"  row {e.row}: {e.reason}")
        total += len(rep.errors)
    if args.verbose:
        for key, records in parsed.items():
            for rec in records:
                print(f"{key}: {rec}")
    print(f"{total} errors")
    return EXIT_OK if total == 0 else EXIT_DATA


def cmd_audit(args) -> int:
    config = _audit_config(args)
    hospital, externals, public, reports = _load_inputs(args)
    _check_reports(reports, args.allow_row_errors)
    report = run_audit(externals, hospital, config, public)

    out = Path(_opt(args, "out"))
    out.mkdir(parents=True, exist_ok=True)
    report.write_cases(out / "cases.csv")
    if _opt(args, "format") == "machine":
        text = report.to_json()
        (out / "summary.json").write_text(text, encoding="utf-8")
    else:
        text = report.to_table()
        (out / "summary.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_match(args) -> int:
    config = _audit_config(args)
    hospital, externals, public, reports = _load_inputs(args)
    _check_reports(reports, args.allow_row_errors)
    ext = next((e for e in externals if e.ext_id == args.ext_id), None)
    if ext is None:
        raise DataError(f"no external record with ext_id {args.ext_id!r}")
    enriched, status = enrich(ext, public)
    index = build_index(hospital, config.slack_days)
    outcome = match_with_relaxation(enriched, index, config.droppable, config.max_drop, config.use)
    print(f"external {ext.ext_id}: enrichment {status.value}")
    if enriched.dob:
        print(f"  dob {enriched.dob.isoformat()}, zips {','.join(sorted(enriched.zip_candidates)) or '-'}")
    dropped = ",".join(f for f in CANONICAL_FIELDS if f in outcome.dropped) or "-"
    print(f"outcome: {outcome.classification.value} level={outcome.relaxation_level} "
          f"dropped={dropped} candidates={outcome.candidate_count}")
    by_id = {r.record_id: r for r in hospital}
    targets = args.record_id or list(outcome.candidate_ids)
    for rid in targets:
        rec = by_id.get(rid)
        if rec is None:
            raise DataError(f"no hospital record with record_id {rid!r}")
        verdicts = evaluate_predicates(enriched, rec, config.slack_days)
        print(f"record {rid}: " + " ".join(f"{f}={verdicts[f].value}" for f in CANONICAL_FIELDS))
    return EXIT_OK


def cmd_transform(args) -> int:
    population_path = _opt(args, "population")
    if population_path is None:
        raise DataError("transform needs a population table (--population)")
    try:
        population = read_population_table(_path(args, "population"))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    records, report = parse_hospital_dataset(_path(args, "hospital", required=True))
    _check_reports([report], args.allow_row_errors)
    out = _need(args, "output")
    write_hospital_csv((safe_harbor(r, population) for r in records), out)
    print(f"wrote {len(records)} generalized records to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    qi = [f.strip() for f in str(_need(args, "qi")).split(",") if f.strip()]
    try:
        qi = check_qi(qi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stream, name, close = open_text(_path(args, "input", required=True))
    try:
        rows = list(csv.DictReader(stream))
    finally:
        if close:
            stream.close()
    try:
        hist = k_anonymity_histogram(rows, qi)
        fraction = uniqueness_fraction(rows, qi)
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from None
    if _opt(args, "format") == "machine":
        doc = {"file": name, "qi": list(qi), "records": len(rows),
               "histogram": {str(k): v for k, v in hist.items()}, "uniqueness": fraction}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        print(f"{name}: {len(rows)} records, quasi-identifier {','.join(qi)}")
        print(f"{'k':>6} {'records':>9}")
        for k, count in hist.items():
            print(f"{k:>6} {count:>9}")
        print(f"uniqueness {fraction:.6f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        seed=int(_opt(args, "seed")),
        n_hospital_records=int(_opt(args, "hospital_records") or SynthConfig.n_hospital_records),
        n_externals=int(_opt(args, "externals") or SynthConfig.n_externals),
        n_planted_unique=int(_opt(args, "unique") if _opt(args, "unique") is not None else SynthConfig.n_planted_unique),
        n_planted_ambiguous=int(_opt(args, "ambiguous") if _opt(args, "ambiguous") is not None else SynthConfig.n_planted_ambiguous),
        n_planted_nomatch=int(_opt(args, "nomatch") if _opt(args, "nomatch") is not None else SynthConfig.n_planted_nomatch),
        n_planted_sensitive=int(_opt(args, "planted_sensitive") or 0),
        sensitive_rate=float(_opt(args, "sensitive_rate") if _opt(args, "sensitive_rate") is not None else SynthConfig.sensitive_rate),
        year=int(_opt(args, "year") or SynthConfig.year),
    )
    try:
        corpus = generate(cfg)
    except SynthConfigError as exc:
        raise UsageError(str(exc)) from None
    out = Path(_opt(args, "out"))
    out.mkdir(parents=True, exist_ok=True)
    write_hospital_csv(corpus.hospital, out / "hospital.csv")
    write_external_csv(corpus.externals, out / "external.csv")
    write_public_records(corpus.public_records, out / "public_records.csv")
    write_csv(out / "population.csv", ("zip3", "population"),
              ({"zip3": k, "population": str(v)} for k, v in sorted(corpus.population.items())))
    (out / "manifest.json").write_text(corpus.manifest_json(), encoding="utf-8")
    for fname in ("hospital.csv", "external.csv", "public_records.csv", "population.csv", "manifest.json"):
        digest = hashlib.sha256((out / fname).read_bytes()).hexdigest()
        print(f"{digest}  {fname}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def _matching_options(p):
    p.add_argument("--hospital", help="hospital CSV")
    p.add_argument("--external", help="external (news-derived) CSV")
    p.add_argument("--public-records", help="public-records CSV used for enrichment")
    p.add_argument("--dictionary", help="hospital dictionary CSV (code, description)")
    p.add_argument("--groups", help="hospital group aliases CSV (alias, codes)")
    p.add_argument("--incident-map", help="incident type to diagnosis prefixes CSV")
    p.add_argument("--sensitive", help="sensitive prefix list (default: shipped list)")
    p.add_argument("--droppable", help=f"comma-separated fields that may be dropped (default {DEFAULTS['droppable']})")
    p.add_argument("--max-drop", type=int, choices=(0, 1, 2), help="most fields dropped at once (default 2)")
    p.add_argument("--slack-days", type=int, help="widen admission windows by this many days (default 0)")
    p.add_argument("--engine", choices=("index", "scan", "linear"), help="matching engine (default index)")
    p.add_argument("--allow-row-errors", action="store_true", help="skip malformed rows instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reident", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON config file (default: $REIDENT_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate input files")
    for opt in ("hospital", "external", "public-records", "dictionary", "groups", "incident-map",
                "population", "sensitive"):
        p.add_argument(f"--{opt}")
    p.add_argument("-v", "--verbose", action="store_true", help="echo every parsed record")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("audit", help="match every external record and report outcomes")
    _matching_options(p)
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--format", choices=("table", "machine"), help="summary format (default table)")
    p.add_argument("--threads", type=int, help="worker threads for the audit loop")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("match", help="debug one external record, printing per-field verdicts")
    _matching_options(p)
    p.add_argument("--ext-id", required=True)
    p.add_argument("--record-id", action="append", help="hospital record to compare (repeatable)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("transform", help="apply Safe Harbor generalization to a hospital CSV")
    p.add_argument("--hospital")
    p.add_argument("--population", help="population CSV (zip3, population)")
    p.add_argument("--output", help="generalized hospital CSV to write")
    p.add_argument("--allow-row-errors", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("stats", help="k-anonymity histogram and uniqueness of a CSV")
    p.add_argument("--input")
    p.add_argument("--qi", help=f"comma-separated quasi-identifier from: {', '.join(QI_FIELDS)}")
    p.add_argument("--format", choices=("table", "machine"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted ground truth")
    p.add_argument("--seed", type=int)
    p.add_argument("--hospital-records", type=int)
    p.add_argument("--externals", type=int)
    p.add_argument("--unique", type=int, help="planted uniquely matchable externals")
    p.add_argument("--ambiguous", type=int, help="planted ambiguous externals")
    p.add_argument("--nomatch", type=int, help="planted unmatchable externals")
    p.add_argument("--planted-sensitive", type=int, help="planted unique targets carrying sensitive codes")
    p.add_argument("--sensitive-rate", type=float)
    p.add_argument("--year", type=int)
    p.add_argument("--out", help="output directory (default .)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.config_values = _load_config(args.config or os.environ.get("REIDENT_CONFIG"))
        return args.func(args)
    except UsageError as exc:
        print(f"reident: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SchemaError) as exc:
        print(f"reident: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
