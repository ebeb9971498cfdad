"""Enrichment, per-field predicates, exact-unique matching and the audit loop."""

from .audit import AuditConfig, AuditReport, CaseResult, prepare_external, run_audit
from .enrich import EnrichStatus, PublicRecord, PublicRecordsTable, enrich, parse_public_records
from .index import MatchIndex, build_index
from .predicates import (
    CANONICAL_FIELDS,
    DEFAULT_DROPPABLE,
    LinearScan,
    Verdict,
    evaluate_predicates,
    field_verdict,
    match_exact,
    present_fields,
)
from .relax import Classification, MatchOutcome, match_with_relaxation
from .scan import ScanMatcher

__all__ = [
    "AuditConfig", "AuditReport", "CANONICAL_FIELDS", "CaseResult", "Classification",
    "DEFAULT_DROPPABLE", "EnrichStatus", "LinearScan", "MatchIndex", "MatchOutcome",
    "PublicRecord", "PublicRecordsTable", "ScanMatcher", "Verdict", "build_index", "enrich",
    "evaluate_predicates", "field_verdict", "match_exact", "match_with_relaxation",
    "parse_public_records", "prepare_external", "present_fields", "run_audit",
]
