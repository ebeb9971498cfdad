"""Batch audit: enrich each external record, match it, tally the outcomes."""

from __future__ import annotations

import dataclasses
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..model.codes import CodeDictionary, incident_to_prefixes, resolve_hospital
from ..model.io import write_csv
from ..model.records import ExternalRecord, HospitalRecord
from ..privacy import flag_sensitive
from .enrich import EnrichStatus, PublicRecordsTable, enrich
from .index import build_index
from .predicates import CANONICAL_FIELDS, DEFAULT_DROPPABLE, LinearScan, field_set, ordered
from .relax import Classification, MatchOutcome, match_with_relaxation
from .scan import ScanMatcher

TALLY_KEYS = ("unique", "ambiguous_2", "ambiguous_3plus", "nomatch", "conflict")
CASE_COLUMNS = (
    "ext_id", "classification", "relaxation_level", "dropped_fields",
    "matched_record_id", "candidate_count", "sensitive_flag",
)
ENGINES = {"index": build_index, "scan": ScanMatcher, "linear": LinearScan}


@dataclass(frozen=True)
class AuditConfig:
    droppable: frozenset[str] = DEFAULT_DROPPABLE
    max_drop: int = 2
    slack_days: int = 0
    use: frozenset[str] = frozenset(CANONICAL_FIELDS)
    sensitive_prefixes: frozenset[str] = frozenset()
    engine: str = "index"
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "droppable", field_set(self.droppable))
        object.__setattr__(self, "use", field_set(self.use))
        if self.max_drop not in (0, 1, 2):
            raise ValueError(f"max_drop must be 0, 1 or 2, got {self.max_drop}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {sorted(ENGINES)}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def summary(self) -> dict:
        return {
            "droppable": list(ordered(self.droppable)),
            "max_drop": self.max_drop,
            "slack_days": self.slack_days,
            "use": list(ordered(self.use)),
            "sensitive_prefixes": sorted(self.sensitive_prefixes),
        }


@dataclass(frozen=True)
class CaseResult:
    ext_id: str
    outcome: MatchOutcome
    enrichment: EnrichStatus
    sensitive: bool = False

    @property
    def tally_key(self) -> str:
        cls = self.outcome.classification
        if cls is Classification.AMBIGUOUS:
            return "ambiguous_2" if self.outcome.candidate_count == 2 else "ambiguous_3plus"
        return cls.value

    def row(self) -> dict[str, str]:
        o = self.outcome
        return {
            "ext_id": self.ext_id,
            "classification": o.classification.value,
            "relaxation_level": str(o.relaxation_level),
            "dropped_fields": ";".join(ordered(o.dropped)),
            "matched_record_id": o.record_id or "",
            "candidate_count": str(o.candidate_count),
            "sensitive_flag": "1" if self.sensitive else "0",
        }


@dataclass
class AuditReport:
    cases: list[CaseResult]
    config: AuditConfig = field(default_factory=AuditConfig)

    @property
    def total(self) -> int:
        return len(self.cases)

    @property
    def tallies(self) -> dict[str, int]:
        counts = Counter(c.tally_key for c in self.cases)
        return {k: counts.get(k, 0) for k in TALLY_KEYS}

    def unique_cases(self) -> list[CaseResult]:
        return [c for c in self.cases if c.outcome.classification is Classification.UNIQUE]

    def to_dict(self) -> dict:
        tallies = self.tallies
        total = self.total
        uniques = self.unique_cases()
        levels = Counter(c.outcome.relaxation_level for c in uniques)
        dropped = Counter("+".join(ordered(c.outcome.dropped)) or "-" for c in uniques)
        enrichment = Counter(c.enrichment.value for c in self.cases)
        return {
            "total": total,
            "tallies": tallies,
            "percentages": {k: round(100 * v / total, 2) if total else 0.0 for k, v in tallies.items()},
            "unique_by_level": {str(k): levels.get(k, 0) for k in range(3)},
            "unique_by_dropped": dict(sorted(dropped.items())),
            "sensitive_flagged": sum(c.sensitive for c in uniques),
            "enrichment": {s.value: enrichment.get(s.value, 0) for s in EnrichStatus},
            "config": self.config.summary(),
            "cases": [
                dict(c.row(), candidate_ids=list(c.outcome.candidate_ids), enrichment=c.enrichment.value)
                for c in self.cases
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        d = self.to_dict()
        lines = [f"{'outcome':<18}{'count':>7}{'percent':>10}"]
        for k in TALLY_KEYS:
            lines.append(f"{k:<18}{d['tallies'][k]:>7}{d['percentages'][k]:>9.2f}%")
        lines.append(f"{'total':<18}{d['total']:>7}")
        lines.append("")
        lines.append("unique matches by relaxation level: "
                     + ", ".join(f"{k}={v}" for k, v in d["unique_by_level"].items()))
        lines.append("unique matches by dropped fields: "
                     + (", ".join(f"{k}={v}" for k, v in d["unique_by_dropped"].items()) or "none"))
        lines.append(f"unique matches with sensitive diagnoses: {d['sensitive_flagged']}")
        return "\n".join(lines) + "\n"

    def write_cases(self, dest) -> None:
        write_csv(dest, CASE_COLUMNS, (c.row() for c in self.cases))


def prepare_external(ext: ExternalRecord, incident_map: Mapping[str, Iterable[str]] | None = None,
                     dictionary: CodeDictionary | None = None,
                     groups: Mapping[str, Iterable[str]] | None = None) -> ExternalRecord:
    """Fill empty diagnosis/hospital sets from the raw incident type and hospital name."""
    changes = {}
    if not ext.diagnosis_prefixes and ext.incident_type:
        changes["diagnosis_prefixes"] = incident_to_prefixes(ext.incident_type, incident_map)
    if not ext.hospital_candidates and ext.hospital_name and dictionary is not None:
        changes["hospital_candidates"] = resolve_hospital(ext.hospital_name, dictionary, groups)
    return dataclasses.replace(ext, **changes) if changes else ext


def run_audit(externals: Sequence[ExternalRecord], dataset: Sequence[HospitalRecord],
              config: AuditConfig | None = None, public_records: PublicRecordsTable | None = None,
              engine=None) -> AuditReport:
    """Enrich and classify every external record; cases come back sorted by ext_id.

    ``engine`` may be a prebuilt index or scan over ``dataset`` (built from
    ``config.engine`` otherwise).
    """
    config = config or AuditConfig()
    if engine is None:
        engine = ENGINES[config.engine](dataset, config.slack_days)
    by_id = {r.record_id: r for r in dataset}
    table = public_records or PublicRecordsTable(())

    def one(ext: ExternalRecord) -> CaseResult:
        enriched, status = enrich(ext, table)
        outcome = match_with_relaxation(enriched, engine, config.droppable, config.max_drop, config.use)
        sensitive = False
        if outcome.classification is Classification.UNIQUE and config.sensitive_prefixes:
            sensitive = flag_sensitive(by_id[outcome.record_id], config.sensitive_prefixes)
        return CaseResult(ext.ext_id, outcome, status, sensitive)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            cases = list(pool.map(one, externals))
    else:
        cases = [one(e) for e in externals]
    cases.sort(key=lambda c: c.ext_id)
    return AuditReport(cases, config)
