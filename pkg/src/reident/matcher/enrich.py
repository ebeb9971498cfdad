"""Public-records lookup: add date of birth and ZIP history to a named subject."""

from __future__ import annotations

import dataclasses
import enum
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import Iterable

from ..model.codes import normalize_text
from ..model.io import ParseReport, RowError, join_multi, read_table, source_name, split_multi, write_csv
from ..model.records import ZIP_RE, ExternalRecord
from ..temporal import age_months_at

PUBLIC_RECORD_COLUMNS = ("name", "dob", "zip_history", "age_hint")


class EnrichStatus(str, enum.Enum):
    UNIQUE = "unique"
    NONE = "none"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class PublicRecord:
    name: str
    dob: date
    zip_history: frozenset[str]
    age_hint: int | None = None

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("public record with empty name")
        for z in self.zip_history:
            if not ZIP_RE.match(z):
                raise ValueError(f"zip {z!r} is not a 5-digit string")
        object.__setattr__(self, "zip_history", frozenset(self.zip_history))


class PublicRecordsTable:
    def __init__(self, rows: Iterable[PublicRecord]):
        self.rows = list(rows)
        self._by_name = defaultdict(list)
        for row in self.rows:
            self._by_name[normalize_text(row.name)].append(row)

    def __len__(self):
        return len(self.rows)

    def lookup(self, name: str) -> list[PublicRecord]:
        return list(self._by_name.get(normalize_text(name), ()))


def _age_consistent(row: PublicRecord, ext: ExternalRecord) -> bool:
    if ext.age_years is None:
        return True
    if ext.incident_date is not None:
        if row.dob > ext.incident_date:
            return False
        years = age_months_at(row.dob, ext.incident_date) // 12
    elif row.age_hint is not None:
        years = row.age_hint
    else:
        return True
    return abs(years - ext.age_years) <= 1


def enrich(ext: ExternalRecord, table: PublicRecordsTable) -> tuple[ExternalRecord, EnrichStatus]:
    """Look the subject up by exact (normalized) name, filtered by reported age.

    Only a single surviving row is used: it supplies the date of birth and
    adds its ZIP history to the candidate ZIPs.
    """
    if ext.name is None:
        return ext, EnrichStatus.NONE
    rows = [r for r in table.lookup(ext.name) if _age_consistent(r, ext)]
    if not rows:
        return ext, EnrichStatus.NONE
    if len(rows) > 1:
        return ext, EnrichStatus.AMBIGUOUS
    row = rows[0]
    return dataclasses.replace(ext, dob=row.dob, zip_candidates=ext.zip_candidates | row.zip_history), EnrichStatus.UNIQUE


def parse_public_records(source) -> tuple[PublicRecordsTable, ParseReport]:
    """Read the public-records CSV, collecting malformed rows into a report."""
    rows_iter = read_table(source, ("name", "dob", "zip_history"))
    report = ParseReport(source_name(source))
    rows = []
    for line, row in rows_iter:
        report.rows += 1
        try:
            rows.append(PublicRecord(
                name=row["name"],
                dob=date.fromisoformat(row["dob"]),
                zip_history=frozenset(split_multi(row["zip_history"])),
                age_hint=int(row["age_hint"]) if row.get("age_hint") else None,
            ))
        except ValueError as exc:
            report.errors.append(RowError(report.file, line, str(exc)))
    return PublicRecordsTable(rows), report


def write_public_records(table: PublicRecordsTable, dest) -> None:
    write_csv(dest, PUBLIC_RECORD_COLUMNS, (
        {
            "name": r.name,
            "dob": r.dob.isoformat(),
            "zip_history": join_multi(sorted(r.zip_history)),
            "age_hint": "" if r.age_hint is None else str(r.age_hint),
        }
        for r in table.rows
    ))
