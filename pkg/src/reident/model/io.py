"""CSV readers and writers for every file the audit consumes or produces.

Multi-valued cells are semicolon separated. Readers accept a path, raw
bytes, a binary stream or a text stream; all files are UTF-8.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable, Iterator, Mapping

from .codes import CodeDictionary, normalize_text
from .records import ExternalRecord, HospitalRecord

HOSPITAL_COLUMNS = (
    "record_id", "hospital", "admit_type", "length_of_stay", "discharge_year",
    "discharge_month", "age_years", "age_months", "gender", "zip", "diagnoses",
    "procedures", "payers", "charges",
)
HOSPITAL_REQUIRED = (
    "record_id", "hospital", "length_of_stay", "discharge_year", "discharge_month",
    "age_years", "age_months", "gender", "zip", "diagnoses",
)
EXTERNAL_COLUMNS = (
    "ext_id", "name", "gender", "age_years", "incident_date", "zip_candidates",
    "hospital_candidates", "diagnosis_prefixes", "dob", "source",
)
EXTERNAL_EXTRA_COLUMNS = ("incident_type", "hospital_name")
EXTERNAL_REQUIRED = ("ext_id",)

SEP = ";"


class SchemaError(Exception):
    """A file-level problem that stops ingestion (missing column, duplicate key)."""


@dataclass(frozen=True)
class RowError:
    file: str
    row: int
    reason: str

    def __str__(self):
        return f"{self.file}:{self.row}: {self.reason}"


@dataclass
class ParseReport:
    file: str
    rows: int = 0
    errors: list[RowError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def open_text(source) -> tuple[IO[str], str, bool]:
    """Return (text stream, display name, whether the caller must close it)."""
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8-sig", newline=""), os.fspath(source), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"), newline=""), "<bytes>", False
    name = getattr(source, "name", "<stream>")
    if isinstance(source, io.TextIOBase):
        return source, str(name), False
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline=""), str(name), False


def source_name(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return os.fspath(source)
    if isinstance(source, (bytes, bytearray)):
        return "<bytes>"
    return str(getattr(source, "name", "<stream>"))


def _rows(source, required: Iterable[str], schema: Mapping[str, str] | None):
    """Yield (line number, field dict) for each data row, after header checks."""
    stream, name, close = open_text(source)
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames or []
        rename = dict(schema or {})
        fields = [rename.get(h.strip(), h.strip()) for h in header]
        missing = [c for c in required if c not in fields]
        if missing and header:
            raise SchemaError(f"{name}: missing required column(s): {', '.join(missing)}")
        yield name
        for raw in reader:
            row = {}
            for h, f in zip(header, fields):
                value = raw.get(h)
                row[f] = "" if value is None else value.strip()
            yield reader.line_num, row
    finally:
        if close:
            stream.close()


def split_multi(cell: str) -> list[str]:
    return [p.strip() for p in cell.split(SEP) if p.strip()]


def join_multi(values: Iterable[str]) -> str:
    return SEP.join(values)


def _int(row, key, default=None):
    cell = row.get(key, "")
    if cell == "":
        if default is not None:
            return default
        raise ValueError(f"{key} is blank")
    try:
        return int(cell)
    except ValueError:
        raise ValueError(f"{key} {cell!r} is not an integer") from None


def _opt_int(row, key):
    cell = row.get(key, "")
    return None if cell == "" else _int(row, key)


def _opt_date(row, key):
    cell = row.get(key, "")
    if cell == "":
        return None
    try:
        return date.fromisoformat(cell)
    except ValueError:
        raise ValueError(f"{key} {cell!r} is not an ISO date") from None


def _hospital_from_row(row: dict) -> HospitalRecord:
    charges = None
    if row.get("charges"):
        try:
            charges = Decimal(row["charges"])
        except InvalidOperation:
            raise ValueError(f"charges {row['charges']!r} is not a decimal") from None
    return HospitalRecord(
        record_id=row["record_id"],
        hospital=row["hospital"],
        admit_type=row.get("admit_type", ""),
        length_of_stay=_int(row, "length_of_stay"),
        discharge_year=_int(row, "discharge_year"),
        discharge_month=_int(row, "discharge_month"),
        age_years=_int(row, "age_years"),
        age_months=_int(row, "age_months"),
        gender=row["gender"].upper(),
        zip=row["zip"],
        diagnoses=tuple(split_multi(row["diagnoses"])),
        procedures=tuple(split_multi(row.get("procedures", ""))),
        payers=tuple(split_multi(row.get("payers", ""))),
        charges=charges,
    )


def parse_hospital_dataset(source, schema: Mapping[str, str] | None = None
                           ) -> tuple[list[HospitalRecord], ParseReport]:
    """Parse a hospital CSV into records plus a report of rejected rows.

    ``schema`` renames file headers to record field names. A missing required
    column or a repeated record_id raises SchemaError.
    """
    rows = _rows(source, HOSPITAL_REQUIRED, schema)
    report = ParseReport(next(rows))
    records, seen = [], set()
    for line, row in rows:
        report.rows += 1
        try:
            rec = _hospital_from_row(row)
        except (ValueError, KeyError) as exc:
            report.errors.append(RowError(report.file, line, str(exc)))
            continue
        if rec.record_id in seen:
            raise SchemaError(f"{report.file}:{line}: duplicate record_id {rec.record_id!r}")
        seen.add(rec.record_id)
        records.append(rec)
    return records, report


def _external_from_row(row: dict) -> ExternalRecord:
    gender = row.get("gender", "").upper() or None
    return ExternalRecord(
        ext_id=row["ext_id"],
        name=row.get("name") or None,
        gender=gender,
        age_years=_opt_int(row, "age_years"),
        incident_date=_opt_date(row, "incident_date"),
        zip_candidates=frozenset(split_multi(row.get("zip_candidates", ""))),
        hospital_candidates=frozenset(split_multi(row.get("hospital_candidates", ""))),
        diagnosis_prefixes=frozenset(split_multi(row.get("diagnosis_prefixes", ""))),
        dob=_opt_date(row, "dob"),
        source=row.get("source", ""),
        incident_type=row.get("incident_type") or None,
        hospital_name=row.get("hospital_name") or None,
    )


def parse_external_dataset(source, schema: Mapping[str, str] | None = None
                           ) -> tuple[list[ExternalRecord], ParseReport]:
    """Parse an external (news-derived) CSV. Blank cells become absent fields."""
    rows = _rows(source, EXTERNAL_REQUIRED, schema)
    report = ParseReport(next(rows))
    records, seen = [], set()
    for line, row in rows:
        report.rows += 1
        try:
            rec = _external_from_row(row)
        except (ValueError, KeyError) as exc:
            report.errors.append(RowError(report.file, line, str(exc)))
            continue
        if rec.ext_id in seen:
            raise SchemaError(f"{report.file}:{line}: duplicate ext_id {rec.ext_id!r}")
        seen.add(rec.ext_id)
        records.append(rec)
    return records, report


def hospital_row(rec: HospitalRecord) -> dict[str, str]:
    return {
        "record_id": rec.record_id,
        "hospital": rec.hospital,
        "admit_type": rec.admit_type,
        "length_of_stay": str(rec.length_of_stay),
        "discharge_year": str(rec.discharge_year),
        "discharge_month": str(rec.discharge_month),
        "age_years": str(rec.age_years),
        "age_months": str(rec.age_months),
        "gender": rec.gender,
        "zip": rec.zip,
        "diagnoses": join_multi(rec.diagnoses),
        "procedures": join_multi(rec.procedures),
        "payers": join_multi(rec.payers),
        "charges": "" if rec.charges is None else str(rec.charges),
    }


def external_row(rec: ExternalRecord) -> dict[str, str]:
    def opt(v):
        if v is None:
            return ""
        return v.isoformat() if isinstance(v, date) else str(v)

    return {
        "ext_id": rec.ext_id,
        "name": opt(rec.name),
        "gender": opt(rec.gender),
        "age_years": opt(rec.age_years),
        "incident_date": opt(rec.incident_date),
        "zip_candidates": join_multi(sorted(rec.zip_candidates)),
        "hospital_candidates": join_multi(sorted(rec.hospital_candidates)),
        "diagnosis_prefixes": join_multi(sorted(rec.diagnosis_prefixes)),
        "dob": opt(rec.dob),
        "source": rec.source,
        "incident_type": opt(rec.incident_type),
        "hospital_name": opt(rec.hospital_name),
    }


def write_csv(dest, columns: Iterable[str], rows: Iterable[Mapping[str, str]]) -> None:
    """Write rows to a path or text stream with LF line endings."""
    columns = list(columns)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, columns, rows)
        return
    writer = csv.DictWriter(dest, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def write_hospital_csv(records: Iterable[HospitalRecord], dest) -> None:
    write_csv(dest, HOSPITAL_COLUMNS, (hospital_row(r) for r in records))


def write_external_csv(records: Iterable[ExternalRecord], dest) -> None:
    records = list(records)
    columns = list(EXTERNAL_COLUMNS)
    for extra in EXTERNAL_EXTRA_COLUMNS:
        if any(getattr(r, extra) is not None for r in records):
            columns.append(extra)
    write_csv(dest, columns, (external_row(r) for r in records))


def read_table(source, required: Iterable[str]) -> Iterator[tuple[int, dict]]:
    """Generic reader for small lookup tables; raises SchemaError on bad headers."""
    rows = _rows(source, tuple(required), None)
    next(rows)
    yield from rows


def read_dictionary(source) -> CodeDictionary:
    return CodeDictionary({row["code"]: row["description"] for _, row in read_table(source, ("code", "description"))})


def read_groups(source) -> dict[str, frozenset[str]]:
    return {
        normalize_text(row["alias"]): frozenset(split_multi(row["codes"]))
        for _, row in read_table(source, ("alias", "codes"))
    }


def read_incident_map(source) -> dict[str, frozenset[str]]:
    """Incident vocabulary file: columns incident_type, prefixes."""
    return {
        row["incident_type"].lower(): frozenset(p.upper() for p in split_multi(row["prefixes"]))
        for _, row in read_table(source, ("incident_type", "prefixes"))
    }


def read_prefix_list(source) -> frozenset[str]:
    """One prefix per line; '#' starts a comment."""
    stream, _, close = open_text(source)
    try:
        out = set()
        for line in stream:
            line = line.split("#", 1)[0].strip()
            if line:
                out.add(line.upper())
        return frozenset(out)
    finally:
        if close:
            stream.close()
