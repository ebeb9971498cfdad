"""Per-field comparison of an external record against one hospital record.

This is the reference definition of matching. The indexed and vectorized
engines must agree with :func:`match_exact` on every input.
"""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

from ..model.codes import icd9_prefix_match
from ..model.records import ExternalRecord, HospitalRecord
from ..privacy import SUPPRESSED_ZIP
from ..temporal import admit_window, age_months_range, in_window

# Order matters: relaxation drops fields in this order.
CANONICAL_FIELDS = ("zip", "age", "hospital", "admit_window", "diagnosis", "gender")
DEFAULT_DROPPABLE = frozenset({"zip", "age", "hospital"})


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    ABSENT = "absent"


def field_set(fields: Iterable[str]) -> frozenset[str]:
    """Validate and freeze a set of canonical field names."""
    out = frozenset(fields)
    unknown = out - set(CANONICAL_FIELDS)
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)}; valid: {', '.join(CANONICAL_FIELDS)}")
    return out


def ordered(fields: Iterable[str]) -> tuple[str, ...]:
    s = set(fields)
    return tuple(f for f in CANONICAL_FIELDS if f in s)


def present_fields(ext: ExternalRecord) -> frozenset[str]:
    """Fields the external record actually reports; the rest are never compared."""
    out = set()
    if ext.gender is not None:
        out.add("gender")
    if ext.zip_candidates:
        out.add("zip")
    if ext.hospital_candidates:
        out.add("hospital")
    if ext.incident_date is not None:
        out.add("admit_window")
    if ext.dob is not None or ext.age_years is not None:
        out.add("age")
    if ext.diagnosis_prefixes:
        out.add("diagnosis")
    return frozenset(out)


def _zip_ok(ext: ExternalRecord, rec: HospitalRecord) -> bool:
    if not rec.generalized:
        return rec.zip in ext.zip_candidates
    # Generalized record: compare at 3-digit precision; a suppressed ZIP
    # cannot rule anyone out.
    if rec.zip == SUPPRESSED_ZIP:
        return True
    return any(z[:3] == rec.zip[:3] for z in ext.zip_candidates)


def _age_ok(ext: ExternalRecord, rec: HospitalRecord, slack_days: int) -> bool:
    if ext.dob is None:
        return rec.age_years == ext.age_years
    window = admit_window(rec.discharge_year, rec.discharge_month, rec.length_of_stay).widened(slack_days)
    span = age_months_range(ext.dob, window)
    if span is None:
        return False
    lo, hi = span
    if rec.generalized:
        return lo // 12 <= rec.age_years <= hi // 12
    return lo <= rec.age_months <= hi


def field_verdict(field: str, ext: ExternalRecord, rec: HospitalRecord, slack_days: int = 0) -> Verdict:
    if field not in present_fields(ext):
        if field not in CANONICAL_FIELDS:
            raise ValueError(f"unknown field {field!r}")
        return Verdict.ABSENT
    if field == "gender":
        ok = ext.gender == rec.gender
    elif field == "zip":
        ok = _zip_ok(ext, rec)
    elif field == "hospital":
        ok = rec.hospital in ext.hospital_candidates
    elif field == "admit_window":
        window = admit_window(rec.discharge_year, rec.discharge_month, rec.length_of_stay)
        ok = in_window(ext.incident_date, window.widened(slack_days))
    elif field == "age":
        ok = _age_ok(ext, rec, slack_days)
    else:
        ok = any(icd9_prefix_match(code, p) for code in rec.diagnoses for p in ext.diagnosis_prefixes)
    return Verdict.PASS if ok else Verdict.FAIL


def evaluate_predicates(ext: ExternalRecord, rec: HospitalRecord, slack_days: int = 0) -> dict[str, Verdict]:
    return {f: field_verdict(f, ext, rec, slack_days) for f in CANONICAL_FIELDS}


def match_exact(ext: ExternalRecord, dataset: Sequence[HospitalRecord], use: Iterable[str],
                slack_days: int = 0) -> list[str]:
    """Record ids passing every compared field in ``use``, sorted.

    A record is only returned if at least one field was actually compared.
    """
    use = field_set(use)
    if not use:
        raise ValueError("match_exact needs at least one field")
    hits = []
    for rec in dataset:
        verdicts = [field_verdict(f, ext, rec, slack_days) for f in use]
        compared = [v for v in verdicts if v is not Verdict.ABSENT]
        if compared and all(v is Verdict.PASS for v in compared):
            hits.append(rec.record_id)
    return sorted(hits)


class LinearScan:
    """Engine wrapper around :func:`match_exact`."""

    def __init__(self, dataset: Sequence[HospitalRecord], slack_days: int = 0):
        self.dataset = list(dataset)
        self.slack_days = slack_days

    def match(self, ext: ExternalRecord, use: Iterable[str]) -> list[str]:
        return match_exact(ext, self.dataset, use, self.slack_days)
