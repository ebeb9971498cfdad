"""Record types for hospital discharge data and news-derived external data."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal

from .codes import is_hospital_code, normalize_icd9

ZIP_RE = re.compile(r"^\d{5}$")

HOSPITAL_GENDERS = ("M", "F", "U")
EXTERNAL_GENDERS = ("M", "F")


def _check_zip(value: str, what: str = "zip") -> None:
    if not ZIP_RE.match(value):
        raise ValueError(f"{what} {value!r} is not a 5-digit string")


@dataclass(frozen=True)
class HospitalRecord:
    """One de-identified hospitalization.

    ``discharge_month`` is 1-12, or 0 once the month has been generalized to
    year-only precision.
    """

    record_id: str
    hospital: str
    length_of_stay: int
    discharge_year: int
    discharge_month: int
    age_years: int
    age_months: int
    gender: str
    zip: str
    diagnoses: tuple[str, ...]
    admit_type: str = ""
    procedures: tuple[str, ...] = ()
    payers: tuple[str, ...] = ()
    charges: Decimal | None = None

    def __post_init__(self):
        if not self.record_id:
            raise ValueError("empty record_id")
        if not is_hospital_code(self.hospital):
            raise ValueError(f"bad hospital code {self.hospital!r}")
        object.__setattr__(self, "hospital", self.hospital.lower())
        if self.length_of_stay < 0:
            raise ValueError(f"negative length_of_stay {self.length_of_stay}")
        if not 0 <= self.discharge_month <= 12:
            raise ValueError(f"discharge_month {self.discharge_month} out of range")
        if self.age_years < 0 or self.age_months < 0:
            raise ValueError("negative age")
        if self.age_months // 12 != self.age_years:
            raise ValueError(
                f"age_months {self.age_months} is inconsistent with age_years {self.age_years}"
            )
        if self.gender not in HOSPITAL_GENDERS:
            raise ValueError(f"gender {self.gender!r} not in {HOSPITAL_GENDERS}")
        _check_zip(self.zip)
        if not self.diagnoses:
            raise ValueError("diagnoses list is empty")
        object.__setattr__(self, "diagnoses", tuple(normalize_icd9(c) for c in self.diagnoses))
        if self.charges is not None and self.charges < 0:
            raise ValueError(f"negative charges {self.charges}")

    @property
    def generalized(self) -> bool:
        """True once dates have been generalized to year-only precision."""
        return self.discharge_month == 0


@dataclass(frozen=True)
class ExternalRecord:
    """One subject harvested from a news story, already structured.

    Empty sets and ``None`` mean the story did not report the field; such
    fields never take part in matching.
    """

    ext_id: str
    name: str | None = None
    gender: str | None = None
    age_years: int | None = None
    incident_date: date | None = None
    zip_candidates: frozenset[str] = field(default_factory=frozenset)
    hospital_candidates: frozenset[str] = field(default_factory=frozenset)
    diagnosis_prefixes: frozenset[str] = field(default_factory=frozenset)
    dob: date | None = None
    source: str = ""
    # Raw story fields; prepare_external resolves them into the sets above.
    incident_type: str | None = None
    hospital_name: str | None = None

    def __post_init__(self):
        if not self.ext_id:
            raise ValueError("empty ext_id")
        if self.name is not None and not self.name.strip():
            object.__setattr__(self, "name", None)
        if self.name is None and not self.zip_candidates:
            raise ValueError("record has neither a name nor ZIP candidates")
        if self.gender is not None and self.gender not in EXTERNAL_GENDERS:
            raise ValueError(f"gender {self.gender!r} not in {EXTERNAL_GENDERS}")
        if self.age_years is not None and self.age_years < 0:
            raise ValueError(f"negative age {self.age_years}")
        for z in self.zip_candidates:
            _check_zip(z, "zip candidate")
        for h in self.hospital_candidates:
            if not is_hospital_code(h):
                raise ValueError(f"bad hospital code {h!r}")
        prefixes = frozenset(normalize_icd9(p, prefix=True) for p in self.diagnosis_prefixes)
        for p in prefixes:
            if len(p) != 3:
                raise ValueError(f"diagnosis prefix {p!r} must have exactly 3 characters")
        object.__setattr__(self, "zip_candidates", frozenset(self.zip_candidates))
        object.__setattr__(self, "hospital_candidates", frozenset(h.lower() for h in self.hospital_candidates))
        object.__setattr__(self, "diagnosis_prefixes", prefixes)
