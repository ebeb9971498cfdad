"""Domain types, code semantics and file formats."""

from .codes import (
    DEFAULT_INCIDENT_PREFIXES,
    OBSERVED_PREFIXES,
    CodeDictionary,
    icd9_prefix_match,
    incident_to_prefixes,
    normalize_icd9,
    normalize_text,
    resolve_hospital,
)
from .io import (
    ParseReport,
    RowError,
    SchemaError,
    parse_external_dataset,
    parse_hospital_dataset,
    write_external_csv,
    write_hospital_csv,
)
from .records import ExternalRecord, HospitalRecord

__all__ = [
    "DEFAULT_INCIDENT_PREFIXES", "OBSERVED_PREFIXES", "CodeDictionary", "ExternalRecord",
    "HospitalRecord", "ParseReport", "RowError", "SchemaError", "icd9_prefix_match",
    "incident_to_prefixes", "normalize_icd9", "normalize_text", "parse_external_dataset",
    "parse_hospital_dataset", "resolve_hospital", "write_external_csv", "write_hospital_csv",
]
