"""Safe Harbor generalization, k-anonymity statistics and sensitive-code flags."""

from __future__ import annotations

import dataclasses
import logging
from collections import Counter
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .model.codes import icd9_prefix_match
from .model.io import read_prefix_list, read_table
from .model.records import HospitalRecord

log = logging.getLogger(__name__)

POPULATION_THRESHOLD = 20_000
SUPPRESSED_ZIP = "00000"
QI_FIELDS = ("dob", "birth_year", "gender", "zip", "zip3", "age_years", "age_months", "discharge_month")


def read_population_table(source) -> dict[str, int]:
    table = {}
    for line, row in read_table(source, ("zip3", "population")):
        key = row["zip3"]
        if len(key) != 3 or not key.isdigit():
            raise ValueError(f"population table line {line}: zip3 {key!r} is not 3 digits")
        pop = int(row["population"])
        if pop < 0:
            raise ValueError(f"population table line {line}: negative population")
        table[key] = pop
    return table


def generalize_zip(zip_code: str, population: Mapping[str, int]) -> str:
    """3-digit ZIP padded with zeros, or '00000' for small or unknown areas."""
    zip3 = zip_code[:3]
    if population.get(zip3, 0) > POPULATION_THRESHOLD:
        return zip3 + "00"
    return SUPPRESSED_ZIP


def safe_harbor(rec: HospitalRecord, population: Mapping[str, int]) -> HospitalRecord:
    """Generalize one record: 3-digit ZIP, year-only discharge, age in whole years."""
    return dataclasses.replace(
        rec,
        zip=generalize_zip(rec.zip, population),
        discharge_month=0,
        age_months=rec.age_years * 12,
    )


def qi_value(rec, field: str):
    if isinstance(rec, HospitalRecord):
        if field == "zip3":
            return rec.zip[:3]
        if field in ("dob", "birth_year"):
            raise ValueError(f"hospital records carry no {field}")
        return getattr(rec, field)
    if field in rec and rec[field] != "":
        return rec[field]
    if field == "zip3" and rec.get("zip"):
        return rec["zip"][:3]
    if field == "birth_year" and rec.get("dob"):
        return str(rec["dob"])[:4]
    raise ValueError(f"row has no value for quasi-identifier {field!r}")


def check_qi(qi: Sequence[str]) -> tuple[str, ...]:
    qi = tuple(qi)
    if not qi:
        raise ValueError("quasi-identifier is empty")
    if len(set(qi)) != len(qi):
        raise ValueError(f"duplicate fields in quasi-identifier {qi}")
    bad = [f for f in qi if f not in QI_FIELDS]
    if bad:
        raise ValueError(f"unknown quasi-identifier field(s) {bad}; valid fields: {', '.join(QI_FIELDS)}")
    return qi


def k_anonymity_histogram(dataset: Iterable, qi: Sequence[str]) -> dict[int, int]:
    """Map class size k to the number of records sitting in classes of size k."""
    qi = check_qi(qi)
    classes = Counter(tuple(qi_value(r, f) for f in qi) for r in dataset)
    hist = Counter()
    for size in classes.values():
        hist[size] += size
    return dict(sorted(hist.items()))


def uniqueness_fraction(dataset: Sequence, qi: Sequence[str]) -> float:
    if not len(dataset):
        log.warning("uniqueness_fraction on an empty dataset; reporting 0")
        return 0.0
    return k_anonymity_histogram(dataset, qi).get(1, 0) / len(dataset)


def flag_sensitive(rec: HospitalRecord, sensitive_prefixes: Iterable[str]) -> bool:
    prefixes = tuple(sensitive_prefixes)
    return any(icd9_prefix_match(code, p) for code in rec.diagnoses for p in prefixes)


def default_sensitive_prefixes() -> frozenset[str]:
    with resources.files("reident.data").joinpath("sensitive_prefixes.txt").open("rb") as fh:
        return read_prefix_list(fh)
