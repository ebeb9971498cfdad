"""Column-wise linear scan: every field predicate evaluated over every record.

No blocking of any kind; this is the oracle the index is checked against at
scale (the pure-Python :func:`match_exact` is too slow for 10^5 records).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..model.records import ExternalRecord, HospitalRecord
from . import _vec
from ..privacy import SUPPRESSED_ZIP
from .predicates import field_set, present_fields


def _encode(values: list[str]) -> tuple[np.ndarray, dict[str, int]]:
    vocab: dict[str, int] = {}
    codes = np.fromiter((vocab.setdefault(v, len(vocab)) for v in values), dtype=np.int64, count=len(values))
    return codes, vocab


class ScanMatcher:
    def __init__(self, dataset: Sequence[HospitalRecord], slack_days: int = 0):
        records = sorted(dataset, key=lambda r: r.record_id)
        self.slack_days = slack_days
        self.ids = np.array([r.record_id for r in records], dtype=object)
        self.n = len(records)
        self.gender, self.gender_vocab = _encode([r.gender for r in records])
        self.zip, self.zip_vocab = _encode([r.zip for r in records])
        self.zip3, self.zip3_vocab = _encode([r.zip[:3] for r in records])
        self.hospital, self.hospital_vocab = _encode([r.hospital for r in records])
        self.generalized = np.array([r.discharge_month == 0 for r in records], dtype=bool)
        self.suppressed = self.generalized & np.array([r.zip == SUPPRESSED_ZIP for r in records], dtype=bool)
        self.age_years = np.array([r.age_years for r in records], dtype=np.int64)
        self.age_months = np.array([r.age_months for r in records], dtype=np.int64)
        self.begin, self.end = _vec.window_bounds(records)
        self.windows = _vec.WidenedWindows(self.begin, self.end, slack_days)
        owners, prefixes = [], []
        for i, r in enumerate(records):
            for code in r.diagnoses:
                owners.append(i)
                prefixes.append(code[:3])
        self.diag_owner = np.array(owners, dtype=np.int64)
        self.diag_prefix, self.diag_vocab = _encode(prefixes)

    def __len__(self):
        return self.n

    @staticmethod
    def _lookup(vocab: dict[str, int], values: Iterable[str]) -> np.ndarray:
        """Boolean table over vocabulary codes, true for the wanted values."""
        table = np.zeros(len(vocab) + 1, dtype=bool)
        for v in values:
            if v in vocab:
                table[vocab[v]] = True
        return table

    def field_mask(self, field: str, ext: ExternalRecord) -> np.ndarray:
        s = self.slack_days
        if field == "gender":
            return self.gender == self.gender_vocab.get(ext.gender, -1)
        if field == "zip":
            raw = self._lookup(self.zip_vocab, ext.zip_candidates)[self.zip]
            gen = self.suppressed | self._lookup(self.zip3_vocab, {z[:3] for z in ext.zip_candidates})[self.zip3]
            return np.where(self.generalized, gen, raw)
        if field == "hospital":
            return self._lookup(self.hospital_vocab, ext.hospital_candidates)[self.hospital]
        if field == "admit_window":
            d = _vec.day_number(ext.incident_date)
            return (self.begin - s <= d) & (d <= self.end + s)
        if field == "age":
            if ext.dob is None:
                return self.age_years == ext.age_years
            return _vec.age_ok(ext.dob, self.windows, self.age_months, self.age_years, self.generalized)
        if field == "diagnosis":
            hit = self._lookup(self.diag_vocab, ext.diagnosis_prefixes)[self.diag_prefix]
            mask = np.zeros(self.n, dtype=bool)
            mask[self.diag_owner[hit]] = True
            return mask
        raise ValueError(f"unknown field {field!r}")

    def match(self, ext: ExternalRecord, use: Iterable[str]) -> list[str]:
        use = field_set(use)
        if not use:
            raise ValueError("match needs at least one field")
        active = use & present_fields(ext)
        if not active:
            return []
        mask = np.ones(self.n, dtype=bool)
        for f in sorted(active):
            mask &= self.field_mask(f, ext)
        return self.ids[mask].tolist()
