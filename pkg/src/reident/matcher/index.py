"""Blocked inverted index answering exact-match queries.

Posting lists (sorted int32 record positions) exist for gender, ZIP,
hospital, age in years and 3-character diagnosis prefix. Admission windows
are served by a day-ordered array of window starts: a record's window
[begin, end] contains day ``d`` only if ``begin`` lies in
``[d - width + 1, d]``, so one bisection bounds the candidates.

A query starts from the cheapest source, then filters the survivors field by
field. Records are stored in record_id order, so position order is output
order.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from ..model.records import ExternalRecord, HospitalRecord
from . import _vec
from ..privacy import SUPPRESSED_ZIP
from .predicates import field_set, ordered, present_fields


def _freeze(postings: dict) -> dict:
    return {k: np.asarray(v, dtype=np.int32) for k, v in postings.items()}


class MatchIndex:
    def __init__(self, dataset: Sequence[HospitalRecord], slack_days: int = 0):
        records = sorted(dataset, key=lambda r: r.record_id)
        self.slack_days = slack_days
        self.ids = np.array([r.record_id for r in records], dtype=object)
        self.records = records
        n = self.n = len(records)

        gender, zip_raw, zip3, hospital, age_years, diag = (defaultdict(list) for _ in range(6))
        suppressed = []
        for i, rec in enumerate(records):
            gender[rec.gender].append(i)
            hospital[rec.hospital].append(i)
            age_years[rec.age_years].append(i)
            if not rec.generalized:
                zip_raw[rec.zip].append(i)
            elif rec.zip == SUPPRESSED_ZIP:
                suppressed.append(i)
            else:
                zip3[rec.zip[:3]].append(i)
            for p in {c[:3] for c in rec.diagnoses}:
                diag[p].append(i)
        self.gender = _freeze(gender)
        self.zip_raw = _freeze(zip_raw)
        self.zip3 = _freeze(zip3)
        self.suppressed = np.asarray(suppressed, dtype=np.int32)
        self.hospital = _freeze(hospital)
        self.age_years = _freeze(age_years)
        self.diagnosis = _freeze(diag)

        self.gender_col = np.array([r.gender for r in records], dtype="U1")
        self.age_years_col = np.array([r.age_years for r in records], dtype=np.int64)
        self.age_months_col = np.array([r.age_months for r in records], dtype=np.int64)
        self.generalized_col = np.array([r.generalized for r in records], dtype=bool)
        self.begin, self.end = _vec.window_bounds(records)
        self.windows = _vec.WidenedWindows(self.begin, self.end, slack_days)
        self.by_begin = np.argsort(self.begin, kind="stable").astype(np.int32)
        self.sorted_begin = self.begin[self.by_begin].tolist()
        self.max_width = int((self.end - self.begin).max()) + 1 if n else 0

    def __len__(self):
        return self.n

    # -- candidate sources -------------------------------------------------

    def _postings(self, field: str, ext: ExternalRecord) -> list[np.ndarray]:
        if field == "gender":
            return [self.gender.get(ext.gender, _EMPTY)]
        if field == "zip":
            lists = [self.zip_raw.get(z, _EMPTY) for z in ext.zip_candidates]
            lists += [self.zip3.get(p, _EMPTY) for p in {z[:3] for z in ext.zip_candidates}]
            lists.append(self.suppressed)
            return lists
        if field == "hospital":
            return [self.hospital.get(h, _EMPTY) for h in ext.hospital_candidates]
        if field == "diagnosis":
            return [self.diagnosis.get(p, _EMPTY) for p in ext.diagnosis_prefixes]
        if field == "age" and ext.dob is None:
            return [self.age_years.get(ext.age_years, _EMPTY)]
        return None

    def _window_slice(self, ext: ExternalRecord) -> tuple[int, int]:
        d = _vec.day_number(ext.incident_date)
        lo = bisect_left(self.sorted_begin, d - self.slack_days - self.max_width + 1)
        hi = bisect_right(self.sorted_begin, d + self.slack_days)
        return lo, hi

    # -- residual checks ----------------------------------------------------

    def _filter(self, field: str, ext: ExternalRecord, cand: np.ndarray) -> np.ndarray:
        if field == "gender":
            return cand[self.gender_col[cand] == ext.gender]
        if field == "admit_window":
            d = _vec.day_number(ext.incident_date)
            s = self.slack_days
            keep = (self.begin[cand] - s <= d) & (d <= self.end[cand] + s)
            return cand[keep]
        if field == "age":
            if ext.dob is None:
                return cand[self.age_years_col[cand] == ext.age_years]
            keep = _vec.age_ok(ext.dob, self.windows, self.age_months_col[cand],
                               self.age_years_col[cand], self.generalized_col[cand], rows=cand)
            return cand[keep]
        lists = self._postings(field, ext)
        if len(lists) == 1:
            # Both sides are sorted positions: a binary search per candidate.
            post = lists[0]
            if not len(post):
                return _EMPTY
            at = np.minimum(np.searchsorted(post, cand), len(post) - 1)
            return cand[post[at] == cand]
        mark = np.zeros(self.n, dtype=bool)
        for arr in lists:
            mark[arr] = True
        return cand[mark[cand]]

    # -- query ----------------------------------------------------------------

    def match(self, ext: ExternalRecord, use: Iterable[str]) -> list[str]:
        use = field_set(use)
        if not use:
            raise ValueError("match needs at least one field")
        active = ordered(use & present_fields(ext))
        if not active or not self.n:
            return []

        best = None  # (size, field, postings or window slice)
        for f in active:
            if f == "admit_window":
                lo, hi = self._window_slice(ext)
                src = (hi - lo, f, (lo, hi))
            else:
                lists = self._postings(f, ext)
                if lists is None:
                    continue
                src = (sum(len(a) for a in lists), f, lists)
            if best is None or src[0] < best[0]:
                best = src
                if src[0] == 0:
                    return []

        if best is None:
            cand = np.arange(self.n, dtype=np.int32)
            driver = None
        else:
            _, driver, src = best
            if driver == "admit_window":
                cand = np.sort(self.by_begin[src[0]:src[1]])
            elif len(src) == 1:
                cand = src[0]
            else:
                cand = np.unique(np.concatenate(src))

        for f in sorted(active, key=_FILTER_ORDER.index):
            # Posting lists are exact; a window slice only bounds the start day.
            if f == driver and f != "admit_window":
                continue
            cand = self._filter(f, ext, cand)
            if not len(cand):
                return []
        return self.ids[cand].tolist()


_EMPTY = np.empty(0, dtype=np.int32)
# Residual filters run most selective first so later ones see fewer rows.
_FILTER_ORDER = ("diagnosis", "hospital", "zip", "admit_window", "age", "gender")


def build_index(dataset: Sequence[HospitalRecord], slack_days: int = 0) -> MatchIndex:
    return MatchIndex(dataset, slack_days)
