"""Vectorized pieces shared by the indexed and scan engines."""

from __future__ import annotations

from datetime import date

import numpy as np

from ..model.records import HospitalRecord
from ..temporal import admit_window, split_dates

EPOCH = date(1970, 1, 1).toordinal()


def window_bounds(records: list[HospitalRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Admit-window begin/end as int64 day numbers since 1970-01-01."""
    begin = np.empty(len(records), dtype=np.int64)
    end = np.empty(len(records), dtype=np.int64)
    cache = {}
    for i, rec in enumerate(records):
        key = (rec.discharge_year, rec.discharge_month, rec.length_of_stay)
        w = cache.get(key)
        if w is None:
            win = admit_window(*key)
            w = cache[key] = (win.begin.toordinal() - EPOCH, win.end.toordinal() - EPOCH)
        begin[i], end[i] = w
    return begin, end


def day_number(d: date) -> int:
    return d.toordinal() - EPOCH


class WidenedWindows:
    """Slack-widened window bounds as day numbers plus their (y, m, d) parts.

    Split once per engine so the age predicate is plain integer arithmetic.
    """

    def __init__(self, begin: np.ndarray, end: np.ndarray, slack_days: int):
        self.lo = begin - slack_days
        self.hi = end + slack_days
        # Day numbers share numpy's 1970-01-01 epoch, so the cast is direct.
        y, m, self.lo_day = split_dates(self.lo.astype("datetime64[D]"))
        self.lo_month = 12 * y + m
        y, m, self.hi_day = split_dates(self.hi.astype("datetime64[D]"))
        self.hi_month = 12 * y + m


def _months(dob: date, month: np.ndarray, day: np.ndarray) -> np.ndarray:
    return month - (12 * dob.year + dob.month) - (day < dob.day)


def age_ok(dob: date, win: WidenedWindows, age_months: np.ndarray, age_years: np.ndarray,
           generalized: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Vectorized age predicate for a known date of birth, over ``rows`` (all if None)."""
    cols = (win.lo_month, win.lo_day, win.hi_month, win.hi_day)
    if rows is not None:
        cols = tuple(c[rows] for c in cols)
    lo_month, lo_day, hi_month, hi_day = cols
    # Whole months go negative only for reference days before the birth
    # date. There the youngest age is 0, and a window ending before the
    # birth date leaves hi < 0 so nothing passes.
    lo = np.maximum(_months(dob, lo_month, lo_day), 0)
    hi = _months(dob, hi_month, hi_day)
    ok = (lo <= age_months) & (age_months <= hi)
    if generalized.any():
        gen = (hi >= 0) & (lo // 12 <= age_years) & (age_years <= hi // 12)
        ok = np.where(generalized, gen, ok)
    return ok
