"""Calendar inference: admission windows, ages in months, birth-month windows.

All dates are proleptic Gregorian civil dates (``datetime.date``); there is no
timezone handling anywhere.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np


@dataclass(frozen=True)
class AdmitWindow:
    """Inclusive range of dates on which an admission could have happened."""

    begin: date
    end: date

    def __post_init__(self):
        if self.begin > self.end:
            raise ValueError(f"window begin {self.begin} is after end {self.end}")

    @property
    def days(self) -> int:
        return (self.end - self.begin).days + 1

    def widened(self, slack_days: int) -> AdmitWindow:
        if not slack_days:
            return self
        delta = timedelta(days=slack_days)
        return AdmitWindow(self.begin - delta, self.end + delta)

    def __str__(self):
        return f"[{self.begin.isoformat()}, {self.end.isoformat()}]"


@dataclass(frozen=True)
class MonthWindow:
    """Contiguous run of (year, month) pairs."""

    months: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.months:
            raise ValueError("month window is empty")
        for a, b in zip(self.months, self.months[1:]):
            if shift_month(*a, 1) != b:
                raise ValueError(f"months {a} and {b} are not consecutive")

    def __len__(self):
        return len(self.months)

    def __iter__(self):
        return iter(self.months)

    def __str__(self):
        return ",".join(f"{y:04d}-{m:02d}" for y, m in self.months)


def days_in_month(year: int, month: int) -> int:
    return calendar.monthrange(year, month)[1]


def shift_month(year: int, month: int, n: int) -> tuple[int, int]:
    """Move ``n`` calendar months forward (negative ``n`` goes back)."""
    idx = year * 12 + (month - 1) + n
    return idx // 12, idx % 12 + 1


def admit_window(discharge_year: int, discharge_month: int, los_days: int) -> AdmitWindow:
    """Admission window for a stay of ``los_days`` discharged in the given month.

    ``discharge_month == 0`` means the month was generalized away and only the
    year is known; the window then covers the whole discharge year.

    >>> str(admit_window(2011, 10, 6))
    '[2011-09-25, 2011-10-25]'
    """
    if los_days < 0:
        raise ValueError(f"negative length of stay: {los_days}")
    if discharge_month == 0:
        first, last = date(discharge_year, 1, 1), date(discharge_year, 12, 31)
    else:
        first = date(discharge_year, discharge_month, 1)
        last = date(discharge_year, discharge_month, days_in_month(discharge_year, discharge_month))
    stay = timedelta(days=los_days)
    return AdmitWindow(first - stay, last - stay)


def in_window(day: date, window: AdmitWindow) -> bool:
    return window.begin <= day <= window.end


def age_months_at(dob: date, ref: date) -> int:
    """Whole months elapsed from ``dob`` to ``ref``.

    A month only counts once the day-of-month of ``dob`` has been reached.
    """
    if dob > ref:
        raise ValueError(f"date of birth {dob} is after reference date {ref}")
    months = 12 * (ref.year - dob.year) + (ref.month - dob.month)
    if ref.day < dob.day:
        months -= 1
    return months


def age_months_range(dob: date, window: AdmitWindow) -> tuple[int, int] | None:
    """Smallest and largest age in months reached by ``dob`` over ``window``.

    ``None`` if the person is not yet born at the end of the window.
    """
    if dob > window.end:
        return None
    return age_months_at(dob, max(dob, window.begin)), age_months_at(dob, window.end)


def birth_month_window(age_months: int, window: AdmitWindow) -> MonthWindow:
    """Birth months compatible with ``age_months`` measured on some day of ``window``.

    On reference day ``d`` a person aged ``A`` whole months was born either in
    month ``d - A`` (on or before ``d``'s day-of-month) or in month
    ``d - A - 1`` (strictly after that day-of-month, when that month is long
    enough to have such a day).
    """
    if age_months < 0:
        raise ValueError(f"negative age: {age_months}")
    months = set()
    day = window.begin
    one = timedelta(days=1)
    while day <= window.end:
        same = shift_month(day.year, day.month, -age_months)
        months.add(same)
        prev = shift_month(day.year, day.month, -age_months - 1)
        if day.day < days_in_month(*prev):
            months.add(prev)
        day += one
    return MonthWindow(tuple(sorted(months)))


# Vectorized helpers used by the matching engines. Dates are numpy
# datetime64[D] arrays.

def split_dates(days: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a datetime64[D] array into integer (year, month, day) arrays."""
    years = days.astype("datetime64[Y]")
    months = days.astype("datetime64[M]")
    y = years.astype(np.int64) + 1970
    m = (months - years).astype(np.int64) + 1
    d = (days - months).astype(np.int64) + 1
    return y, m, d
