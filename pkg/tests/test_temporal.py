import random
from datetime import date, timedelta

import pytest
from hypothesis import given, strategies as st

from reident.temporal import (
    AdmitWindow,
    MonthWindow,
    admit_window,
    age_months_at,
    age_months_range,
    birth_month_window,
    days_in_month,
    in_window,
    shift_month,
)

ONE = timedelta(days=1)


# -- oracles ----------------------------------------------------------------------
# Each one walks the calendar a day or a month at a time instead of using the
# closed-form arithmetic under test.

def oracle_window(year, month, los):
    days = []
    d = date(year, month, 1)
    while d.month == month:
        days.append(d)
        d += ONE
    begin, end = days[0], days[-1]
    for _ in range(los):
        begin -= ONE
        end -= ONE
    return begin, end


def oracle_whole_months(dob, ref):
    """Count monthly anniversaries reached by ``ref``.

    An anniversary falling on a day the month lacks (Jan 31 -> February)
    rolls over to the first of the next month.
    """
    count, y, m = 0, dob.year, dob.month
    while True:
        y, m = (y, m + 1) if m < 12 else (y + 1, 1)
        try:
            anniversary = date(y, m, dob.day)
        except ValueError:
            anniversary = date(y, m + 1, 1) if m < 12 else date(y + 1, 1, 1)
        if anniversary > ref:
            return count
        count += 1


def _months_between(b, d):
    # Same convention as oracle_whole_months, written as the textbook formula
    # so the brute force below stays fast; cross-checked in test_whole_month_formula.
    return 12 * (d.year - b.year) + d.month - b.month - (d.day < b.day)


def oracle_birth_months(age_months, begin, end):
    """Every (birth day, reference day) pair, checked one by one."""
    months = set()
    d = begin
    while d <= end:
        # Whole months can only come out right for births in the two months
        # just before d - age_months; scan a generous four.
        y, m = shift_month(d.year, d.month, -age_months - 2)
        b = date(y, m, 1)
        y, m = shift_month(d.year, d.month, -age_months + 2)
        stop = min(d, date(y, m, 1))
        while b <= stop:
            if _months_between(b, d) == age_months:
                months.add((b.year, b.month))
            b += ONE
        d += ONE
    return sorted(months)


# -- admit_window -----------------------------------------------------------------

def test_admit_window_october_six_day_stay():
    w = admit_window(2011, 10, 6)
    assert (w.begin, w.end) == (date(2011, 9, 25), date(2011, 10, 25))
    assert in_window(date(2011, 10, 18), w)
    assert str(w) == "[2011-09-25, 2011-10-25]"


@pytest.mark.parametrize("args, begin, end", [
    ((2011, 10, 0), date(2011, 10, 1), date(2011, 10, 31)),
    ((2011, 1, 45), date(2010, 11, 17), date(2010, 12, 17)),
    ((2012, 3, 31), date(2012, 1, 30), date(2012, 2, 29)),
])
def test_admit_window_examples(args, begin, end):
    assert oracle_window(*args) == (begin, end)
    w = admit_window(*args)
    assert (w.begin, w.end) == (begin, end)


def test_admit_window_matches_day_walk():
    rng = random.Random(20111018)
    for _ in range(500):
        y, m, los = rng.randint(1900, 2100), rng.randint(1, 12), rng.randint(0, 400)
        w = admit_window(y, m, los)
        assert (w.begin, w.end) == oracle_window(y, m, los)


@pytest.mark.parametrize("year", [1900, 2000, 2011, 2012])
def test_window_width_is_month_length(year):
    for month in range(1, 13):
        w = admit_window(year, month, 17)
        assert w.days == days_in_month(year, month)
    assert admit_window(year, 2, 0).days == (29 if year in (2000, 2012) else 28)


def test_in_window_is_forward_simulation():
    # Admission on d with a stay of los days means discharge on d + los.
    rng = random.Random(7)
    for _ in range(10_000):
        y, m, los = rng.randint(1950, 2050), rng.randint(1, 12), rng.randint(0, 90)
        w = admit_window(y, m, los)
        d = w.begin + timedelta(days=rng.randint(-40, 70))
        discharge = d + timedelta(days=los)
        assert in_window(d, w) == ((discharge.year, discharge.month) == (y, m))


def test_in_window_boundaries():
    w = AdmitWindow(date(2011, 9, 25), date(2011, 10, 25))
    assert in_window(date(2011, 9, 25), w)
    assert in_window(date(2011, 10, 25), w)
    assert not in_window(date(2011, 10, 26), w)
    assert not in_window(date(2011, 9, 24), w)


def test_generalized_month_covers_year():
    w = admit_window(2011, 0, 6)
    assert (w.begin, w.end) == (date(2010, 12, 26), date(2011, 12, 25))


def test_window_rejects_bad_input():
    with pytest.raises(ValueError):
        admit_window(2011, 10, -1)
    with pytest.raises(ValueError):
        AdmitWindow(date(2011, 2, 1), date(2011, 1, 1))


def test_widened():
    w = admit_window(2011, 10, 6).widened(2)
    assert (w.begin, w.end) == (date(2011, 9, 23), date(2011, 10, 27))


# -- ages -----------------------------------------------------------------------

@pytest.mark.parametrize("dob, ref, months", [
    (date(1951, 5, 10), date(2011, 10, 18), 725),
    (date(2011, 10, 18), date(2011, 10, 18), 0),
    (date(2010, 10, 19), date(2011, 10, 18), 11),
    (date(2011, 1, 31), date(2011, 2, 28), 0),
    (date(2011, 1, 31), date(2011, 3, 1), 1),
])
def test_age_months_at(dob, ref, months):
    assert oracle_whole_months(dob, ref) == months
    assert age_months_at(dob, ref) == months


def test_age_months_matches_anniversary_walk():
    rng = random.Random(3)
    for _ in range(2000):
        dob = date(1900, 1, 1) + timedelta(days=rng.randrange(40_000))
        ref = dob + timedelta(days=rng.randrange(3000))
        assert age_months_at(dob, ref) == oracle_whole_months(dob, ref)


def test_whole_month_formula():
    rng = random.Random(4)
    for _ in range(2000):
        b = date(1990, 1, 1) + timedelta(days=rng.randrange(8000))
        d = b + timedelta(days=rng.randrange(1500))
        assert _months_between(b, d) == oracle_whole_months(b, d)


def test_age_months_rejects_future_birth():
    with pytest.raises(ValueError):
        age_months_at(date(2012, 1, 1), date(2011, 1, 1))


@given(st.dates(min_value=date(1900, 1, 1), max_value=date(2090, 1, 1)),
       st.integers(0, 3000), st.integers(0, 400))
def test_age_months_monotone(dob, a, step):
    r1 = dob + timedelta(days=a)
    r2 = r1 + timedelta(days=step)
    assert age_months_at(dob, r1) <= age_months_at(dob, r2)


@given(st.dates(min_value=date(1900, 1, 1), max_value=date(2090, 1, 1)), st.integers(0, 100))
def test_whole_years(dob, k):
    if (dob.month, dob.day) == (2, 29):
        dob = dob.replace(day=28)  # no anniversary in common years
    assert age_months_at(dob, dob.replace(year=dob.year + k)) == 12 * k


def test_age_months_range():
    w = admit_window(2011, 10, 6)
    assert age_months_range(date(1951, 5, 10), w) == (724, 725)
    # Born inside the window: youngest age is zero.
    assert age_months_range(date(2011, 10, 1), w) == (0, 0)
    assert age_months_range(date(2011, 11, 1), w) is None


# -- birth months ------------------------------------------------------------------

def test_birth_month_window_newborn():
    w = birth_month_window(0, AdmitWindow(date(2011, 10, 1), date(2011, 10, 31)))
    assert w.months == ((2011, 9), (2011, 10))
    assert oracle_birth_months(0, date(2011, 10, 1), date(2011, 10, 31)) == list(w.months)


def test_birth_month_window_single_day():
    day = date(2011, 10, 15)
    w = birth_month_window(12, AdmitWindow(day, day))
    assert w.months == ((2010, 9), (2010, 10))
    assert oracle_birth_months(12, day, day) == list(w.months)


def test_birth_month_window_725():
    win = admit_window(2011, 10, 6)
    w = birth_month_window(725, win)
    assert list(w.months) == oracle_birth_months(725, win.begin, win.end)
    assert w.months == ((1951, 3), (1951, 4), (1951, 5))


def test_birth_month_window_can_span_four_months():
    # Discharged March 2011 after 30 days: the window runs Jan 30 - Mar 1
    # and crosses the short February, so four birth months are possible.
    win = admit_window(2011, 3, 30)
    assert (win.begin, win.end) == (date(2011, 1, 30), date(2011, 3, 1))
    expected = [(2010, 12), (2011, 1), (2011, 2), (2011, 3)]
    assert oracle_birth_months(0, win.begin, win.end) == expected
    assert list(birth_month_window(0, win).months) == expected


def test_birth_month_window_matches_oracle():
    rng = random.Random(11)
    for _ in range(200):
        win = admit_window(rng.randint(1990, 2020), rng.randint(1, 12), rng.randint(0, 60))
        age = rng.randint(0, 1200)
        w = birth_month_window(age, win)
        assert list(w.months) == oracle_birth_months(age, win.begin, win.end)
        # Always contains the month the plain month subtraction points at.
        assert shift_month(win.begin.year, win.begin.month, -age) in w.months


def test_month_window_validation():
    with pytest.raises(ValueError):
        MonthWindow(())
    with pytest.raises(ValueError):
        MonthWindow(((2011, 1), (2011, 3)))
    assert str(MonthWindow(((2011, 12), (2012, 1)))) == "2011-12,2012-01"
    with pytest.raises(ValueError):
        birth_month_window(-1, admit_window(2011, 1, 0))


def test_shift_month():
    assert shift_month(2011, 1, -1) == (2010, 12)
    assert shift_month(2011, 12, 1) == (2012, 1)
    assert shift_month(2011, 10, -725) == (1951, 5)
