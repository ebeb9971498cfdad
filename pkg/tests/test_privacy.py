import logging
import random

import pandas as pd
import pytest

from reident.privacy import (
    check_qi,
    default_sensitive_prefixes,
    flag_sensitive,
    generalize_zip,
    k_anonymity_histogram,
    read_population_table,
    safe_harbor,
    uniqueness_fraction,
)
from reident.synthgen import SynthConfig, generate

from conftest import sacred_heart_record


def groupby_histogram(rows, qi):
    """Independent oracle: pandas group sizes, weighted by record count."""
    frame = pd.DataFrame(rows, columns=list(qi))
    sizes = frame.groupby(list(qi), dropna=False).size()
    return {int(k): int(k * n) for k, n in sizes.value_counts().sort_index().items()}


def as_rows(records, qi):
    return [tuple(getattr(r, f) if f != "zip3" else r.zip[:3] for f in qi) for r in records]


# -- Safe Harbor --------------------------------------------------------------------------

def test_safe_harbor_large_area():
    rec = safe_harbor(sacred_heart_record(), {"988": 35_000})
    assert rec.zip == "98800"
    assert rec.discharge_month == 0 and rec.generalized
    assert rec.age_months == 720 and rec.age_years == 60
    assert rec.diagnoses == sacred_heart_record().diagnoses
    assert rec.hospital == "162" and rec.length_of_stay == 6


def test_safe_harbor_threshold_is_strict():
    assert safe_harbor(sacred_heart_record(), {"988": 20_000}).zip == "00000"
    assert safe_harbor(sacred_heart_record(), {"988": 20_001}).zip == "98800"


def test_missing_zip3_counts_as_empty():
    assert generalize_zip("98851", {}) == "00000"


def test_safe_harbor_idempotent():
    corpus = generate(SynthConfig(seed=2, n_hospital_records=500, n_externals=0, n_planted_unique=0,
                                  n_planted_ambiguous=0, n_planted_nomatch=0))
    for rec in corpus.hospital:
        once = safe_harbor(rec, corpus.population)
        assert safe_harbor(once, corpus.population) == once


def test_population_table(tmp_path):
    path = tmp_path / "pop.csv"
    path.write_text("zip3,population\n988,35000\n990,1200\n")
    assert read_population_table(path) == {"988": 35000, "990": 1200}
    path.write_text("zip3,population\n98,35000\n")
    with pytest.raises(ValueError, match="3 digits"):
        read_population_table(path)


# -- k-anonymity ----------------------------------------------------------------------------

def test_histogram_single_class():
    recs = [sacred_heart_record(record_id=str(i)) for i in range(7)]
    assert k_anonymity_histogram(recs, ["gender", "zip"]) == {7: 7}
    assert uniqueness_fraction(recs, ["gender", "zip"]) == 0.0


def test_histogram_all_distinct():
    recs = [sacred_heart_record(record_id=str(i), zip=f"98{i:03d}") for i in range(9)]
    assert k_anonymity_histogram(recs, ["zip"]) == {1: 9}
    assert uniqueness_fraction(recs, ["zip"]) == 1.0


def test_histogram_on_rows():
    rows = [
        {"dob": "1951-05-10", "gender": "M", "zip": "98851"},
        {"dob": "1951-05-10", "gender": "M", "zip": "98851"},
        {"dob": "1960-01-01", "gender": "F", "zip": "98851"},
    ]
    assert k_anonymity_histogram(rows, ["dob", "gender", "zip"]) == {1: 1, 2: 2}
    assert k_anonymity_histogram(rows, ["birth_year", "zip3"]) == {1: 1, 2: 2}


@pytest.mark.parametrize("seed", range(5))
def test_histogram_matches_groupby(seed):
    corpus = generate(SynthConfig(seed=seed, n_hospital_records=3000, n_externals=0, n_planted_unique=0,
                                  n_planted_ambiguous=0, n_planted_nomatch=0))
    for qi in (["gender", "zip"], ["gender", "zip", "age_years"], ["zip3", "age_months", "discharge_month"]):
        hist = k_anonymity_histogram(corpus.hospital, qi)
        assert hist == groupby_histogram(as_rows(corpus.hospital, qi), qi)
        assert sum(hist.values()) == len(corpus.hospital)
        assert sum(k * (n // k) for k, n in hist.items()) == len(corpus.hospital)
        assert all(n % k == 0 for k, n in hist.items())


def test_generalization_lowers_uniqueness():
    corpus = generate(SynthConfig(seed=6, n_hospital_records=3000, n_externals=0, n_planted_unique=0,
                                  n_planted_ambiguous=0, n_planted_nomatch=0))
    gen = [safe_harbor(r, corpus.population) for r in corpus.hospital]
    raw_u = uniqueness_fraction(corpus.hospital, ["gender", "zip", "age_months"])
    gen_u = uniqueness_fraction(gen, ["gender", "zip", "age_months"])
    assert gen_u <= raw_u
    assert uniqueness_fraction(gen, ["gender", "zip3", "age_years"]) <= raw_u


def test_empty_dataset_uniqueness(caplog):
    with caplog.at_level(logging.WARNING):
        assert uniqueness_fraction([], ["zip"]) == 0.0
    assert "empty" in caplog.text


@pytest.mark.parametrize("qi, message", [
    ([], "empty"),
    (["zip", "zip"], "duplicate"),
    (["zip", "shoe_size"], "valid fields"),
])
def test_bad_quasi_identifier(qi, message):
    with pytest.raises(ValueError, match=message):
        check_qi(qi)


def test_missing_value_in_row():
    with pytest.raises(ValueError, match="dob"):
        k_anonymity_histogram([{"zip": "98851"}], ["dob"])


# -- sensitive codes ----------------------------------------------------------------------------

def test_flag_sensitive():
    prefixes = default_sensitive_prefixes()
    assert {"042", "V08", "303", "304", "305"} <= prefixes
    assert flag_sensitive(sacred_heart_record(diagnoses=("80843", "3051")), prefixes)
    assert flag_sensitive(sacred_heart_record(diagnoses=("V1582",)), prefixes)
    assert not flag_sensitive(sacred_heart_record(), prefixes)
    assert not flag_sensitive(sacred_heart_record(diagnoses=("3051",)), [])


def test_random_flags_match_definition():
    rng = random.Random(0)
    prefixes = default_sensitive_prefixes()
    pool = ["3051", "2920", "80843", "E8162", "0980", "V1582", "4019", "V5811", "0421"]
    for _ in range(300):
        dx = tuple(rng.sample(pool, rng.randint(1, 4)))
        expected = any(code.startswith(p) for code in dx for p in prefixes)
        assert flag_sensitive(sacred_heart_record(diagnoses=dx), prefixes) == expected
