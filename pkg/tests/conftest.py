import dataclasses
from datetime import date
from decimal import Decimal

import pytest

from reident.model import ExternalRecord, HospitalRecord

MOTORCYCLE_DIAGNOSES = (
    "E8162", "80843", "51851", "86500", "80705", "5849", "8052", "2761", "78057", "2851",
)


def sacred_heart_record(**changes) -> HospitalRecord:
    """The 60-year-old motorcyclist discharged from hospital 162 in October 2011."""
    rec = HospitalRecord(
        record_id="r1",
        hospital="162",
        admit_type="1",
        length_of_stay=6,
        discharge_year=2011,
        discharge_month=10,
        age_years=60,
        age_months=725,
        gender="M",
        zip="98851",
        diagnoses=MOTORCYCLE_DIAGNOSES,
        procedures=("5781", "7939", "7919"),
        payers=("1", "6", "625"),
        charges=Decimal("71708.47"),
    )
    return dataclasses.replace(rec, **changes) if changes else rec


def soap_lake_external(**changes) -> ExternalRecord:
    """News subject: 61-year-old Soap Lake man, motorcycle crash, taken to Lincoln Hospital (137)."""
    ext = ExternalRecord(
        ext_id="n1",
        name="Raymond Boylston",
        gender="M",
        age_years=61,
        incident_date=date(2011, 10, 18),
        zip_candidates=frozenset({"98851"}),
        hospital_candidates=frozenset({"137"}),
        diagnosis_prefixes=frozenset({"E81", "E82"}),
        source="Spokesman Review 2011-10-23",
    )
    return dataclasses.replace(ext, **changes) if changes else ext


@pytest.fixture
def record():
    return sacred_heart_record()


@pytest.fixture
def external():
    return soap_lake_external()


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)
