"""Seeded synthetic corpus with planted ground truth.

All randomness comes from one ``random.Random(seed)`` (Mersenne Twister), so
a given seed and config reproduce the same files on a given Python version.

Planted externals are derived from hospital records built for them:

* unique: one target record carrying a *marker* diagnosis code whose 3-char
  prefix no other record has; the external lists only that marker prefix, so
  no other record can ever match it. Fields in ``planted_drop`` are then
  perturbed so the match only appears once exactly those fields are dropped.
* ambiguous: 2-4 records identical on every matched field share a marker.
* nomatch: the external carries a marker prefix no record has.

Because diagnosis is not droppable under the default audit settings, every
planted outcome is fixed by construction.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from decimal import Decimal
from typing import Mapping

from .matcher.enrich import PublicRecord, PublicRecordsTable
from .matcher.predicates import DEFAULT_DROPPABLE, ordered
from .model.codes import OBSERVED_PREFIXES
from .model.records import ExternalRecord, HospitalRecord
from .temporal import admit_window, age_months_at, days_in_month, shift_month

# 3-character prefixes reserved for planted markers; nothing else uses them.
MARKER_PREFIXES = tuple(f"{i:03d}" for i in range(100, 240)) + tuple(f"{i:03d}" for i in range(600, 680))

BACKGROUND_PREFIXES = (
    "250", "276", "285", "401", "414", "427", "428", "486", "496", "518", "530", "562",
    "569", "584", "599", "715", "724", "780", "786", "789", "799", "800", "802", "805",
    "807", "808", "812", "813", "820", "823", "824", "850", "852", "854", "860", "861",
    "864", "873", "884", "920", "922", "923", "924", "959", "V45", "V58", "E84", "E88",
    "E91", "E92",
)
FAMILY_PREFIXES = {"motor_vehicle": ("E81", "E82"), "assault": ("E96",)}
SENSITIVE_CODES = ("3050", "3051", "30390", "30400", "30500", "2911", "2920", "0980", "0971", "V1582", "042")

DEFAULT_ZIP_POOL = tuple(
    f"{p}{s:02d}"
    for p in ("980", "981", "982", "983", "984", "985", "986", "988", "989", "990", "991", "992", "993", "994")
    for s in range(1, 30, 3)
)
DEFAULT_HOSPITAL_POOL = tuple(str(i) for i in range(1, 176)) + ("29a", "104a", "131b", "137a", "162a", "170a")
DEFAULT_INCIDENT_MIX = {"motor_vehicle": 0.008, "assault": 0.002, "other": 0.99}
DEFAULT_DROP_MIX = {(): 30.0, ("zip",): 2.0, ("age",): 2.0, ("hospital",): 1.0, ("age", "hospital"): 1.0}

FIRST_NAMES = (
    "Alice", "Andrew", "Barbara", "Brian", "Carol", "Charles", "Dana", "David", "Elena", "Edward",
    "Fiona", "Frank", "Grace", "George", "Helen", "Henry", "Irene", "Isaac", "Julia", "James",
    "Karen", "Kevin", "Laura", "Louis", "Maria", "Mark", "Nora", "Nathan", "Olivia", "Oscar",
    "Paula", "Peter", "Rachel", "Raymond", "Sara", "Steven", "Tina", "Thomas", "Vera", "Walter",
)
LAST_NAMES = (
    "Anders", "Baker", "Carver", "Dawson", "Ellis", "Fischer", "Garcia", "Hughes", "Ingram", "Jensen",
    "Keller", "Larsen", "Moreno", "Nguyen", "Olsen", "Porter", "Quinn", "Reyes", "Sato", "Turner",
    "Ulrich", "Vance", "Walsh", "Xu", "Young", "Zimmer", "Berg", "Cole", "Dunn", "Frost",
    "Grant", "Hale", "Irwin", "Kemp", "Lowe", "Marsh", "Nash", "Pike", "Rowe", "Stone",
)


class SynthConfigError(ValueError):
    """The requested corpus cannot be generated as specified."""


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_hospital_records: int = 2000
    n_externals: int = 100
    n_planted_unique: int = 40
    n_planted_ambiguous: int = 10
    n_planted_nomatch: int = 25
    zip_pool: tuple[str, ...] = DEFAULT_ZIP_POOL
    hospital_pool: tuple[str, ...] = DEFAULT_HOSPITAL_POOL
    incident_mix: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_INCIDENT_MIX))
    sensitive_rate: float = 0.05
    year: int = 2011
    drop_mix: Mapping[tuple[str, ...], float] = field(default_factory=lambda: dict(DEFAULT_DROP_MIX))
    n_planted_sensitive: int = 0

    def validate(self) -> None:
        planted = self.n_planted_unique + self.n_planted_ambiguous + self.n_planted_nomatch
        if min(self.n_planted_unique, self.n_planted_ambiguous, self.n_planted_nomatch,
               self.n_externals, self.n_hospital_records) < 0:
            raise SynthConfigError("counts must be non-negative")
        if planted > self.n_externals:
            raise SynthConfigError(f"{planted} planted externals exceed n_externals={self.n_externals}")
        if planted > len(MARKER_PREFIXES):
            raise SynthConfigError(
                f"{planted} planted externals need as many marker prefixes; only {len(MARKER_PREFIXES)} exist")
        # Ambiguous groups take up to 4 records each.
        needed = self.n_planted_unique + 4 * self.n_planted_ambiguous + self.n_planted_nomatch
        if needed > self.n_hospital_records:
            raise SynthConfigError(
                f"planted scenarios may need {needed} hospital records; n_hospital_records={self.n_hospital_records}")
        if len(set(self.zip_pool)) < 2 or len(set(self.hospital_pool)) < 2:
            raise SynthConfigError("zip_pool and hospital_pool need at least two distinct values "
                                   "so planted fields can be perturbed")
        if not self.incident_mix or any(w <= 0 for w in self.incident_mix.values()):
            raise SynthConfigError("incident_mix weights must be positive")
        unknown = set(self.incident_mix) - set(FAMILY_PREFIXES) - {"other"}
        if unknown:
            raise SynthConfigError(f"unknown incident types {sorted(unknown)}")
        if not self.drop_mix or any(w <= 0 for w in self.drop_mix.values()):
            raise SynthConfigError("drop_mix weights must be positive")
        for drop in self.drop_mix:
            if len(drop) > 2 or not set(drop) <= DEFAULT_DROPPABLE:
                raise SynthConfigError(
                    f"planted drop {drop} must be at most two of {sorted(DEFAULT_DROPPABLE)}")
        if not 0 <= self.sensitive_rate <= 1:
            raise SynthConfigError("sensitive_rate must lie in [0, 1]")
        if not 0 <= self.n_planted_sensitive <= self.n_planted_unique:
            raise SynthConfigError("n_planted_sensitive must lie in [0, n_planted_unique]")


@dataclass
class Corpus:
    hospital: list[HospitalRecord]
    externals: list[ExternalRecord]
    public_records: PublicRecordsTable
    population: dict[str, int]
    manifest: dict[str, dict]

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"


class _Builder:
    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.families = list(cfg.incident_mix)
        self.family_weights = [cfg.incident_mix[f] for f in self.families]
        self.used_names: set[str] = set()

    # -- hospital side --------------------------------------------------------

    def code(self, prefix: str) -> str:
        room = 5 - len(prefix)
        return prefix + "".join(str(self.rng.randrange(10)) for _ in range(self.rng.randint(0, room)))

    def diagnoses(self, family: str, sensitive: bool, marker: str | None = None) -> tuple[str, ...]:
        rng = self.rng
        codes = []
        if marker is not None:
            codes.append(self.code(marker))
        if family in FAMILY_PREFIXES:
            codes.append(self.code(rng.choice(FAMILY_PREFIXES[family])))
        for _ in range(rng.randint(1, 4)):
            codes.append(self.code(rng.choice(BACKGROUND_PREFIXES)))
        if sensitive:
            codes.append(rng.choice(SENSITIVE_CODES))
        return tuple(dict.fromkeys(codes))

    def record(self, marker: str | None = None, sensitive: bool | None = None,
               genders=("M", "F", "U"), gender_weights=(49, 49, 2)) -> HospitalRecord:
        rng, cfg = self.rng, self.cfg
        family = rng.choices(self.families, self.family_weights)[0]
        if sensitive is None:
            sensitive = rng.random() < cfg.sensitive_rate
        age_months = rng.randint(0, 95 * 12 + 11)
        return HospitalRecord(
            record_id="pending",
            hospital=rng.choice(cfg.hospital_pool),
            admit_type=rng.choice(("1", "1", "2", "3")),
            length_of_stay=min(int(rng.expovariate(1 / 4)), 120),
            discharge_year=cfg.year,
            discharge_month=rng.randint(1, 12),
            age_years=age_months // 12,
            age_months=age_months,
            gender=rng.choices(genders, gender_weights)[0],
            zip=rng.choice(cfg.zip_pool),
            diagnoses=self.diagnoses(family, sensitive, marker),
            procedures=tuple(f"{rng.randint(1, 9999):04d}" for _ in range(rng.randint(0, 3))),
            payers=tuple(rng.sample(("1", "2", "3", "6", "625"), rng.randint(1, 3))),
            charges=Decimal(rng.randint(50_000, 20_000_000)) / 100,
        )

    # -- external side ----------------------------------------------------------

    def name(self) -> str:
        rng = self.rng
        while True:
            name = f"{rng.choice(FIRST_NAMES)} {rng.choice('ABCDEFGHJKLMNPRSTW')}. {rng.choice(LAST_NAMES)}"
            if name not in self.used_names:
                self.used_names.add(name)
                return name

    def incident_and_dob(self, rec: HospitalRecord) -> tuple[date, date]:
        """Incident day inside the record's window and a birth date giving its age there."""
        rng = self.rng
        window = admit_window(rec.discharge_year, rec.discharge_month, rec.length_of_stay)
        incident = window.begin + timedelta(days=rng.randrange(window.days))
        y, m = shift_month(incident.year, incident.month, -rec.age_months)
        dob = date(y, m, rng.randint(1, min(incident.day, days_in_month(y, m))))
        assert age_months_at(dob, incident) == rec.age_months
        return incident, dob

    def other(self, pool, value):
        return self.rng.choice([v for v in pool if v != value])

    def planted_external(self, rec: HospitalRecord, prefix: str, drop=()) -> tuple[dict, list[PublicRecord]]:
        """External fields and public-records rows derived from ``rec``."""
        rng, cfg = self.rng, self.cfg
        incident, dob = self.incident_and_dob(rec)
        name = self.name()
        age = rec.age_years
        zips = {rec.zip}
        if rng.random() < 0.3:
            zips.add(rng.choice(cfg.zip_pool))
        hospitals = {rec.hospital} if rng.random() < 0.7 else set()
        if "zip" in drop:
            zips = {self.other(cfg.zip_pool, rec.zip)}
        if "age" in drop:
            # Story and public records both one year off, as in a misreported age.
            age += 1
            dob = _minus_year(dob)
        if "hospital" in drop:
            hospitals = {self.other(cfg.hospital_pool, rec.hospital)}
        direct_zip = rng.random() < 0.2
        fields = dict(
            name=name,
            gender=rec.gender,
            age_years=age if (rng.random() < 0.9 or "age" in drop) else None,
            incident_date=incident,
            zip_candidates=frozenset(zips) if direct_zip else frozenset(),
            hospital_candidates=frozenset(hospitals),
            diagnosis_prefixes=frozenset({prefix}),
            source="synthetic",
        )
        public = [PublicRecord(name, dob, frozenset(zips), age_hint=None)]
        if fields["age_years"] is not None and rng.random() < 0.3:
            # Namesake decades apart in age; the age filter must discard it.
            public.append(PublicRecord(name, _minus_year(dob, 30), frozenset({rng.choice(cfg.zip_pool)})))
        return fields, public

    def random_external(self) -> tuple[dict, list[PublicRecord]]:
        rng, cfg = self.rng, self.cfg
        name = self.name()
        age = rng.randint(16, 90)
        incident = date(cfg.year, 1, 1) + timedelta(days=rng.randrange(365))
        kind = rng.choices(("motor_vehicle", "assault", "medical", "other"), (57, 13, 14, 16))[0]
        if kind in FAMILY_PREFIXES:
            prefixes = set(FAMILY_PREFIXES[kind])
        elif rng.random() < 0.7:
            prefixes = {rng.choice(sorted(OBSERVED_PREFIXES))}
        else:
            prefixes = set()
        fields = dict(
            name=name,
            gender=rng.choice(("M", "F")),
            age_years=age if rng.random() < 0.85 else None,
            incident_date=incident if rng.random() < 0.95 else None,
            hospital_candidates=frozenset({rng.choice(cfg.hospital_pool)}) if rng.random() < 0.55 else frozenset(),
            diagnosis_prefixes=frozenset(prefixes),
            source="synthetic",
        )
        public = []
        if rng.random() < 0.8:
            dob = _minus_year(incident, age) - timedelta(days=rng.randrange(365))
            public.append(PublicRecord(name, dob, frozenset({rng.choice(cfg.zip_pool)})))
        return fields, public


def _minus_year(d: date, years: int = 1) -> date:
    y = d.year - years
    return date(y, d.month, min(d.day, days_in_month(y, d.month)))


def generate(config: SynthConfig | None = None) -> Corpus:
    """Build hospital data, externals, public records, populations and the manifest."""
    cfg = config or SynthConfig()
    cfg.validate()
    b = _Builder(cfg)
    rng = b.rng

    markers = list(MARKER_PREFIXES)
    rng.shuffle(markers)
    drop_keys = sorted(cfg.drop_mix)
    drop_weights = [cfg.drop_mix[k] for k in drop_keys]

    records: list[HospitalRecord] = []
    plants = []  # (kind, external fields, public rows, manifest entry, record slots)

    for i in range(cfg.n_planted_unique):
        marker = markers.pop()
        drop = rng.choices(drop_keys, drop_weights)[0]
        rec = b.record(marker, sensitive=i < cfg.n_planted_sensitive, genders=("M", "F"), gender_weights=(1, 1))
        fields, public = b.planted_external(rec, marker, drop)
        slot = len(records)
        records.append(rec)
        plants.append(("unique", fields, public, {
            "expected": "unique", "planted_drop": list(ordered(drop)), "relaxation_level": len(drop),
            "candidate_count": 1, "sensitive": i < cfg.n_planted_sensitive,
        }, [slot]))

    for _ in range(cfg.n_planted_ambiguous):
        marker = markers.pop()
        size = rng.choice((2, 2, 3, 4))
        rec = b.record(marker, sensitive=False, genders=("M", "F"), gender_weights=(1, 1))
        fields, public = b.planted_external(rec, marker)
        slots = []
        for k in range(size):
            clone = rec if k == 0 else dataclasses.replace(
                rec, procedures=(f"{rng.randint(1, 9999):04d}",), charges=Decimal(rng.randint(50_000, 9_000_000)) / 100)
            slots.append(len(records))
            records.append(clone)
        plants.append(("ambiguous", fields, public, {
            "expected": "ambiguous", "planted_drop": [], "relaxation_level": 0,
            "candidate_count": size, "sensitive": False,
        }, slots))

    for _ in range(cfg.n_planted_nomatch):
        unused = markers.pop()
        rec = b.record(genders=("M", "F"), gender_weights=(1, 1))
        fields, public = b.planted_external(rec, unused)
        records.append(rec)
        plants.append(("nomatch", fields, public, {
            "expected": "nomatch", "planted_drop": [], "relaxation_level": 0,
            "candidate_count": 0, "sensitive": False,
        }, []))

    while len(records) < cfg.n_hospital_records:
        records.append(b.record())

    n = len(records)
    ids = [f"H{k + 1:07d}" for k in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    records = [dataclasses.replace(rec, record_id=ids[order[k]]) for k, rec in enumerate(records)]

    for _ in range(cfg.n_externals - len(plants)):
        fields, public = b.random_external()
        plants.append(("unplanted", fields, public, {
            "expected": "unplanted", "planted_drop": [], "relaxation_level": None,
            "candidate_count": None, "sensitive": None,
        }, []))

    rng.shuffle(plants)
    externals, public_rows, manifest = [], [], {}
    for k, (kind, fields, public, entry, slots) in enumerate(plants):
        ext_id = f"N{k + 1:05d}"
        externals.append(ExternalRecord(ext_id=ext_id, **fields))
        public_rows.extend(public)
        entry = dict(entry)
        entry["record_ids"] = sorted(records[s].record_id for s in slots) if kind != "nomatch" else []
        entry["record_id"] = entry["record_ids"][0] if kind == "unique" else None
        manifest[ext_id] = entry

    # Unrelated people in the public-records service.
    for _ in range(max(20, cfg.n_externals // 2)):
        dob = date(cfg.year - rng.randint(18, 90), rng.randint(1, 12), rng.randint(1, 28))
        public_rows.append(PublicRecord(b.name(), dob, frozenset({rng.choice(cfg.zip_pool)})))
    rng.shuffle(public_rows)

    population = {z3: rng.randint(2_000, 90_000) for z3 in sorted({z[:3] for z in cfg.zip_pool})}
    records.sort(key=lambda r: r.record_id)
    return Corpus(records, externals, PublicRecordsTable(public_rows), population, manifest)
