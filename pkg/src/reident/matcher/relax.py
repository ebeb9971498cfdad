"""Exact-unique matching with systematic suppression of external fields."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Protocol, Sequence

from ..model.records import ExternalRecord, HospitalRecord
from .predicates import (
    CANONICAL_FIELDS,
    DEFAULT_DROPPABLE,
    LinearScan,
    field_set,
    ordered,
    present_fields,
)

MAX_CANDIDATES = 50


class Engine(Protocol):
    slack_days: int

    def match(self, ext: ExternalRecord, use: Iterable[str]) -> list[str]: ...


class Classification(str, enum.Enum):
    UNIQUE = "unique"
    AMBIGUOUS = "ambiguous"
    NOMATCH = "nomatch"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class MatchOutcome:
    classification: Classification
    relaxation_level: int = 0
    dropped: frozenset[str] = frozenset()
    fields_used: frozenset[str] = frozenset()
    candidate_ids: tuple[str, ...] = ()
    candidate_count: int = 0
    # Every (dropped set, record id) pair that isolated a single record at
    # the accepted level; more than one distinct id means Conflict.
    singletons: tuple[tuple[frozenset[str], str], ...] = field(default=(), compare=False)

    @property
    def record_id(self) -> str | None:
        if self.classification is Classification.UNIQUE:
            return self.candidate_ids[0]
        return None


def _outcome(cls, level, dropped, used, ids, singletons=()):
    ids = list(ids)
    return MatchOutcome(cls, level, frozenset(dropped), frozenset(used),
                        tuple(ids[:MAX_CANDIDATES]), len(ids), tuple(singletons))


def match_with_relaxation(ext: ExternalRecord, dataset: Engine | Sequence[HospitalRecord],
                          droppable: Iterable[str] = DEFAULT_DROPPABLE, max_drop: int = 2,
                          use: Iterable[str] = CANONICAL_FIELDS) -> MatchOutcome:
    """Classify ``ext`` against the dataset, suppressing up to ``max_drop`` fields.

    Level 0 compares every reported field. Only if that finds nothing are
    configurations with one (then two) droppable fields removed tried, in
    canonical field order. At each level:

    * all single-record configurations agree on one record -> Unique
    * they name different records -> Conflict
    * none is a singleton but some configuration returns several -> Ambiguous
      (ambiguity is never relaxed away)
    * every configuration is empty -> next level, NoMatch after the last
    """
    if not 0 <= max_drop <= 2:
        raise ValueError(f"max_drop must be 0, 1 or 2, got {max_drop}")
    engine = dataset if hasattr(dataset, "match") else LinearScan(dataset)
    use = field_set(use)
    droppable = ordered(field_set(droppable) & use)
    present = present_fields(ext)
    base_used = use & present
    if not base_used:
        return _outcome(Classification.NOMATCH, 0, (), (), ())

    ids = engine.match(ext, use)
    if len(ids) == 1:
        return _outcome(Classification.UNIQUE, 0, (), base_used, ids)
    if len(ids) > 1:
        return _outcome(Classification.AMBIGUOUS, 0, (), base_used, ids)

    for level in range(1, max_drop + 1):
        singles = []
        ambiguous = None
        for drop in combinations(droppable, level):
            used = base_used - set(drop)
            # Dropping an unreported field repeats an emptier configuration.
            if not used or not set(drop) <= present:
                continue
            ids = engine.match(ext, use - set(drop))
            if len(ids) == 1:
                singles.append((frozenset(drop), ids[0]))
            elif len(ids) > 1 and (ambiguous is None or len(ids) < len(ambiguous[1])):
                ambiguous = (drop, ids)
        if singles:
            drop, rid = singles[0]
            distinct = sorted({r for _, r in singles})
            cls = Classification.UNIQUE if len(distinct) == 1 else Classification.CONFLICT
            return _outcome(cls, level, drop, base_used - drop, distinct, singles)
        if ambiguous is not None:
            drop, ids = ambiguous
            return _outcome(Classification.AMBIGUOUS, level, drop, base_used - set(drop), ids)
    return _outcome(Classification.NOMATCH, 0, (), base_used, ())
