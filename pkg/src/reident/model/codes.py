"""Diagnosis codes, hospital codes and the lookup tables that produce them."""

from __future__ import annotations

import re
from collections import defaultdict
from typing import Iterable, Mapping

ICD9_RE = re.compile(r"^[0-9EV][0-9]{2,4}$")
ICD9_PREFIX_RE = re.compile(r"^[0-9EV][0-9]{2,}$")
HOSPITAL_CODE_RE = re.compile(r"^[0-9]+[A-Za-z]?$")

# Prefixes recorded against news stories during the Washington State study.
OBSERVED_PREFIXES = frozenset(
    "437 444 508 518 562 569 800 801 802 803 804 805 808 818 824 827 829 861 864 873 884 "
    "900 910 920 923 942 943 944 945 946 947 959 V58 E81 E82 E88 E89 E92 E95 E96 E97 E98".split()
)

DEFAULT_INCIDENT_PREFIXES: dict[str, frozenset[str]] = {
    "motor_vehicle": frozenset({"E81", "E82"}),
    "assault": frozenset({"E96"}),
}


def normalize_icd9(text: str, prefix: bool = False) -> str:
    """Trim and upper-case an ICD9 code, raising ValueError if malformed.

    Full codes are 3-5 characters; with ``prefix=True`` any length from 3 up
    is accepted so that callers can apply their own length rule.
    """
    code = text.strip().upper()
    pattern = ICD9_PREFIX_RE if prefix else ICD9_RE
    if not pattern.match(code):
        raise ValueError(f"malformed ICD9 code {text!r}")
    return code


def icd9_prefix_match(code: str, prefix: str) -> bool:
    """True if ``prefix`` is the leftmost part of ``code`` (case-insensitive)."""
    return code.upper().startswith(prefix.upper())


def is_hospital_code(text: str) -> bool:
    return HOSPITAL_CODE_RE.match(text) is not None


def normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def incident_to_prefixes(incident_type: str,
                         mapping: Mapping[str, Iterable[str]] | None = None) -> frozenset[str]:
    if mapping is None:
        mapping = DEFAULT_INCIDENT_PREFIXES
    return frozenset(mapping.get(incident_type.strip().lower(), ()))


class CodeDictionary:
    """Code -> description table with a reverse index on normalized descriptions."""

    def __init__(self, entries: Mapping[str, str]):
        self.entries = dict(entries)
        reverse = defaultdict(set)
        for code, desc in self.entries.items():
            reverse[normalize_text(desc)].add(code)
        self.reverse = {k: frozenset(v) for k, v in reverse.items()}

    def __len__(self):
        return len(self.entries)

    def lookup(self, description: str) -> frozenset[str]:
        return self.reverse.get(normalize_text(description), frozenset())


def resolve_hospital(name: str, dictionary: CodeDictionary,
                     groups: Mapping[str, Iterable[str]] | None = None) -> frozenset[str]:
    """Hospital codes a free-text hospital name may refer to.

    An exact (normalized) dictionary hit wins; otherwise a regional alias
    such as "Tri-Cities hospital" expands to its whole group. Unknown names
    give the empty set.
    """
    hit = dictionary.lookup(name)
    if hit:
        return hit
    if groups:
        key = normalize_text(name)
        for alias, codes in groups.items():
            if normalize_text(alias) == key:
                return frozenset(codes)
    return frozenset()
