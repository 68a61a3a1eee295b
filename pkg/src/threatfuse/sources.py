"""Source profiles, outcome feedback and reliability letters.

A source's Admiralty letter is derived from the outcomes recipients report
back about its earlier reports. Below a minimum number of resolved outcomes
the letter is F: no basis to judge, which is not the same as untrusted.
"""

from __future__ import annotations

import csv
import enum
import io
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, UnknownReportError
from .estimative import AdmiraltyReliability
from .fusion import N_QUINTILES, QuintileAssertion, SpreadPolicy, spread

__all__ = [
    "CENTER_MASS",
    "DEFAULT_THRESHOLDS",
    "Outcome",
    "OutcomeFeedback",
    "ProfileStore",
    "ReliabilityThresholds",
    "SourceProfile",
    "center_mass",
    "letter_from_history",
    "load_trusted_list",
    "record_feedback",
    "spread_for_letter",
]

L = AdmiraltyReliability


@dataclass(frozen=True)
class ReliabilityThresholds:
    """Minimum accuracy for letters A-D, and the evidence floor for any letter."""

    a: float = 0.95
    b: float = 0.80
    c: float = 0.60
    d: float = 0.40
    min_outcomes: int = 5

    def __post_init__(self):
        cuts = (self.a, self.b, self.c, self.d)
        if not all(0.0 <= x <= 1.0 for x in cuts) or list(cuts) != sorted(cuts, reverse=True):
            raise ConfigError(f"reliability thresholds must be descending in [0, 1]: {cuts}")
        if self.min_outcomes < 1:
            raise ConfigError("min_outcomes must be at least 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReliabilityThresholds":
        keys = {"A": "a", "B": "b", "C": "c", "D": "d", "min_outcomes": "min_outcomes"}
        unknown = set(data) - set(keys)
        if unknown:
            raise ConfigError(f"unknown reliability threshold keys: {sorted(unknown)}")
        return cls(**{keys[k]: v for k, v in data.items()})


DEFAULT_THRESHOLDS = ReliabilityThresholds()


def letter_from_history(
    confirmed: int,
    refuted: int,
    thresholds: ReliabilityThresholds = DEFAULT_THRESHOLDS,
) -> AdmiraltyReliability:
    """Reliability letter from a source's confirmed/refuted record.

    >>> letter_from_history(9, 1).value
    'B'
    >>> letter_from_history(0, 0).value
    'F'
    """
    if confirmed < 0 or refuted < 0:
        raise DomainError("outcome counts must be non-negative")
    n = confirmed + refuted
    if n < thresholds.min_outcomes:
        return L.F
    accuracy = confirmed / n
    for cut, letter in ((thresholds.a, L.A), (thresholds.b, L.B), (thresholds.c, L.C), (thresholds.d, L.D)):
        if accuracy >= cut:
            return letter
    return L.E


CENTER_MASS = {L.A: 0.80, L.B: 0.70, L.C: 0.60, L.D: 0.50, L.E: 0.40, L.F: 0.20}


def center_mass(letter: AdmiraltyReliability | str) -> float:
    """Mass kept on the asserted quintile for a source with this letter."""
    return CENTER_MASS[AdmiraltyReliability(letter)]


def spread_for_letter(
    quintile: QuintileAssertion | int,
    letter: AdmiraltyReliability | str,
    policy: SpreadPolicy | str = SpreadPolicy.NEAREST,
) -> np.ndarray:
    """Spread an assertion by source reliability; F yields the uniform vector."""
    letter = AdmiraltyReliability(letter)
    if letter is L.F:
        if not isinstance(quintile, QuintileAssertion):
            QuintileAssertion(quintile)
        return np.full(N_QUINTILES, 1.0 / N_QUINTILES)
    return spread(quintile, CENTER_MASS[letter], policy)


class Outcome(str, enum.Enum):
    CONFIRMED = "confirmed"
    REFUTED = "refuted"


@dataclass(frozen=True)
class OutcomeFeedback:
    report_id: str
    outcome: Outcome
    at: datetime
    source_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "outcome", Outcome(self.outcome))


@dataclass(frozen=True)
class SourceProfile:
    source_id: str
    trusted: bool = False
    confirmed: int = 0
    refuted: int = 0
    unresolved: int = 0
    letter: AdmiraltyReliability = L.F
    updated_at: datetime | None = None


class ProfileStore(Mapping[str, SourceProfile]):
    """Profiles for every source seen, keyed by source id.

    Each report accepts one outcome; a later outcome for the same report
    replaces the earlier one. Single writer: callers serialize mutations.
    """

    def __init__(self, thresholds: ReliabilityThresholds = DEFAULT_THRESHOLDS):
        self.thresholds = thresholds
        self._profiles: dict[str, SourceProfile] = {}
        self._report_source: dict[str, str] = {}
        self._by_source: dict[str, list[str]] = {}
        self._outcomes: dict[str, Outcome] = {}
        self._trusted: frozenset[str] = frozenset()

    def __getitem__(self, source_id: str) -> SourceProfile:
        return self._profiles[source_id]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._profiles))

    def __len__(self) -> int:
        return len(self._profiles)

    def profile(self, source_id: str) -> SourceProfile:
        """The stored profile, or a blank one for a source never seen."""
        return self._profiles.get(
            source_id, SourceProfile(source_id, trusted=source_id in self._trusted)
        )

    @property
    def trusted(self) -> frozenset[str]:
        return self._trusted

    def source_of(self, report_id: str) -> str | None:
        return self._report_source.get(report_id)

    def register_report(self, report_id: str, source_id: str, at: datetime | None = None) -> None:
        if report_id in self._report_source:
            return
        self._report_source[report_id] = source_id
        self._by_source.setdefault(source_id, []).append(report_id)
        self._recount(source_id, at)

    def record(self, fb: OutcomeFeedback) -> SourceProfile:
        source_id = self._report_source.get(fb.report_id)
        if source_id is None:
            raise UnknownReportError(f"feedback for unknown report {fb.report_id!r}")
        if fb.source_id is not None and fb.source_id != source_id:
            raise UnknownReportError(
                f"report {fb.report_id!r} came from {source_id!r}, not {fb.source_id!r}"
            )
        self._outcomes[fb.report_id] = fb.outcome
        return self._recount(source_id, fb.at)

    def set_trusted(self, source_ids: Iterable[str], at: datetime | None = None) -> None:
        self._trusted = frozenset(source_ids)
        for sid in set(self._profiles) | self._trusted:
            self._recount(sid, at)

    def _recount(self, source_id: str, at: datetime | None) -> SourceProfile:
        reports = self._by_source.get(source_id, [])
        outcomes = [self._outcomes[r] for r in reports if r in self._outcomes]
        confirmed = outcomes.count(Outcome.CONFIRMED)
        refuted = outcomes.count(Outcome.REFUTED)
        profile = replace(
            self.profile(source_id),
            trusted=source_id in self._trusted,
            confirmed=confirmed,
            refuted=refuted,
            unresolved=len(reports) - len(outcomes),
            letter=letter_from_history(confirmed, refuted, self.thresholds),
            updated_at=at if at is not None else self.profile(source_id).updated_at,
        )
        self._profiles[source_id] = profile
        return profile

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source_id", "trusted", "confirmed", "refuted", "letter"])
        for sid in self:
            p = self._profiles[sid]
            writer.writerow([sid, str(p.trusted).lower(), p.confirmed, p.refuted, p.letter.value])
        return buf.getvalue()


def record_feedback(fb: OutcomeFeedback, profiles: ProfileStore) -> SourceProfile:
    """Apply one outcome to the store and return the updated profile."""
    return profiles.record(fb)


def load_trusted_list(path: str | Path) -> frozenset[str]:
    """Read a trusted-source list: one id per line, ``#`` starts a comment."""
    ids = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            ids.add(line)
    return frozenset(ids)
