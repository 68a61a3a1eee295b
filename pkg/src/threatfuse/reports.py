"""Threat reports: data model, JSONL wire format, and incident threading.

Every report is labelled either as the initiating report of an incident or
as a descendant of an earlier report. Threading uses that label alone;
fusion then takes one report per distinct source so that re-shared copies
of the same information (echoes) cannot inflate confidence.
"""

from __future__ import annotations

import enum
import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import (
    DomainError,
    DuplicateReportError,
    QuarantineError,
    ReportValidationError,
    UnknownTermError,
)
from .estimative import (
    AdmiraltyReliability,
    LikelihoodBand,
    TermRow,
    band_for_probability,
    band_for_term,
    check_probability,
)
from .fusion import QuintileAssertion, SpreadPolicy, quintile_for_probability
from .sources import SourceProfile, spread_for_letter

__all__ = [
    "Descendant",
    "EvidenceItem",
    "IncidentThread",
    "Initiating",
    "ProbabilityAssertion",
    "TermAssertion",
    "ThreadStore",
    "ThreatReport",
    "Vetting",
    "format_timestamp",
    "independent_vectors",
    "parse_report",
    "parse_timestamp",
    "select_evidence",
    "serialize_report",
    "thread_assign",
]

# -- timestamps --------------------------------------------------------------

_RFC3339 = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    if not isinstance(text, str):
        raise ValueError(f"expected an RFC 3339 string, got {text!r}")
    m = _RFC3339.match(text.strip())
    if not m:
        raise ValueError(f"not an RFC 3339 timestamp: {text!r}")
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    micro = int(round(float(m.group(7)) * 1_000_000)) if m.group(7) else 0
    offset = m.group(8)
    if offset in ("Z", "z"):
        tz = timezone.utc
    else:
        sign = 1 if offset[0] == "+" else -1
        tz = timezone(sign * timedelta(hours=int(offset[1:3]), minutes=int(offset[4:6])))
    return datetime(year, month, day, hour, minute, second, min(micro, 999_999), tzinfo=tz).astimezone(
        timezone.utc
    )


def format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    fmt = "%Y-%m-%dT%H:%M:%S.%fZ" if ts.microsecond else "%Y-%m-%dT%H:%M:%SZ"
    return ts.strftime(fmt)


# -- data model --------------------------------------------------------------

@dataclass(frozen=True)
class Initiating:
    incident_id: str


@dataclass(frozen=True)
class Descendant:
    parent_report_id: str


@dataclass(frozen=True)
class TermAssertion:
    term: str
    row: TermRow

    def band(self) -> LikelihoodBand:
        return band_for_term(self.term, self.row)

    def quintile(self) -> int:
        return quintile_for_probability(self.band().midpoint)


@dataclass(frozen=True)
class ProbabilityAssertion:
    p: float

    def band(self) -> LikelihoodBand:
        return band_for_probability(self.p)

    def quintile(self) -> int:
        return quintile_for_probability(self.p)


def _quintile_of(assertion) -> int:
    if isinstance(assertion, QuintileAssertion):
        return assertion.quintile
    return assertion.quintile()


class Vetting(str, enum.Enum):
    HUMAN = "human"
    MACHINE = "machine"
    BOTH = "both"
    UNKNOWN = "unknown"

    @property
    def human(self) -> bool:
        return self in (Vetting.HUMAN, Vetting.BOTH)


Assertion = TermAssertion | ProbabilityAssertion | QuintileAssertion


@dataclass(frozen=True)
class ThreatReport:
    report_id: str
    provenance: Initiating | Descendant
    source_id: str
    observed_at: datetime
    published_at: datetime
    assertion: Assertion
    expires_at: datetime | None = None
    asserted_reliability: AdmiraltyReliability | None = None
    vetting: Vetting = Vetting.UNKNOWN
    detail_score: int = 0
    body: str = ""
    # Names of wire fields that were present but not understood.
    ignored_fields: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_initiating(self) -> bool:
        return isinstance(self.provenance, Initiating)

    @property
    def quintile(self) -> int:
        return _quintile_of(self.assertion)


# -- wire format -------------------------------------------------------------

_REQUIRED = ("report_id", "provenance", "source_id", "observed_at", "published_at", "assertion")
_OPTIONAL = ("expires_at", "reliability_letter", "vetting", "detail_score", "body")


def _nonempty_str(record: Mapping, name: str, rid: str | None) -> str:
    value = record.get(name)
    if not isinstance(value, str) or not value:
        raise ReportValidationError(name, "must be a non-empty string", rid)
    return value


def _parse_provenance(value, rid: str) -> Initiating | Descendant:
    if not isinstance(value, Mapping):
        raise ReportValidationError("provenance", "must be an object", rid)
    kind = value.get("kind")
    if kind == "initiating":
        return Initiating(_nonempty_str(value, "incident_id", rid))
    if kind == "descendant":
        return Descendant(_nonempty_str(value, "parent_report_id", rid))
    raise ReportValidationError("provenance", f"kind must be 'initiating' or 'descendant', got {kind!r}", rid)


def _parse_assertion(value, rid: str) -> Assertion:
    if not isinstance(value, Mapping):
        raise ReportValidationError("assertion", "must be an object", rid)
    kind = value.get("kind")
    if kind == "term":
        try:
            row = TermRow(value.get("row"))
        except ValueError:
            raise ReportValidationError(
                "assertion", f"row must be 'likelihood' or 'probability', got {value.get('row')!r}", rid
            ) from None
        term = value.get("value")
        if not isinstance(term, str):
            raise ReportValidationError("assertion", "term value must be a string", rid)
        try:
            band_for_term(term, row)
        except UnknownTermError as exc:
            raise ReportValidationError("assertion", str(exc), rid) from exc
        return TermAssertion(term, row)
    if kind == "probability":
        p = value.get("value")
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ReportValidationError("assertion", "probability value must be a number", rid)
        try:
            return ProbabilityAssertion(check_probability(p))
        except DomainError as exc:
            raise ReportValidationError("assertion", str(exc), rid) from exc
    if kind == "quintile":
        k = value.get("value")
        if isinstance(k, bool) or not isinstance(k, int):
            raise ReportValidationError("assertion", "quintile value must be an integer 1..5", rid)
        try:
            return QuintileAssertion(k)
        except DomainError as exc:
            raise ReportValidationError("assertion", str(exc), rid) from exc
    raise ReportValidationError(
        "assertion", f"kind must be 'term', 'probability' or 'quintile', got {kind!r}", rid
    )


def _timestamp(record: Mapping, name: str, rid: str) -> datetime:
    try:
        return parse_timestamp(record[name])
    except ValueError as exc:
        raise ReportValidationError(name, str(exc), rid) from exc


def parse_report(record: Mapping | str) -> ThreatReport:
    """Validate one wire record (a dict, or a single JSON line).

    Unknown top-level fields are ignored and their names kept on
    ``ThreatReport.ignored_fields``.
    """
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise ReportValidationError("<record>", f"invalid JSON: {exc}") from exc
    if not isinstance(record, Mapping):
        raise ReportValidationError("<record>", "must be a JSON object")

    rid = record.get("report_id") if isinstance(record.get("report_id"), str) else None
    for name in _REQUIRED:
        if name not in record:
            raise ReportValidationError(name, "missing required field", rid)
    rid = _nonempty_str(record, "report_id", rid)

    provenance = _parse_provenance(record["provenance"], rid)
    source_id = _nonempty_str(record, "source_id", rid)
    observed_at = _timestamp(record, "observed_at", rid)
    published_at = _timestamp(record, "published_at", rid)
    if published_at < observed_at:
        raise ReportValidationError("published_at", "must not precede observed_at", rid)
    expires_at = None
    if record.get("expires_at") is not None:
        expires_at = _timestamp(record, "expires_at", rid)
        if expires_at <= published_at:
            raise ReportValidationError("expires_at", "must be after published_at", rid)
    assertion = _parse_assertion(record["assertion"], rid)

    letter = None
    if record.get("reliability_letter") is not None:
        try:
            letter = AdmiraltyReliability(record["reliability_letter"])
        except ValueError:
            raise ReportValidationError("reliability_letter", "must be one of A-F", rid) from None

    try:
        vetting = Vetting(record.get("vetting") or "unknown")
    except ValueError:
        raise ReportValidationError("vetting", "must be human, machine, both or unknown", rid) from None

    detail = record.get("detail_score", 0)
    if isinstance(detail, bool) or not isinstance(detail, int) or not 0 <= detail <= 3:
        raise ReportValidationError("detail_score", f"must be an integer 0..3, got {detail!r}", rid)

    body = record.get("body", "")
    if not isinstance(body, str):
        body = json.dumps(body, sort_keys=True)

    ignored = tuple(sorted(set(record) - set(_REQUIRED) - set(_OPTIONAL)))
    return ThreatReport(
        report_id=rid,
        provenance=provenance,
        source_id=source_id,
        observed_at=observed_at,
        published_at=published_at,
        assertion=assertion,
        expires_at=expires_at,
        asserted_reliability=letter,
        vetting=vetting,
        detail_score=detail,
        body=body,
        ignored_fields=ignored,
    )


def serialize_report(report: ThreatReport) -> dict:
    """Wire-format dict for ``report``; ``parse_report`` inverts it."""
    if isinstance(report.provenance, Initiating):
        provenance = {"kind": "initiating", "incident_id": report.provenance.incident_id}
    else:
        provenance = {"kind": "descendant", "parent_report_id": report.provenance.parent_report_id}
    a = report.assertion
    if isinstance(a, TermAssertion):
        assertion = {"kind": "term", "value": a.term, "row": a.row.value}
    elif isinstance(a, ProbabilityAssertion):
        assertion = {"kind": "probability", "value": a.p}
    else:
        assertion = {"kind": "quintile", "value": a.quintile}
    out = {
        "report_id": report.report_id,
        "provenance": provenance,
        "source_id": report.source_id,
        "observed_at": format_timestamp(report.observed_at),
        "published_at": format_timestamp(report.published_at),
        "assertion": assertion,
        "vetting": report.vetting.value,
        "detail_score": report.detail_score,
        "body": report.body,
    }
    if report.expires_at is not None:
        out["expires_at"] = format_timestamp(report.expires_at)
    if report.asserted_reliability is not None:
        out["reliability_letter"] = report.asserted_reliability.value
    return out


# -- threading ---------------------------------------------------------------

@dataclass
class IncidentThread:
    """Reports about one incident. Member lists are kept sorted by report id."""

    incident_id: str
    initiating: list[str] = field(default_factory=list)
    descendants: list[str] = field(default_factory=list)
    distinct_sources: set[str] = field(default_factory=set)

    @property
    def report_ids(self) -> list[str]:
        return sorted(self.initiating + self.descendants)

    def __len__(self) -> int:
        return len(self.initiating) + len(self.descendants)


def _insort(items: list[str], value: str) -> None:
    items.append(value)
    items.sort()


class ThreadStore:
    """Reports, the threads they belong to, and quarantined descendants.

    One logical writer mutates the store; readers take :meth:`snapshot`.
    """

    def __init__(self):
        self.reports: dict[str, ThreatReport] = {}
        self.threads: dict[str, IncidentThread] = {}
        self.incident_of: dict[str, str] = {}
        self.quarantine: dict[str, ThreatReport] = {}

    def assign(self, report: ThreatReport) -> IncidentThread:
        rid = report.report_id
        seen = self.reports.get(rid) or self.quarantine.get(rid)
        if seen is not None and seen != report:
            raise DuplicateReportError(f"report id {rid!r} reused with different content")
        if rid in self.reports:
            return self.threads[self.incident_of[rid]]

        if isinstance(report.provenance, Initiating):
            incident_id = report.provenance.incident_id
            thread = self.threads.setdefault(incident_id, IncidentThread(incident_id))
            _insort(thread.initiating, report.report_id)
        else:
            parent = report.provenance.parent_report_id
            if parent not in self.incident_of:
                self.quarantine[report.report_id] = report
                raise QuarantineError(report.report_id, parent)
            incident_id = self.incident_of[parent]
            thread = self.threads[incident_id]
            _insort(thread.descendants, report.report_id)
        thread.distinct_sources.add(report.source_id)
        self.reports[report.report_id] = report
        self.incident_of[report.report_id] = incident_id
        self.quarantine.pop(report.report_id, None)
        return thread

    def retry_quarantine(self) -> list[str]:
        """Thread every held descendant whose parent has since arrived."""
        released = []
        progress = True
        while progress:
            progress = False
            for rid in sorted(self.quarantine):
                report = self.quarantine[rid]
                if report.provenance.parent_report_id in self.incident_of:
                    self.assign(report)
                    released.append(rid)
                    progress = True
        return released

    def snapshot(self) -> "ThreadStore":
        copy = ThreadStore()
        copy.reports = dict(self.reports)
        copy.incident_of = dict(self.incident_of)
        copy.quarantine = dict(self.quarantine)
        copy.threads = {
            k: IncidentThread(t.incident_id, list(t.initiating), list(t.descendants), set(t.distinct_sources))
            for k, t in self.threads.items()
        }
        return copy


def thread_assign(report: ThreatReport, store: ThreadStore) -> IncidentThread:
    """Place ``report`` in its incident thread.

    Raises QuarantineError for a descendant whose parent is unknown; the
    report stays in ``store.quarantine`` until :meth:`ThreadStore.retry_quarantine`
    finds its parent.
    """
    return store.assign(report)


# -- independent evidence ----------------------------------------------------

@dataclass(frozen=True)
class EvidenceItem:
    """The one report that speaks for a source within a thread."""

    report_id: str
    source_id: str
    quintile: int
    letter: AdmiraltyReliability
    vector: np.ndarray = field(compare=False)
    corroborating: bool = False

    def as_dict(self) -> dict:
        return {
            "report_id": self.report_id,
            "source_id": self.source_id,
            "quintile": self.quintile,
            "letter": self.letter.value,
            "vector": [float(x) for x in self.vector],
            "corroborating": self.corroborating,
        }


def source_letter(
    report: ThreatReport, profiles: Mapping[str, SourceProfile]
) -> AdmiraltyReliability:
    """Recipient's letter for the report's source.

    A letter earned from feedback history wins; with no history the
    report's self-declared letter is used, else F.
    """
    profile = profiles.get(report.source_id)
    if profile is not None and profile.letter is not AdmiraltyReliability.F:
        return profile.letter
    return report.asserted_reliability or AdmiraltyReliability.F


def selected_reports(thread: IncidentThread, reports: Mapping[str, ThreatReport]) -> list[ThreatReport]:
    """Earliest-published report of each distinct source, ordered by source id."""
    if len(thread) == 0:
        raise DomainError(f"incident {thread.incident_id!r} has no reports")
    earliest: dict[str, ThreatReport] = {}
    for rid in thread.report_ids:
        r = reports[rid]
        best = earliest.get(r.source_id)
        if best is None or (r.published_at, r.report_id) < (best.published_at, best.report_id):
            earliest[r.source_id] = r
    return [earliest[s] for s in sorted(earliest)]


def select_evidence(
    thread: IncidentThread,
    reports: Mapping[str, ThreatReport],
    profiles: Mapping[str, SourceProfile],
    policy: SpreadPolicy | str = SpreadPolicy.NEAREST,
) -> list[EvidenceItem]:
    """One spread vector per distinct source, with the report behind it.

    Descendants from a source not already heard on the incident are kept
    and flagged ``corroborating``.
    """
    items = []
    for r in selected_reports(thread, reports):
        letter = source_letter(r, profiles)
        items.append(EvidenceItem(
            report_id=r.report_id,
            source_id=r.source_id,
            quintile=r.quintile,
            letter=letter,
            vector=spread_for_letter(r.quintile, letter, policy),
            corroborating=not r.is_initiating,
        ))
    return items


def independent_vectors(
    thread: IncidentThread,
    reports: Mapping[str, ThreatReport],
    profiles: Mapping[str, SourceProfile],
    policy: SpreadPolicy | str = SpreadPolicy.NEAREST,
) -> list[np.ndarray]:
    return [e.vector for e in select_evidence(thread, reports, profiles, policy)]
