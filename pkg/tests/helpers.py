"""Shared test helpers, importable from both conftest.py and test modules."""

from datetime import datetime, timedelta, timezone
from pathlib import Path

from threatfuse.estimative import AdmiraltyReliability
from threatfuse.fusion import QuintileAssertion
from threatfuse.reports import Descendant, Initiating, ThreatReport, Vetting

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
T0 = datetime(2024, 3, 1, tzinfo=timezone.utc)

acceptance_lines: list[str] = []


def record_criterion(number: int, name: str, ok: bool, detail: str = "") -> None:
    acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] AC{number} {name}" + (f" ({detail})" if detail else ""))


def make_report(
    rid,
    source,
    *,
    incident=None,
    parent=None,
    quintile=3,
    assertion=None,
    letter="A",
    hours=0.0,
    vetting=Vetting.MACHINE,
    detail=0,
    expires_in=None,
):
    published = T0 + timedelta(hours=hours)
    provenance = Initiating(incident) if parent is None else Descendant(parent)
    return ThreatReport(
        report_id=rid,
        provenance=provenance,
        source_id=source,
        observed_at=published,
        published_at=published,
        assertion=assertion if assertion is not None else QuintileAssertion(quintile),
        expires_at=published + expires_in if expires_in is not None else None,
        asserted_reliability=AdmiraltyReliability(letter) if letter else None,
        vetting=vetting,
        detail_score=detail,
    )
