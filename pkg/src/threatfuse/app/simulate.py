"""Echo-chamber simulation.

``N`` independent sources each report Q3 at letter A about one incident;
``K`` further reports re-share the first source's report. Fusing with
provenance labels keeps one vector per source, while ignoring them treats
every copy as fresh evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from ..errors import DegenerateEvidenceError, DomainError
from ..estimative import AdmiraltyReliability
from ..fusion import CombinationRule, QuintileAssertion, argmax_quintile, combine_all
from ..reports import Descendant, Initiating, ThreadStore, ThreatReport, independent_vectors
from ..sources import spread_for_letter

_T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def echo_reports(n_sources: int, duplicates: int, quintile: int = 3) -> list[ThreatReport]:
    if n_sources < 1 or duplicates < 0:
        raise DomainError("need at least one source and a non-negative duplicate count")
    reports = []
    for i in range(n_sources):
        provenance = Initiating("SIM") if i == 0 else Descendant("sim-r1")
        t = _T0 + timedelta(minutes=i)
        reports.append(ThreatReport(
            f"sim-r{i + 1}", provenance, f"S{i + 1}", t, t, QuintileAssertion(quintile),
            asserted_reliability=AdmiraltyReliability.A,
        ))
    for k in range(duplicates):
        t = _T0 + timedelta(hours=1, minutes=k)
        reports.append(ThreatReport(
            f"sim-echo{k + 1}", Descendant("sim-r1"), "S1", t, t, QuintileAssertion(quintile),
            asserted_reliability=AdmiraltyReliability.A,
        ))
    return reports


@dataclass
class EchoResult:
    rule: CombinationRule
    n_sources: int
    duplicates: int
    with_provenance: np.ndarray
    without_provenance: np.ndarray

    @staticmethod
    def _readout(v: np.ndarray) -> str:
        try:
            q, w = argmax_quintile(v)
        except DegenerateEvidenceError:
            return "annihilated"
        return f"Q{q} share {w:.3f}"

    def render(self) -> str:
        def fmt(v):
            return " ".join(f"{x:.4f}" for x in v)

        return (
            f"rule={self.rule.value} sources={self.n_sources} duplicates={self.duplicates}\n"
            f"with provenance    ({self.n_sources} vectors): {fmt(self.with_provenance)}"
            f"  -> {self._readout(self.with_provenance)}\n"
            f"without provenance ({self.n_sources + self.duplicates} vectors): {fmt(self.without_provenance)}"
            f"  -> {self._readout(self.without_provenance)}\n"
        )


def simulate_echo(n_sources: int, duplicates: int, rule: CombinationRule | str) -> EchoResult:
    rule = CombinationRule.parse(rule)
    reports = echo_reports(n_sources, duplicates)
    store = ThreadStore()
    for r in reports:
        store.assign(r)
    thread = store.threads["SIM"]
    labelled = independent_vectors(thread, store.reports, {})
    naive = [spread_for_letter(r.quintile, r.asserted_reliability) for r in reports]
    return EchoResult(rule, n_sources, duplicates, combine_all(labelled, rule), combine_all(naive, rule))
