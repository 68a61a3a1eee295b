"""The shared core behind the CLI and the HTTP service.

State is a pure fold over the event log: every mutation is first appended
to the log and then applied through the same :meth:`Engine.apply` used by
replay, so a replayed engine is indistinguishable from the live one.
"""

from __future__ import annotations

import json
import logging
import threading
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO

import numpy as np

from ..errors import (
    ConfigError,
    DegenerateEvidenceError,
    DuplicateReportError,
    QuarantineError,
    ReportValidationError,
    UnknownIncidentError,
    UnknownReportError,
)
from ..fusion import CombinationRule, argmax_quintile, combine_all
from ..reports import EvidenceItem, ThreadStore, format_timestamp, parse_report, select_evidence
from ..sources import OutcomeFeedback, ProfileStore, SourceProfile, load_trusted_list
from ..triage import Level, TriageItem, TriagePolicy, acquiring_score, rank
from .config import Config, load_config
from .eventlog import EventKind, EventLog, EventLogEntry, read_log

log = logging.getLogger(__name__)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class IngestSummary:
    accepted: int = 0
    quarantined: int = 0
    rejected: int = 0
    errors: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "quarantined": self.quarantined,
            "rejected": self.rejected,
            "errors": list(self.errors),
        }


@dataclass
class FusionResult:
    incident_id: str
    rule: CombinationRule
    vector: np.ndarray
    quintile: int | None
    weight: float | None
    evidence: list[EvidenceItem]

    @property
    def annihilated(self) -> bool:
        return self.quintile is None

    def as_dict(self) -> dict:
        return {
            "incident_id": self.incident_id,
            "rule": self.rule.value,
            "vector": [float(x) for x in self.vector],
            "quintile": self.quintile,
            "weight": self.weight,
            "annihilated": self.annihilated,
            "status": "evidence annihilated under odds rule" if self.annihilated else "ok",
            "evidence": [e.as_dict() for e in self.evidence],
        }


@dataclass(frozen=True)
class IncidentMeta:
    """Operator-supplied seriousness and action cost for one incident."""

    seriousness: Level = Level.MEDIUM
    action_cost: Level = Level.MEDIUM


def load_incident_meta(path: str | Path | None) -> dict[str, IncidentMeta]:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for incident_id, meta in data.items():
        unknown = set(meta) - {"seriousness", "action_cost"}
        if unknown:
            raise ConfigError(f"incident {incident_id!r}: unknown keys {sorted(unknown)}")
        out[incident_id] = IncidentMeta(
            Level(meta.get("seriousness", "medium")), Level(meta.get("action_cost", "medium"))
        )
    return out


class Engine:
    """Reports, threads and source profiles, plus the operations over them.

    Writes are serialized by a lock; reads work on snapshots taken under it.
    """

    def __init__(
        self,
        config: Config,
        log: EventLog | None = None,
        incidents: Mapping[str, IncidentMeta] | None = None,
        clock: Callable[[], datetime] = utcnow,
    ):
        self.config = config
        self.log = log if log is not None else EventLog(None)
        self.incidents = dict(incidents or {})
        self.clock = clock
        self.store = ThreadStore()
        self.profiles = ProfileStore(config.reliability_thresholds)
        self._lock = threading.RLock()

    # -- construction -------------------------------------------------------

    @classmethod
    def open(cls, config: Config | None = None, clock: Callable[[], datetime] = utcnow) -> "Engine":
        """Replay the configured log and keep appending to it."""
        config = config or load_config()
        log_path = config.paths.log
        engine = cls(config, EventLog(None), load_incident_meta(config.paths.incidents), clock)
        if log_path is not None:
            for entry in read_log(log_path):
                engine.apply(entry)
            engine.log = EventLog(log_path, next_seq=engine.log.next_seq)
        return engine

    @classmethod
    def replay(
        cls,
        log_path: str | Path,
        config: Config | None = None,
        incidents: Mapping[str, IncidentMeta] | None = None,
    ) -> "Engine":
        """Rebuild state from a log without attaching it for writes."""
        config = config or load_config()
        if incidents is None:
            incidents = load_incident_meta(config.paths.incidents)
        engine = cls(config, EventLog(None), incidents)
        for entry in read_log(log_path):
            engine.apply(entry)
        return engine

    # -- the fold -----------------------------------------------------------

    def apply(self, entry: EventLogEntry) -> None:
        """Fold one logged event into state (no logging)."""
        with self._lock:
            if entry.seq != self.log.next_seq:
                raise ValueError(f"event seq {entry.seq} applied out of order")
            self.log.next_seq += 1
            self.log.entries.append(entry)
            self._apply(entry)

    def _apply(self, entry: EventLogEntry) -> None:
        if entry.kind is EventKind.REPORT:
            report = parse_report(entry.payload)
            self.profiles.register_report(report.report_id, report.source_id, entry.at)
            try:
                self.store.assign(report)
            except QuarantineError:
                return
            self.store.retry_quarantine()
        elif entry.kind is EventKind.FEEDBACK:
            self.profiles.record(OutcomeFeedback(entry.payload["report_id"], entry.payload["outcome"], entry.at))
        elif entry.kind is EventKind.TRUSTED_LIST_RELOAD:
            self.profiles.set_trusted(entry.payload["source_ids"], entry.at)

    def _commit(self, kind: EventKind, payload: dict, at: datetime | None = None) -> EventLogEntry:
        entry = self.log.append(kind, payload, at or self.clock())
        self._apply(entry)
        return entry

    # -- writes -------------------------------------------------------------

    def ingest_records(self, lines: Iterable[str | Mapping]) -> IngestSummary:
        """Parse, thread and log a batch; per-record failures are counted."""
        summary = IngestSummary()
        batch: list[str] = []
        with self._lock:
            for n, line in enumerate(lines, start=1):
                if isinstance(line, str):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                    except json.JSONDecodeError as exc:
                        summary.rejected += 1
                        summary.errors.append(f"record {n}: invalid JSON: {exc}")
                        continue
                else:
                    record = line
                try:
                    report = parse_report(record)
                    seen = self.store.reports.get(report.report_id) or self.store.quarantine.get(report.report_id)
                    if seen is not None:
                        if seen != report:
                            raise DuplicateReportError(f"report id {report.report_id!r} reused with different content")
                        batch.append(report.report_id)
                        continue
                except (ReportValidationError, DuplicateReportError) as exc:
                    summary.rejected += 1
                    summary.errors.append(f"record {n}: {exc}")
                    continue
                self._commit(EventKind.REPORT, dict(record))
                batch.append(report.report_id)
            self.store.retry_quarantine()
            for rid in batch:
                if rid in self.store.quarantine:
                    summary.quarantined += 1
                else:
                    summary.accepted += 1
        log.info("ingest: %s", summary.as_dict())
        return summary

    def ingest(self, source: str | Path | IO[str]) -> IngestSummary:
        """Ingest a JSONL file path or an open text stream."""
        if isinstance(source, (str, Path)):
            with open(source, encoding="utf-8") as fh:
                return self.ingest_records(fh)
        return self.ingest_records(source)

    def feedback(self, report_id: str, outcome: str, at: datetime | None = None) -> SourceProfile:
        with self._lock:
            fb = OutcomeFeedback(report_id, outcome, at or self.clock())
            source_id = self.profiles.source_of(report_id)
            if source_id is None:
                raise UnknownReportError(f"feedback for unknown report {report_id!r}")
            self._commit(EventKind.FEEDBACK, {"report_id": report_id, "outcome": fb.outcome.value}, fb.at)
            return self.profiles.profile(source_id)

    def reload_trusted(self, source: str | Path | Iterable[str] | None = None) -> frozenset[str]:
        if source is None:
            source = self.config.paths.trusted_list
            if source is None:
                raise ConfigError("no trusted list path configured")
        ids = load_trusted_list(source) if isinstance(source, (str, Path)) else frozenset(source)
        with self._lock:
            self._commit(EventKind.TRUSTED_LIST_RELOAD, {"source_ids": sorted(ids)})
        return ids

    # -- reads --------------------------------------------------------------

    def _snapshot(self) -> tuple[ThreadStore, dict[str, SourceProfile]]:
        with self._lock:
            return self.store.snapshot(), dict(self.profiles.items())

    def fuse_incident(self, incident_id: str, rule: CombinationRule | str | None = None) -> FusionResult:
        store, profiles = self._snapshot()
        return self._fuse(store, profiles, incident_id, rule)

    def _fuse(self, store, profiles, incident_id, rule) -> FusionResult:
        rule = CombinationRule.parse(rule) if rule is not None else self.config.combination_rule
        thread = store.threads.get(incident_id)
        if thread is None:
            raise UnknownIncidentError(f"unknown incident {incident_id!r}")
        evidence = select_evidence(thread, store.reports, profiles, self.config.spread_policy)
        vector = combine_all([e.vector for e in evidence], rule)
        try:
            quintile, weight = argmax_quintile(vector)
        except DegenerateEvidenceError:
            quintile, weight = None, None
        return FusionResult(incident_id, rule, vector, quintile, weight, evidence)

    def triage(
        self,
        policy: TriagePolicy | str | None = None,
        now: datetime | None = None,
        rule: CombinationRule | str | None = None,
    ) -> list[TriageItem]:
        if policy is None:
            policy = self.config.triage_policy
        if policy is None:
            raise ConfigError("a triage policy is required: pass one or set triage_policy in the config")
        if isinstance(policy, str):
            configured = self.config.triage_policy
            if configured is not None and configured.mode.value == policy.replace("-", "_"):
                policy = configured
            else:
                policy = TriagePolicy(policy, level_values=self.config.level_values)
        now = now or self.clock()
        store, profiles = self._snapshot()
        items = []
        for incident_id in sorted(store.threads):
            fused = self._fuse(store, profiles, incident_id, rule)
            meta = self.incidents.get(incident_id, IncidentMeta())
            items.append(TriageItem(
                incident_id=incident_id,
                seriousness=meta.seriousness,
                action_cost=meta.action_cost,
                fused=fused.vector,
                fused_quintile=fused.quintile,
                acquiring_score=acquiring_score(
                    store.threads[incident_id], store.reports, profiles, now, self.config.scoring_weights
                ),
            ))
        return rank(items, policy)

    def source(self, source_id: str) -> SourceProfile | None:
        with self._lock:
            return self.profiles.get(source_id)

    def sources_csv(self) -> str:
        with self._lock:
            return self.profiles.to_csv()

    def state_summary(self) -> dict:
        with self._lock:
            return {
                "events": self.log.next_seq - 1,
                "reports": len(self.store.reports),
                "incidents": len(self.store.threads),
                "quarantined": len(self.store.quarantine),
                "sources": len(self.profiles),
            }


def profile_dict(p: SourceProfile) -> dict:
    return {
        "source_id": p.source_id,
        "trusted": p.trusted,
        "confirmed": p.confirmed,
        "refuted": p.refuted,
        "unresolved": p.unresolved,
        "letter": p.letter.value,
        "updated_at": format_timestamp(p.updated_at) if p.updated_at else None,
    }
