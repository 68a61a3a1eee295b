"""Append-only JSONL event log.

Each line is ``{"seq": n, "at": ts, "kind": k, "payload": {...}}`` with
``seq`` starting at 1 and increasing by exactly one per line.
"""

from __future__ import annotations

import enum
import json
import os
from collections.abc import Iterator
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from ..errors import LogCorruptionError
from ..reports import format_timestamp, parse_timestamp


class EventKind(str, enum.Enum):
    REPORT = "report"
    FEEDBACK = "feedback"
    TRUSTED_LIST_RELOAD = "trusted_list_reload"


@dataclass(frozen=True)
class EventLogEntry:
    seq: int
    at: datetime
    kind: EventKind
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "at": format_timestamp(self.at), "kind": self.kind.value, "payload": self.payload},
            sort_keys=True,
        )


def read_log(path: str | Path) -> Iterator[EventLogEntry]:
    """Yield entries in order, raising LogCorruptionError on a bad sequence."""
    path = Path(path)
    if not path.exists():
        return
    expected = 1
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                seq = int(raw["seq"])
                entry = EventLogEntry(seq, parse_timestamp(raw["at"]), EventKind(raw["kind"]), raw["payload"])
            except (ValueError, KeyError, TypeError) as exc:
                raise LogCorruptionError(expected, f"unreadable line {lineno}: {exc}") from exc
            if seq != expected:
                raise LogCorruptionError(seq, f"expected seq {expected}")
            expected += 1
            yield entry


class EventLog:
    """Appends entries durably. ``path=None`` keeps the log in memory only."""

    def __init__(self, path: str | Path | None = None, next_seq: int = 1):
        self.path = Path(path) if path is not None else None
        self.next_seq = next_seq
        self.entries: list[EventLogEntry] = []

    def append(self, kind: EventKind, payload: dict, at: datetime) -> EventLogEntry:
        entry = EventLogEntry(self.next_seq, at, EventKind(kind), payload)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(entry.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        self.entries.append(entry)
        self.next_seq += 1
        return entry
