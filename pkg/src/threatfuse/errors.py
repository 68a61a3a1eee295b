"""Exception hierarchy shared across the package."""


class ThreatFuseError(Exception):
    """Base class for all package errors."""


class DomainError(ThreatFuseError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UnknownTermError(ThreatFuseError, LookupError):
    """An estimative term is not present in the requested row."""

    def __init__(self, term: str, row: str, message: str | None = None):
        self.term = term
        self.row = row
        super().__init__(message or f"unknown {row} term {term!r}")


class CrossRowError(UnknownTermError):
    """The term exists, but in the other row of the scale."""

    def __init__(self, term: str, row: str, other_row: str):
        self.other_row = other_row
        super().__init__(
            term, row,
            f"{term!r} is a {other_row} term, not a {row} term; do not mix rows",
        )


class DegenerateEvidenceError(ThreatFuseError, ValueError):
    """A fused vector has no mass anywhere, so no readout exists."""


class ReportValidationError(ThreatFuseError, ValueError):
    """A wire record failed validation.

    ``field`` names the offending field and ``report_id`` is the record's id
    when it could be read.
    """

    def __init__(self, field: str, message: str, report_id: str | None = None):
        self.field = field
        self.report_id = report_id
        where = f"report {report_id!r}" if report_id else "report"
        super().__init__(f"{where}: field {field!r}: {message}")


class DuplicateReportError(ThreatFuseError, ValueError):
    """A report id was ingested twice with different content."""


class QuarantineError(ThreatFuseError, LookupError):
    """A descendant report names a parent that has not been seen yet.

    The report is held by the store and retried on later ingests.
    """

    def __init__(self, report_id: str, parent_report_id: str):
        self.report_id = report_id
        self.parent_report_id = parent_report_id
        super().__init__(
            f"report {report_id!r} quarantined: parent {parent_report_id!r} unknown"
        )


class UnknownReportError(ThreatFuseError, LookupError):
    """Feedback referenced a report that was never ingested."""


class UnknownIncidentError(ThreatFuseError, LookupError):
    pass


class ConfigError(ThreatFuseError, ValueError):
    pass


class LogCorruptionError(ThreatFuseError):
    """The event log has a gap or regression in its sequence numbers."""

    def __init__(self, seq: int, message: str):
        self.seq = seq
        super().__init__(f"event log corrupt at seq {seq}: {message}")
