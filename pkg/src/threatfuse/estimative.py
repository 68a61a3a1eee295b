"""Estimative-language scales and Admiralty codes.

Converts between numeric probabilities and the shared seven-band vocabulary
used by ODNI, USCG and FBI analysts, and between probabilities or content
judgements and the Admiralty information-content codes.

Bands are half-open ``[lo, hi)`` so that a shared boundary belongs to the
upper band; band 7 is closed at 0.99. Probabilities below 0.01 fold into
band 1 and those above 0.99 into band 7.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import re
from dataclasses import dataclass

from .errors import CrossRowError, DomainError, UnknownTermError

__all__ = [
    "AdmiraltyContent",
    "AdmiraltyReliability",
    "BANDS",
    "ConfidenceLevel",
    "Consistency",
    "LikelihoodBand",
    "LintWarning",
    "Logicality",
    "TermRow",
    "band_for_probability",
    "band_for_term",
    "check_probability",
    "classify_content",
    "content_code_for_probability",
    "lint_assertion",
    "range_for_term",
    "scale_csv",
]


class TermRow(str, enum.Enum):
    LIKELIHOOD = "likelihood"
    PROBABILITY = "probability"

    @property
    def other(self) -> "TermRow":
        return TermRow.PROBABILITY if self is TermRow.LIKELIHOOD else TermRow.LIKELIHOOD


@dataclass(frozen=True)
class LikelihoodBand:
    index: int
    likelihood_term: str
    probability_term: str
    lo: float
    hi: float

    def term(self, row: TermRow | str) -> str:
        return self.likelihood_term if TermRow(row) is TermRow.LIKELIHOOD else self.probability_term

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    def contains(self, p: float) -> bool:
        if self.index == len(BANDS):
            return self.lo <= p <= self.hi
        return self.lo <= p < self.hi


BANDS: tuple[LikelihoodBand, ...] = (
    LikelihoodBand(1, "Almost No Chance", "Remote", 0.01, 0.05),
    LikelihoodBand(2, "Very Unlikely", "Highly Improbable", 0.05, 0.20),
    LikelihoodBand(3, "Unlikely", "Improbable (Improbably)", 0.20, 0.45),
    LikelihoodBand(4, "Roughly Even Chance", "Roughly Even Odds", 0.45, 0.55),
    LikelihoodBand(5, "Likely", "Probable (Probably)", 0.55, 0.80),
    LikelihoodBand(6, "Very Likely", "Highly Probable", 0.80, 0.95),
    LikelihoodBand(7, "Almost Certain(ly)", "Nearly Certain", 0.95, 0.99),
)


def check_probability(p: float, name: str = "p") -> float:
    """Return ``p`` as a float, raising DomainError unless it is finite and in [0, 1]."""
    try:
        value = float(p)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a number, got {p!r}") from exc
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must be a finite probability in [0, 1], got {p!r}")
    return value


def band_for_probability(p: float) -> LikelihoodBand:
    """Return the band owning probability ``p``.

    >>> band_for_probability(0.5).likelihood_term
    'Roughly Even Chance'
    >>> band_for_probability(0.20).index
    3
    """
    p = check_probability(p)
    for band in reversed(BANDS):
        if p >= band.lo:
            return band
    return BANDS[0]


# -- term lookup -------------------------------------------------------------

_PAREN_WORD = re.compile(r"^(.*?)(\w+)\((\w+)\)(.*)$")  # "certain(ly)"
_PAREN_ALT = re.compile(r"^(.*?)\s*\(([^)]*)\)\s*$")  # "Probable (Probably)"


def _normalize(term: str) -> str:
    """Lower-case, collapse whitespace and drop any parenthesized variant."""
    text = re.sub(r"\([^)]*\)", "", term)
    return " ".join(text.lower().split())


def _variants(term: str) -> set[str]:
    """All spellings a table term answers to."""
    out = {_normalize(term)}
    m = _PAREN_WORD.match(term)
    if m:
        out.add(_normalize(f"{m.group(1)}{m.group(2)}{m.group(3)}{m.group(4)}"))
    m = _PAREN_ALT.match(term)
    if m and not _PAREN_WORD.match(term):
        out.add(_normalize(m.group(2)))
    return out


_TERM_INDEX: dict[TermRow, dict[str, LikelihoodBand]] = {
    row: {variant: band for band in BANDS for variant in _variants(band.term(row))}
    for row in TermRow
}


def band_for_term(term: str, row: TermRow | str) -> LikelihoodBand:
    """Look up the band named by ``term`` in ``row``.

    Raises CrossRowError when the term belongs to the other row and
    UnknownTermError when it belongs to neither.
    """
    row = TermRow(row)
    key = _normalize(term)
    band = _TERM_INDEX[row].get(key)
    if band is not None:
        return band
    if key in _TERM_INDEX[row.other]:
        raise CrossRowError(term, row.value, row.other.value)
    raise UnknownTermError(term, row.value)


def range_for_term(term: str, row: TermRow | str) -> tuple[float, float]:
    """Percent range of an estimative term, as fractions.

    >>> range_for_term("Nearly Certain", "probability")
    (0.95, 0.99)
    """
    band = band_for_term(term, row)
    return band.lo, band.hi


# -- confidence levels -------------------------------------------------------

class ConfidenceLevel(str, enum.Enum):
    """Analytic confidence level, with its defining criteria."""

    HIGH = "high"
    MODERATE = "moderate"
    LOW = "low"

    @property
    def criteria(self) -> dict[str, str]:
        return _CONFIDENCE_CRITERIA[self]


CRITERION_TAGS = (
    "corroboration",
    "source_quality",
    "deception_potential",
    "assumption_criticality",
    "inference_strength",
)

_CONFIDENCE_CRITERIA = {
    ConfidenceLevel.HIGH: dict(zip(CRITERION_TAGS, (
        "well-corroborated info",
        "reliable sources",
        "low potential for deception",
        "assumptions not critical",
        "strong logical inferences",
    ))),
    ConfidenceLevel.MODERATE: dict(zip(CRITERION_TAGS, (
        "partially corroborated info",
        "good sources",
        "moderate potential for deception",
        "assumptions potentially critical",
        "mix of strong and weak inferences",
    ))),
    ConfidenceLevel.LOW: dict(zip(CRITERION_TAGS, (
        "uncorroborated information",
        "marginal sources",
        "high potential for deception",
        "key assumptions critical",
        "weak inferences",
    ))),
}


# -- Admiralty codes ---------------------------------------------------------

class AdmiraltyReliability(str, enum.Enum):
    """Source reliability letter. A is best; F means no basis to judge."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"

    @property
    def definition(self) -> str:
        return _RELIABILITY_DEFINITIONS[self]

    @property
    def rank(self) -> int | None:
        """0 for A through 4 for E; None for F, which is not ordered."""
        return None if self is AdmiraltyReliability.F else "ABCDE".index(self.value)


_RELIABILITY_DEFINITIONS = {
    AdmiraltyReliability.A: "Reliable",
    AdmiraltyReliability.B: "Usually Reliable",
    AdmiraltyReliability.C: "Fairly Reliable",
    AdmiraltyReliability.D: "Not Usually Reliable",
    AdmiraltyReliability.E: "Unreliable",
    AdmiraltyReliability.F: "Cannot Be Judged",
}


class AdmiraltyContent(enum.IntEnum):
    CONFIRMED = 1
    PROBABLY_TRUE = 2
    POSSIBLY_TRUE = 3
    DOUBTFULLY_TRUE = 4
    IMPROBABLE = 5
    CANNOT_BE_JUDGED = 6

    @property
    def definition(self) -> str:
        return self.name.replace("_", " ").title()


class Logicality(str, enum.Enum):
    LOGICAL = "logical"
    REASONABLY_LOGICAL = "reasonably_logical"
    NOT_LOGICAL = "not_logical"


class Consistency(str, enum.Enum):
    CONSISTENT = "consistent"
    AGREES_SOME = "agrees_some"
    NO_OTHER_INFO = "no_other_info"
    CONTRADICTED = "contradicted"


def classify_content(
    confirmed_independent: bool,
    logicality: Logicality | str,
    consistency: Consistency | str,
    judgeable: bool = True,
) -> AdmiraltyContent:
    """Admiralty content code from the judgements behind it.

    Combinations that match no row of the code table are treated as
    having no basis for evaluation (code 6).
    """
    logicality = Logicality(logicality)
    consistency = Consistency(consistency)
    if not judgeable:
        return AdmiraltyContent.CANNOT_BE_JUDGED
    if confirmed_independent:
        if logicality is Logicality.LOGICAL and consistency is Consistency.CONSISTENT:
            return AdmiraltyContent.CONFIRMED
        return AdmiraltyContent.CANNOT_BE_JUDGED
    rows = {
        (Logicality.LOGICAL, Consistency.CONSISTENT): AdmiraltyContent.PROBABLY_TRUE,
        (Logicality.REASONABLY_LOGICAL, Consistency.AGREES_SOME): AdmiraltyContent.POSSIBLY_TRUE,
        (Logicality.NOT_LOGICAL, Consistency.NO_OTHER_INFO): AdmiraltyContent.DOUBTFULLY_TRUE,
        (Logicality.NOT_LOGICAL, Consistency.CONTRADICTED): AdmiraltyContent.IMPROBABLE,
    }
    return rows.get((logicality, consistency), AdmiraltyContent.CANNOT_BE_JUDGED)


# Bands 3 and 4 (20-55%) have no Admiralty counterpart.
_CONTENT_BY_BAND = {
    1: AdmiraltyContent.IMPROBABLE,
    2: AdmiraltyContent.DOUBTFULLY_TRUE,
    3: AdmiraltyContent.CANNOT_BE_JUDGED,
    4: AdmiraltyContent.CANNOT_BE_JUDGED,
    5: AdmiraltyContent.POSSIBLY_TRUE,
    6: AdmiraltyContent.PROBABLY_TRUE,
    7: AdmiraltyContent.CONFIRMED,
}


def content_code_for_probability(p: float) -> AdmiraltyContent:
    return _CONTENT_BY_BAND[band_for_probability(p).index]


# -- lint --------------------------------------------------------------------

class LintWarning(str, enum.Enum):
    MIXED_ROWS = "MIXED_ROWS"
    LEVEL_PLUS_LIKELIHOOD = "LEVEL_PLUS_LIKELIHOOD"


def lint_assertion(
    likelihood_term: str | None,
    probability_term: str | None,
    confidence_level: ConfidenceLevel | str | None,
    co_located: bool,
) -> list[LintWarning]:
    """Flag estimative-language misuse within one assertion.

    MIXED_ROWS fires when a likelihood term and a probability term name
    different bands. LEVEL_PLUS_LIKELIHOOD fires when a confidence level
    shares a sentence with any band term. Unknown terms raise.
    """
    warnings = []
    if likelihood_term is not None and probability_term is not None:
        lik = band_for_term(likelihood_term, TermRow.LIKELIHOOD)
        prob = band_for_term(probability_term, TermRow.PROBABILITY)
        if lik.index != prob.index:
            warnings.append(LintWarning.MIXED_ROWS)
    has_term = likelihood_term is not None or probability_term is not None
    if confidence_level is not None and has_term and co_located:
        ConfidenceLevel(confidence_level)
        warnings.append(LintWarning.LEVEL_PLUS_LIKELIHOOD)
    return warnings


def scale_csv() -> str:
    """The band table as CSV text, percentages as whole numbers."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "likelihood_term", "probability_term", "lo_percent", "hi_percent"])
    for band in BANDS:
        writer.writerow([
            band.index, band.likelihood_term, band.probability_term,
            round(band.lo * 100), round(band.hi * 100),
        ])
    return buf.getvalue()
