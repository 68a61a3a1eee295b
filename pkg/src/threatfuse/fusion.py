"""Quintile belief vectors and the two report-combination rules.

A report asserting "confidence lies in quintile k" is spread over the five
quintiles according to the sender's reliability, then independent reports
are fused cell by cell, either with noisy-OR or with odds multiplication.
Combined vectors are score vectors: only their relative sizes matter, and
:func:`argmax_quintile` normalizes on readout.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DegenerateEvidenceError, DomainError

__all__ = [
    "CombinationRule",
    "ODDS_EPSILON",
    "QuintileAssertion",
    "SpreadPolicy",
    "argmax_quintile",
    "as_vector",
    "combine",
    "combine_all",
    "combine_noisy_or",
    "combine_odds",
    "demo_tables",
    "odds",
    "quintile_for_probability",
    "spread",
]

N_QUINTILES = 5
ODDS_EPSILON = 1e-9
# Values within this distance of the maximum count as tied in argmax_quintile.
TIE_TOLERANCE = 1e-12


class SpreadPolicy(str, enum.Enum):
    NEAREST = "nearest"
    EXTREMES_WIDE = "extremes_wide"


class CombinationRule(str, enum.Enum):
    NOISY_OR = "noisy_or"
    ODDS_PRODUCT = "odds_product"

    @classmethod
    def parse(cls, value: "CombinationRule | str") -> "CombinationRule":
        """Accept enum values plus the CLI spellings ``noisy-or`` and ``odds``."""
        if isinstance(value, cls):
            return value
        aliases = {"noisy-or": cls.NOISY_OR, "odds": cls.ODDS_PRODUCT, "odds-product": cls.ODDS_PRODUCT}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class QuintileAssertion:
    """A point claim that confidence lies in quintile ``quintile`` (1..5)."""

    quintile: int

    def __post_init__(self):
        if isinstance(self.quintile, bool) or self.quintile not in range(1, N_QUINTILES + 1):
            raise DomainError(f"quintile must be an integer in 1..5, got {self.quintile!r}")


def as_vector(v: Iterable[float], *, probabilities: bool = False) -> np.ndarray:
    """Validate and copy a quintile vector into a float64 array."""
    arr = np.array(v, dtype=float)
    if arr.shape != (N_QUINTILES,):
        raise DomainError(f"a quintile vector has 5 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"quintile vector components must be finite and >= 0: {arr}")
    if probabilities and np.any(arr > 1):
        raise DomainError(f"components must be probabilities in [0, 1]: {arr}")
    return arr


def quintile_for_probability(p: float) -> int:
    """Quintile containing ``p`` under ``[0,.2), [.2,.4), ..., [.8, 1]``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability out of range: {p!r}")
    for k, upper in enumerate((0.2, 0.4, 0.6, 0.8), start=1):
        if p < upper:
            return k
    return N_QUINTILES


def spread(
    assertion: QuintileAssertion | int,
    center_mass: float,
    policy: SpreadPolicy | str = SpreadPolicy.NEAREST,
) -> np.ndarray:
    """Spread a point assertion over the quintiles.

    The asserted quintile keeps ``center_mass``; the remainder goes half to
    each neighbour. At Q1/Q5 the ``nearest`` policy gives the whole
    remainder to the single neighbour, while ``extremes_wide`` splits it
    over the two nearest interior quintiles.

    >>> spread(3, 0.8).round(2).tolist()
    [0.0, 0.1, 0.8, 0.1, 0.0]
    >>> spread(1, 0.8, "extremes_wide").round(2).tolist()
    [0.8, 0.1, 0.1, 0.0, 0.0]
    """
    if not isinstance(assertion, QuintileAssertion):
        assertion = QuintileAssertion(assertion)
    policy = SpreadPolicy(policy)
    center_mass = float(center_mass)
    if not 0.0 < center_mass <= 1.0:
        raise DomainError(f"center_mass must lie in (0, 1], got {center_mass!r}")

    i = assertion.quintile - 1
    rest = 1.0 - center_mass
    v = np.zeros(N_QUINTILES)
    v[i] = center_mass
    if 0 < i < N_QUINTILES - 1:
        v[i - 1] += rest / 2
        v[i + 1] += rest / 2
    else:
        step = 1 if i == 0 else -1
        if policy is SpreadPolicy.NEAREST:
            v[i + step] += rest
        else:
            v[i + step] += rest / 2
            v[i + 2 * step] += rest / 2
    return v


def combine_noisy_or(a, b) -> np.ndarray:
    """Cellwise ``1 - (1 - a)(1 - b)``.

    >>> combine_noisy_or([0, .1, .8, .1, 0], [.8, .2, 0, 0, 0]).round(2).tolist()
    [0.8, 0.28, 0.8, 0.1, 0.0]
    """
    a = as_vector(a, probabilities=True)
    b = as_vector(b, probabilities=True)
    return 1.0 - (1.0 - a) * (1.0 - b)


def odds(p) -> np.ndarray:
    """Cellwise ``p / (1 - p)`` with p capped at ``1 - ODDS_EPSILON``."""
    p = np.minimum(as_vector(p, probabilities=True), 1.0 - ODDS_EPSILON)
    return p / (1.0 - p)


def combine_odds(a, b) -> np.ndarray:
    """Multiply cellwise odds and convert back to probabilities.

    A zero in either input annihilates that cell.
    """
    product = odds(a) * odds(b)
    return product / (1.0 + product)


_RULES = {
    CombinationRule.NOISY_OR: combine_noisy_or,
    CombinationRule.ODDS_PRODUCT: combine_odds,
}


def combine(a, b, rule: CombinationRule | str) -> np.ndarray:
    return _RULES[CombinationRule.parse(rule)](a, b)


def combine_all(vectors: Sequence, rule: CombinationRule | str) -> np.ndarray:
    """Left fold of the pairwise rule over ``vectors``."""
    if len(vectors) == 0:
        raise DomainError("combine_all needs at least one vector")
    pairwise = _RULES[CombinationRule.parse(rule)]
    first = as_vector(vectors[0], probabilities=True)
    return reduce(pairwise, vectors[1:], first)


def argmax_quintile(v) -> tuple[int, float]:
    """Strongest quintile (1-based) and its share of the vector's total.

    Ties go to the lower quintile. An all-zero vector, as produced when the
    odds rule meets two disagreeing reports, raises DegenerateEvidenceError.
    """
    v = as_vector(v)
    total = float(v.sum())
    if total <= 0.0:
        raise DegenerateEvidenceError("all quintile masses are zero; the evidence annihilated")
    top = float(v.max())
    k = int(np.flatnonzero(v >= top - TIE_TOLERANCE)[0])
    return k + 1, float(v[k]) / total


# -- demo tables -------------------------------------------------------------

_COL = 9


def _row(label: str, cells: Sequence[str]) -> str:
    return (f"{label:<16}" + "".join(f"{c:>{_COL}}" for c in cells)).rstrip()


def _pct(v: np.ndarray, blank_zero: bool = False) -> list[str]:
    return ["" if blank_zero and x == 0 else f"{round(x * 100):d}%" for x in v]


def _odds_cells(v: np.ndarray) -> list[str]:
    return [f"{x:.3f}" for x in v]


def _header(title: str) -> list[str]:
    return [title, _row("", [f"Q{k}" for k in range(1, N_QUINTILES + 1)])]


def demo_tables() -> str:
    """Render the worked spread and combination tables as aligned text.

    Report rows leave zero cells blank; combined rows show every cell.
    """
    r1 = spread(3, 0.80, SpreadPolicy.NEAREST)
    r2 = spread(1, 0.80, SpreadPolicy.NEAREST)
    r2_alt = spread(1, 0.80, SpreadPolicy.EXTREMES_WIDE)

    lines: list[str] = []
    lines += _header("Spread 1  one top-reliability source asserting Q3")
    lines.append(_row("Report 1", _pct(r1, True)))
    lines.append("")
    lines += _header("Spread 2  a second top-reliability source asserting Q1")
    lines.append(_row("Report 1", _pct(r1, True)))
    lines.append(_row("Report 2", _pct(r2, True)))
    lines.append("")
    lines += _header("Spread 3  the Q1 assertion under the extremes_wide policy")
    lines.append(_row("Report 1", _pct(r1, True)))
    lines.append(_row("Report 2", _pct(r2, True)))
    lines.append(_row("Alt: Report 2", _pct(r2_alt, True)))
    lines.append("")
    lines.append("Combination  noisy-OR against odds product")
    cases = (
        ("A", "noisy-OR", ("Report 1", r1), ("Report 2", r2)),
        ("B", "noisy-OR", ("Report 1", r1), ("Report 3", r1)),
        ("C", "odds product", ("Report 1", r1), ("Report 3", r1)),
        ("D", "odds product", ("Report 1", r1), ("Report 2", r2)),
    )
    for name, method, (la, a), (lb, b) in cases:
        lines.append("")
        lines.append(method)
        lines.append(_row(f"CASE {name}", [f"Q{k}" for k in range(1, N_QUINTILES + 1)]))
        lines.append(_row(la, _pct(a, True)))
        lines.append(_row(lb, _pct(b, True)))
        if method == "noisy-OR":
            lines.append(_row("Combined", _pct(combine_noisy_or(a, b))))
        else:
            oa, ob = odds(a), odds(b)
            lines.append(_row("Odds 1", _odds_cells(oa)))
            lines.append(_row("Odds 2", _odds_cells(ob)))
            lines.append(_row("Product", _odds_cells(oa * ob)))
            lines.append(_row("Probability", _pct(combine_odds(a, b))))
    return "\n".join(lines) + "\n"
