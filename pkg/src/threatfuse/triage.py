"""Acquiring-confidence scores and priority ranking of incidents.

Which comes first, confidence in an alert or the cost of acting on it, is
a policy choice the operator must make; :func:`rank` takes the policy as a
required argument and never picks one on its own.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import ConfigError, DomainError
from .fusion import N_QUINTILES
from .reports import IncidentThread, ThreatReport, selected_reports, source_letter
from .sources import SourceProfile, center_mass

__all__ = [
    "Level",
    "ScoringWeights",
    "TriageItem",
    "TriagePolicy",
    "acquiring_score",
    "freshness",
    "rank",
    "render_triage",
    "triage_jsonl",
]


class Level(str, enum.Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


DEFAULT_LEVEL_VALUES = {Level.HIGH: 1.0, Level.MEDIUM: 0.5, Level.LOW: 0.0}


def _nonneg(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ConfigError(f"{name} must be finite and >= 0, got {x!r}")
    return x


@dataclass(frozen=True)
class ScoringWeights:
    """Feature weights for :func:`acquiring_score`.

    Values come from the configuration file; there are deliberately no
    defaults here.
    """

    trusted: float
    reliability: float
    corroboration: float
    vetted_human: float
    detail: float
    freshness: float
    freshness_half_life: timedelta
    corroboration_cap: int = 3

    def __post_init__(self):
        for name in ("trusted", "reliability", "corroboration", "vetted_human", "detail", "freshness"):
            object.__setattr__(self, name, _nonneg(name, getattr(self, name)))
        if self.freshness_half_life <= timedelta(0):
            raise ConfigError("freshness_half_life must be positive")
        if self.corroboration_cap < 0:
            raise ConfigError("corroboration_cap must be >= 0")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScoringWeights":
        known = {
            "trusted", "reliability", "corroboration", "vetted_human", "detail",
            "freshness", "freshness_half_life_days", "corroboration_cap",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scoring weight keys: {sorted(unknown)}")
        missing = known - {"corroboration_cap"} - set(data)
        if missing:
            raise ConfigError(f"missing scoring weight keys: {sorted(missing)}")
        kwargs = {k: v for k, v in data.items() if k != "freshness_half_life_days"}
        kwargs["freshness_half_life"] = timedelta(days=float(data["freshness_half_life_days"]))
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "trusted": self.trusted,
            "reliability": self.reliability,
            "corroboration": self.corroboration,
            "vetted_human": self.vetted_human,
            "detail": self.detail,
            "freshness": self.freshness,
            "freshness_half_life_days": self.freshness_half_life / timedelta(days=1),
            "corroboration_cap": self.corroboration_cap,
        }


def freshness(report: ThreatReport, now: datetime, half_life: timedelta) -> float:
    """Relevance weight ``2 ** (-age / half_life)``, or 0 once expired."""
    if now < report.published_at:
        raise DomainError(f"now ({now}) precedes publication of {report.report_id!r}")
    if report.expires_at is not None and now >= report.expires_at:
        return 0.0
    age = (now - report.published_at) / half_life
    return 2.0 ** -age


def acquiring_score(
    thread: IncidentThread,
    reports: Mapping[str, ThreatReport],
    profiles: Mapping[str, SourceProfile],
    now: datetime,
    w: ScoringWeights,
) -> float:
    """Recipient-side confidence score for an incident.

    Sums per-report features over the one selected report per source
    (trusted source, reliability mass, human vetting, detail), then adds
    capped corroboration and the mean freshness of those reports.
    """
    selected = selected_reports(thread, reports)
    trusted = reliability = vetted = detail = 0.0
    for r in selected:
        profile = profiles.get(r.source_id)
        trusted += 1.0 if profile is not None and profile.trusted else 0.0
        reliability += center_mass(source_letter(r, profiles))
        vetted += 1.0 if r.vetting.human else 0.0
        detail += r.detail_score / 3
    corroboration = min(len(selected) - 1, w.corroboration_cap)
    fresh = sum(freshness(r, now, w.freshness_half_life) for r in selected) / len(selected)
    return (
        w.trusted * trusted
        + w.reliability * reliability
        + w.corroboration * corroboration
        + w.vetted_human * vetted
        + w.detail * detail
        + w.freshness * fresh
    )


@dataclass(frozen=True)
class TriageItem:
    """One incident ready for ranking.

    ``fused_quintile`` is None when the fused vector is all zeros, which
    ranks below every quintile.
    """

    incident_id: str
    seriousness: Level
    action_cost: Level
    fused: np.ndarray = field(compare=False)
    fused_quintile: int | None
    acquiring_score: float

    def __post_init__(self):
        object.__setattr__(self, "seriousness", Level(self.seriousness))
        object.__setattr__(self, "action_cost", Level(self.action_cost))

    def as_dict(self) -> dict:
        return {
            "incident_id": self.incident_id,
            "seriousness": self.seriousness.value,
            "action_cost": self.action_cost.value,
            "fused": [float(x) for x in self.fused],
            "fused_quintile": self.fused_quintile,
            "acquiring_score": float(self.acquiring_score),
        }


class PolicyMode(str, enum.Enum):
    CONFIDENCE_FIRST = "confidence_first"
    COST_FIRST = "cost_first"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class TriagePolicy:
    mode: PolicyMode
    w_seriousness: float = 0.0
    w_confidence: float = 0.0
    w_cost: float = 0.0
    level_values: Mapping[Level, float] = field(default_factory=lambda: dict(DEFAULT_LEVEL_VALUES))

    def __post_init__(self):
        mode = self.mode
        if isinstance(mode, str) and not isinstance(mode, PolicyMode):
            mode = PolicyMode(mode.replace("-", "_"))
        object.__setattr__(self, "mode", mode)
        for name in ("w_seriousness", "w_confidence", "w_cost"):
            object.__setattr__(self, name, _nonneg(name, getattr(self, name)))
        if mode is PolicyMode.WEIGHTED and not (self.w_seriousness or self.w_confidence or self.w_cost):
            raise ConfigError("weighted policy needs at least one positive weight")
        values = {Level(k): float(v) for k, v in self.level_values.items()}
        if set(values) != set(Level):
            raise ConfigError("level_values must cover high, medium and low")
        object.__setattr__(self, "level_values", values)

    @classmethod
    def confidence_first(cls) -> "TriagePolicy":
        return cls(PolicyMode.CONFIDENCE_FIRST)

    @classmethod
    def cost_first(cls) -> "TriagePolicy":
        return cls(PolicyMode.COST_FIRST)

    @classmethod
    def weighted(cls, w_seriousness: float, w_confidence: float, w_cost: float, **kw) -> "TriagePolicy":
        return cls(PolicyMode.WEIGHTED, w_seriousness, w_confidence, w_cost, **kw)


_SEVERITY_ORDER = {Level.HIGH: 0, Level.MEDIUM: 1, Level.LOW: 2}


def _q(item: TriageItem) -> int:
    return item.fused_quintile or 0


def rank(items: Sequence[TriageItem], policy: TriagePolicy) -> list[TriageItem]:
    """Order incidents for response; ties always fall back to incident id."""
    if policy.mode is PolicyMode.CONFIDENCE_FIRST:
        def key(it):
            return (_SEVERITY_ORDER[it.seriousness], -_q(it), -it.acquiring_score, it.incident_id)
    elif policy.mode is PolicyMode.COST_FIRST:
        def key(it):
            return (_SEVERITY_ORDER[it.seriousness], -_SEVERITY_ORDER[it.action_cost], -_q(it), it.incident_id)
    else:
        lv = policy.level_values

        def key(it):
            # annihilated evidence counts as quintile 0, one step below Q1
            confidence = (_q(it) - 1) / (N_QUINTILES - 1)
            score = (
                policy.w_seriousness * lv[it.seriousness]
                + policy.w_confidence * confidence
                + policy.w_cost * (1.0 - lv[it.action_cost])
            )
            return (-score, it.incident_id)
    return sorted(items, key=key)


def triage_jsonl(items: Sequence[TriageItem]) -> str:
    return "".join(json.dumps(it.as_dict(), sort_keys=True) + "\n" for it in items)


def render_triage(items: Sequence[TriageItem]) -> str:
    """Aligned-column text view of ranked items."""
    header = f"{'rank':>4}  {'incident':<16} {'serious':<8} {'cost':<8} {'quint':>5} {'score':>8}  fused"
    lines = [header]
    for n, it in enumerate(items, start=1):
        q = f"Q{it.fused_quintile}" if it.fused_quintile else "-"
        fused = " ".join(f"{x:.3f}" for x in it.fused)
        lines.append(
            f"{n:>4}  {it.incident_id:<16} {it.seriousness.value:<8} {it.action_cost.value:<8}"
            f" {q:>5} {it.acquiring_score:>8.3f}  {fused}"
        )
    return "\n".join(lines) + "\n"
