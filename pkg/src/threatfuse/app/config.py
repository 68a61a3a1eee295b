"""Configuration loading.

The config is a JSON file. Its location comes from an explicit path, else
the ``THREATFUSE_CONFIG`` environment variable, else the packaged default.
Unknown keys are rejected. Relative paths resolve against the config file's
directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from ..errors import ConfigError
from ..fusion import CombinationRule, SpreadPolicy
from ..sources import ReliabilityThresholds
from ..triage import Level, PolicyMode, ScoringWeights, TriagePolicy

ENV_VAR = "THREATFUSE_CONFIG"

_TOP_KEYS = {
    "spread_policy", "combination_rule", "scoring_weights", "triage_policy",
    "level_values", "reliability_thresholds", "paths",
}
_PATH_KEYS = {"log", "trusted_list", "incidents"}


@dataclass(frozen=True)
class Paths:
    log: Path | None = None
    trusted_list: Path | None = None
    incidents: Path | None = None


@dataclass(frozen=True)
class Config:
    spread_policy: SpreadPolicy
    combination_rule: CombinationRule
    scoring_weights: ScoringWeights
    triage_policy: TriagePolicy | None
    reliability_thresholds: ReliabilityThresholds
    level_values: dict[Level, float] = field(default_factory=dict)
    paths: Paths = Paths()


def _load_policy(data: Any, level_values: dict[Level, float]) -> TriagePolicy | None:
    if data is None:
        return None
    if isinstance(data, str):
        data = {"mode": data}
    if not isinstance(data, dict):
        raise ConfigError("triage_policy must be null, a mode name, or an object")
    unknown = set(data) - {"mode", "w_seriousness", "w_confidence", "w_cost"}
    if unknown:
        raise ConfigError(f"unknown triage_policy keys: {sorted(unknown)}")
    try:
        mode = PolicyMode(str(data.get("mode", "")).replace("-", "_"))
    except ValueError:
        raise ConfigError(f"unknown triage policy mode {data.get('mode')!r}") from None
    weights = {k: data[k] for k in ("w_seriousness", "w_confidence", "w_cost") if k in data}
    return TriagePolicy(mode, level_values=level_values, **weights)


def config_from_dict(data: dict, base_dir: Path | None = None) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _TOP_KEYS - {"triage_policy", "level_values", "paths"} - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    try:
        spread_policy = SpreadPolicy(data["spread_policy"])
        rule = CombinationRule.parse(data["combination_rule"])
        levels = {Level(k): float(v) for k, v in data.get("level_values", {"high": 1.0, "medium": 0.5, "low": 0.0}).items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    raw_paths = data.get("paths") or {}
    unknown = set(raw_paths) - _PATH_KEYS
    if unknown:
        raise ConfigError(f"unknown paths keys: {sorted(unknown)}")

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        return p if p.is_absolute() or base_dir is None else base_dir / p

    return Config(
        spread_policy=spread_policy,
        combination_rule=rule,
        scoring_weights=ScoringWeights.from_dict(data["scoring_weights"]),
        triage_policy=_load_policy(data.get("triage_policy"), levels),
        reliability_thresholds=ReliabilityThresholds.from_dict(data["reliability_thresholds"]),
        level_values=levels,
        paths=Paths(**{k: resolve(raw_paths.get(k)) for k in _PATH_KEYS}),
    )


def default_config_text() -> str:
    return resources.files("threatfuse.data").joinpath("default_config.json").read_text(encoding="utf-8")


def load_config(path: str | Path | None = None) -> Config:
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return config_from_dict(json.loads(default_config_text()), Path.cwd())
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data, path.parent)
