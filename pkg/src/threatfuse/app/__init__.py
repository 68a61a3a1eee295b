"""Runnable application: configuration, event log, engine, CLI and HTTP service."""

from .config import Config, load_config
from .engine import Engine, FusionResult, IngestSummary

__all__ = ["Config", "Engine", "FusionResult", "IngestSummary", "load_config"]
