"""HTTP service over the same :class:`~threatfuse.app.engine.Engine` as the CLI.

Run with ``uvicorn threatfuse.app.service:app`` (reads ``THREATFUSE_CONFIG``)
or build an app around an existing engine with :func:`create_app`.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Request

from ..errors import ConfigError, ThreatFuseError, UnknownIncidentError, UnknownReportError
from ..reports import parse_timestamp
from .engine import Engine, profile_dict


def create_app(engine: Engine) -> FastAPI:
    api = FastAPI(title="threatfuse")

    @api.post("/reports")
    async def post_reports(request: Request):
        text = (await request.body()).decode("utf-8")
        try:
            parsed = json.loads(text)
        except json.JSONDecodeError:
            parsed = None
        if isinstance(parsed, list):
            records = parsed
        elif isinstance(parsed, dict):
            records = [parsed]
        else:
            records = text.splitlines()
        return engine.ingest_records(records).as_dict()

    @api.post("/feedback")
    async def post_feedback(body: dict):
        try:
            p = engine.feedback(body["report_id"], body["outcome"])
        except KeyError as exc:
            raise HTTPException(422, f"missing field {exc}") from None
        except UnknownReportError as exc:
            raise HTTPException(404, str(exc)) from None
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        return profile_dict(p)

    @api.get("/incidents/{incident_id}/fusion")
    def get_fusion(incident_id: str, rule: str | None = None):
        try:
            return engine.fuse_incident(incident_id, rule).as_dict()
        except UnknownIncidentError as exc:
            raise HTTPException(404, str(exc)) from None
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None

    @api.get("/triage")
    def get_triage(policy: str | None = None, now: str | None = None):
        try:
            ts = parse_timestamp(now) if now else None
            items = engine.triage(policy.replace("-", "_") if policy else None, ts)
        except (ThreatFuseError, ValueError) as exc:
            raise HTTPException(422, str(exc)) from None
        return [it.as_dict() for it in items]

    @api.get("/sources/{source_id}")
    def get_source(source_id: str):
        p = engine.source(source_id)
        if p is None:
            raise HTTPException(404, f"unknown source {source_id!r}")
        return profile_dict(p)

    @api.post("/trusted/reload")
    def reload_trusted():
        try:
            ids = engine.reload_trusted()
        except ConfigError as exc:
            raise HTTPException(422, str(exc)) from None
        return {"trusted": sorted(ids)}

    return api


def __getattr__(name: str):
    # Lazily build the module-level ``app`` so importing this module has no side effects.
    if name == "app":
        return create_app(Engine.open())
    raise AttributeError(name)
