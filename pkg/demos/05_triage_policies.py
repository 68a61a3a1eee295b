"""
Ranking incidents under different priority policies
====================================================

Ingest the shipped fixture and rank it three ways.
"""

# %%
import shutil
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from threatfuse.app import Engine, load_config
from threatfuse.triage import TriagePolicy, render_triage

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
work = Path(tempfile.mkdtemp())
for name in ("config.json", "incidents.json", "trusted.txt", "reports_6.jsonl"):
    shutil.copy(fixtures / name, work / name)

engine = Engine.open(load_config(work / "config.json"))
print(engine.ingest(work / "reports_6.jsonl").as_dict())
now = datetime(2024, 3, 15, tzinfo=timezone.utc)

# %%
# Both incidents are serious. INC-1 has the stronger fused readout but a
# costly response; INC-2 is cheap to act on.
print(render_triage(engine.triage("confidence_first", now)))
print(render_triage(engine.triage("cost_first", now)))

# %%
print(render_triage(engine.triage(TriagePolicy.weighted(1.0, 1.0, 0.5), now)))

# %%
# Trusting S1 and S3 raises both acquiring scores by the trusted weight.
engine.reload_trusted()
print(render_triage(engine.triage("confidence_first", now)))

# %%
# The event log rebuilds the same state.
again = Engine.replay(work / "events.jsonl", load_config(work / "config.json"))
print(again.state_summary() == engine.state_summary())
