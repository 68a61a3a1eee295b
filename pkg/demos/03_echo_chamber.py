"""
Echo chambers and provenance
============================

Re-shared reports look like corroboration unless provenance is tracked.
"""

# %%
from threatfuse.app.simulate import simulate_echo

# Two independent sources, then the first source's report re-shared 5 times.
print(simulate_echo(2, 5, "noisy_or").render())
print(simulate_echo(2, 5, "odds").render())

# %%
# With provenance the fused vector does not move as echoes accumulate.
for k in (0, 1, 5, 20):
    r = simulate_echo(2, k, "noisy_or")
    print(f"echoes={k:>2}  with={r.with_provenance[2]:.4f}  without={r.without_provenance[2]:.4f}")

# %%
# The same selection drives the engine: one report per source, the earliest.
from datetime import datetime, timezone

from threatfuse.estimative import AdmiraltyReliability
from threatfuse.fusion import QuintileAssertion
from threatfuse.reports import Descendant, Initiating, ThreadStore, ThreatReport, select_evidence

t = datetime(2024, 3, 1, tzinfo=timezone.utc)
A = AdmiraltyReliability.A
store = ThreadStore()
store.assign(ThreatReport("a", Initiating("INC"), "S1", t, t, QuintileAssertion(3), asserted_reliability=A))
store.assign(ThreatReport("b", Descendant("a"), "S1", t, t.replace(hour=5), QuintileAssertion(5), asserted_reliability=A))
store.assign(ThreatReport("c", Descendant("b"), "S2", t, t.replace(hour=6), QuintileAssertion(3), asserted_reliability=A))
for e in select_evidence(store.threads["INC"], store.reports, {}):
    print(e.as_dict())
