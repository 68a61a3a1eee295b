"""
Source reliability from outcome feedback
========================================

Letters start at F and move as recipients confirm or refute reports.
"""

# %%
import random
from datetime import datetime, timezone

from threatfuse.sources import OutcomeFeedback, ProfileStore, spread_for_letter

at = datetime(2024, 3, 1, tzinfo=timezone.utc)
store = ProfileStore()
for i in range(30):
    store.register_report(f"good{i}", "steady", at)
    store.register_report(f"bad{i}", "noisy", at)

print(store.profile("steady"))

# %%
rng = random.Random(1)
for i in range(30):
    store.record(OutcomeFeedback(f"good{i}", "confirmed" if rng.random() < 0.95 else "refuted", at))
    p = store.record(OutcomeFeedback(f"bad{i}", "confirmed" if rng.random() < 0.5 else "refuted", at))
    if i in (3, 4, 9, 29):
        print(i + 1, store["steady"].letter.value, p.letter.value)

# %%
# A verdict can be corrected; the later outcome replaces the earlier one.
store.record(OutcomeFeedback("good0", "refuted", at))
print(store["steady"])

# %%
# The letter sets how much mass stays on the asserted quintile.
for letter in "ABCDEF":
    print(letter, spread_for_letter(3, letter).round(2))

print(store.to_csv())
