"""
Estimative language and numeric probabilities
==============================================

Seven likelihood bands, two vocabularies, and the Admiralty content codes.
"""

# %%
from threatfuse.estimative import (
    BANDS,
    band_for_probability,
    content_code_for_probability,
    lint_assertion,
    range_for_term,
    scale_csv,
)

print(scale_csv())

# %%
# A probability lands in exactly one band; shared endpoints go to the upper band.
for p in (0.0, 0.05, 0.2, 0.5, 0.7, 0.97, 1.0):
    band = band_for_probability(p)
    code = content_code_for_probability(p)
    print(f"p={p:<5} band {band.index}  {band.likelihood_term:<20} {band.probability_term:<24} content {int(code)}")

# %%
# Terms decode case-insensitively, with or without the parenthesized variant.
for term, row in [("probably", "probability"), ("Almost Certain", "likelihood"), ("remote", "probability")]:
    print(term, "->", range_for_term(term, row))

# %%
# Every band midpoint decodes back to its own band.
print(all(band_for_probability(sum(range_for_term(b.likelihood_term, "likelihood")) / 2) is b for b in BANDS))

# %%
# Mixing the two rows, or attaching a confidence level to a likelihood
# statement in the same sentence, draws a lint warning.
print(lint_assertion("Likely", "Highly Probable", None, co_located=True))
print(lint_assertion("Likely", None, "high", co_located=True))
print(lint_assertion("Likely", None, "high", co_located=False))
