"""
Spreading and combining quintile beliefs
========================================

Two top-reliability reports, fused under noisy-OR and under the odds product.
"""

# %%
import numpy as np

from threatfuse.fusion import argmax_quintile, combine_all, combine_noisy_or, combine_odds, demo_tables, spread

np.set_printoptions(precision=3, suppress=True)

q3 = spread(3, 0.80)
q1 = spread(1, 0.80)
q1_wide = spread(1, 0.80, "extremes_wide")
print("Q3 at 0.8:", q3)
print("Q1 at 0.8:", q1)
print("Q1 wide:  ", q1_wide)

# %%
# Agreeing reports: noisy-OR raises every touched cell, the odds product
# sharpens the peak and suppresses the flanks.
print("noisy-OR:", combine_noisy_or(q3, q3), argmax_quintile(combine_noisy_or(q3, q3)))
print("odds:    ", combine_odds(q3, q3), argmax_quintile(combine_odds(q3, q3)))

# %%
# Disagreeing reports: noisy-OR keeps both peaks (tie broken low), the odds
# product wipes out every cell where either report put zero.
print("noisy-OR:", combine_noisy_or(q3, q1), argmax_quintile(combine_noisy_or(q3, q1)))
print("odds:    ", combine_odds(q3, q1))

# %%
# Folding more evidence in: noisy-OR saturates toward 1.
for n in range(1, 6):
    print(n, combine_all([q3] * n, "noisy_or"))

# %%
print(demo_tables())
