# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Observations are not always enough
#
# Two quantum models share every box except `y`.  In the first, `y` reads
# the half of a Bell pair that never passes through X; in the second it reads
# the wire leaving X.  Projective measurements cannot tell the two apart,
# yet intervening at X changes Y only in the second model.

# %%
import numpy as np

from qcausal import build_counterexample_pair, channel_distance, ground_truth_channel, is_positive_model, observe
from qcausal import theory as th
from qcausal.theory import Theory

# %%
m1, m2 = build_counterexample_pair(0.5)
print("positive:", is_positive_model(m1).positive, is_positive_model(m2).positive)

t1, t2 = observe(m1), observe(m2)
residual = max(abs(p - t2.entries[k]) for k, p in t1.entries.items())
print(f"{len(t1.entries)} outcome probabilities, largest difference {residual:.2e}")

# %% [markdown]
# Feed |0><0| into the wire leaving X and look at the state arriving at Y.

# %%
g1, g2 = ground_truth_channel(m1, "X", "Y"), ground_truth_channel(m2, "X", "Y")
zero = th.point_state(0, m1.loci["X"], Theory.QUANTUM)
print("model 1:\n", np.round(g1.do(zero).density().real, 4))
print("model 2:\n", np.round(g2.do(zero).density().real, 4))
print("channel distance:", channel_distance(g1, g2))

# %% [markdown]
# The gap shrinks as the depolarising weight grows and vanishes at 1.

# %%
for lam in (0.1, 0.5, 0.9, 1.0):
    a, b = build_counterexample_pair(lam)
    print(f"lambda={lam}: gap {channel_distance(ground_truth_channel(a, 'X', 'Y'), ground_truth_channel(b, 'X', 'Y')):.4f}")
