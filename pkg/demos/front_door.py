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
# # Front door, classical and quantum
#
# A latent source `u` feeds both the cause X and the effect Y, so the
# observed correlation between X and Y is not the effect of X on Y.  The
# mediator Z sits on the only path from X to Y and has no latent input.
# Observing all three loci is enough to recover the interventional channel.

# %%
import numpy as np

from qcausal import ground_truth_channel, identify_front_door, match_front_door, observe
from qcausal import theory as th
from qcausal.models import random_front_door_model
from qcausal.theory import Theory

# %% [markdown]
# ## Classical
#
# Draw a random positive model (every box mixed with a little uniform noise)
# and compare the identified do-distribution with the naive conditional.

# %%
m = random_front_door_model(Theory.CLASSICAL, seed=0)
print(m)
table = observe(m)
print("table rows:", len(table.entries), " normalization error:", table.normalization_error())

# %%
ident = identify_front_door(table, match_front_door(m.diagram))
truth = ground_truth_channel(m, "X", "Y")
print("identified vs contraction:", np.abs(ident.comb.data - truth.comb.data).max())

dx = m.loci["X"].dim
for x in range(dx):
    p_do = ident.do(th.point_state(x, m.loci["X"])).data[:, 0]
    p_xy = np.array([table.prob({"X": ("std", x), "Y": ("std", y)}) for y in range(m.loci["Y"].dim)])
    print(f"x={x}  P(y|do x)={np.round(p_do, 4)}  P(y|x)={np.round(p_xy / p_xy.sum(), 4)}")

# %% [markdown]
# ## Quantum
#
# The same circuit over qubits.  Each locus is probed with the trivial
# measurement and the three Pauli bases; the table holds 4^3 plan
# combinations.

# %%
mq = random_front_door_model(Theory.QUANTUM, seed=0)
tq = observe(mq)
chq = identify_front_door(tq)
gt = ground_truth_channel(mq, "X", "Y")
print("max entry error:", np.abs(chq.comb.data - gt.comb.data).max())

plus = th.pure_state(np.array([1, 1]) / np.sqrt(2), mq.loci["X"])
print("state at Y after do(|+>):")
print(np.round(chq.do(plus).density(), 4))
