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
# # Local tomography with projector frames
#
# A process is fixed by the numbers obtained when a frame state goes in and
# a frame effect comes out.  The projectors of the standard basis and the
# two-level x/y bases span the operator space, so the pseudo-inverse of the
# frame matrices recovers the process.

# %%
import numpy as np

from qcausal import theory as th
from qcausal.instruments import matrix_elements, reconstruct, standard_frame
from qcausal.models import random_causal
from qcausal.theory import SystemType, Theory

# %%
for d in (2, 3):
    fr = standard_frame(SystemType("S", d), Theory.QUANTUM)
    print(f"d={d}: {len(fr)} projectors, rank {fr.gram_rank()}, condition number {fr.condition_number():.3f}")

# %%
q = SystemType("Q", 2)
fr = standard_frame(q, Theory.QUANTUM)
f = random_causal(Theory.QUANTUM, [q], [q], seed=1)
grid = matrix_elements(f, fr, fr)
print("grid shape:", grid.shape)
print("round-trip error:", th.max_abs_diff(reconstruct(grid, fr, fr), f))

# %% [markdown]
# Noise in the grid is amplified by at most the inverse smallest singular
# values of the two frame matrices.

# %%
rng = np.random.default_rng(0)
for eps in (1e-8, 1e-6, 1e-4):
    noisy = grid + rng.uniform(-eps, eps, size=grid.shape)
    print(f"eps={eps:g}: error {th.max_abs_diff(reconstruct(noisy, fr, fr), f):.2e}")
