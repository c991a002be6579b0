"""
From Bell to Catalan
====================

Limit moments of the Poisson(1) model as the localization time t grows.
At t=0 every partition counts (Bell numbers), at t=inf only non-crossing
ones survive (Catalan numbers).
"""
# %%
import math

import numpy as np

from specmix import Interpolation, Unit, limit_moments, poisson
from specmix.moments import acyclic_counts_moments

K = 6
ts = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, math.inf]
rows = np.array([limit_moments(poisson(1.0), Interpolation(t), K).m for t in ts])

# %% moments shrink monotonically in t for every k >= 3
print("t      " + "".join(f"m{k:<9}" for k in range(1, K + 1)))
for t, row in zip(ts, rows):
    print(f"{t:<6} " + "".join(f"{v:<10.4f}" for v in row))
print("decreasing in t:", bool(np.all(np.diff(rows, axis=0) <= 1e-12)))

# %% the rate scales the free cumulants too: Poisson(2) at t=1
print("Poisson(2), t=1:", np.round(limit_moments(poisson(2.0), Interpolation(1.0), 4).m, 6))

# %% vectors with exploding moments: the weights become 0/1 counts of acyclic edge partitions
print("unit model:", [round(v) for v in limit_moments(poisson(1.0), Unit(), 8).m])
print("direct count:", list(acyclic_counts_moments(8)))
