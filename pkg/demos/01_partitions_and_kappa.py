"""
Partitions, crossings and the block-change count
=================================================

Walk through small set partitions, count block changes around the circle
and check that the Gaussian-interpolation weight is exp(-kappa t).
"""
# %%
import math

from specmix import Interpolation, enumerate_partitions, f_gamma, is_noncrossing, kappa, parse_partition, thin

# %% every partition of {1..4}, with its kappa and whether it crosses
for p in enumerate_partitions(4):
    print(f"{str(p):>16}  kappa={kappa(p)}  noncrossing={is_noncrossing(p)}")

# %% the weight of a partition under Interpolation(t), from the hypergraph sum
t = 0.8
for text in ["{1,3}{2,4}", "{1,2}{3,4}", "{1,4}{2,5}{3,6}", "{1,3,5}{2,4,6}"]:
    p = parse_partition(text)
    w = f_gamma(p, Interpolation(t), use_thin=False, split_components=False)
    print(f"{text:>16}  weight={w:.12f}  exp(-kappa t)={math.exp(-kappa(p) * t):.12f}")

# %% a larger example: block changes are counted per connected component
p = parse_partition("{1,8,10}{2,4}{3,5}{6,7,9}")
print(p, "kappa =", kappa(p), " thinned:", thin(p))
w = f_gamma(p, Interpolation(1.0), use_thin=False, split_components=False, k_max=10)
print("weight at t=1:", w, " exp(-8):", math.exp(-8))
