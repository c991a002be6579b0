"""
Two exact checks: Cauchy resolvents and Brownian vectors
========================================================

The Cauchy(t) model has mean resolvent 1/(z + i t) times the identity at
every N.  Brownian motion on the sphere has moments that solve a small
linear ODE, which we compare with a simulation.
"""
# %%
import math

from specmix.brownian import brownian_moment_check, exact_moment
from specmix.ensembles import fit_cauchy_scale, resolvent_mean
from specmix.vectors import UniformSphere

# %% mean resolvent entries at a few points of the upper half-plane
zs = [2j, 1 + 1j, -1 + 3j]
reps = resolvent_mean(60, 1.0, zs, 300, seed=0, vectors=UniformSphere(field="real"), sampler="levy_ito")
for r in reps:
    print(f"z={r.z}: diag mean {r.diag_mean:.4f} target {r.target:.4f}  (diag z {r.diag_z:.2f}, off z {r.off_z:.2f})")

# %% rescaling the vectors by sqrt(1.5) multiplies the fitted scale by 1.5
grid = [1j, 2j, 4j, 1 + 1j, -1 + 2j, 2 + 3j]
for s2 in (1.0, 1.5):
    rr = resolvent_mean(60, 1.0, grid, 200, seed=1, scale=math.sqrt(s2), sampler="levy_ito",
                        vectors=UniformSphere(field="real"))
    print(f"scale^2={s2}: fitted t' = {fit_cauchy_scale(grid, [r.diag_mean for r in rr]):.3f}")

# %% Brownian sphere: exact finite-N moments approach exp(-n t)
for N in (50, 200, 1000):
    print(N, [round(N * exact_moment((n,), N, 1.0), 5) for n in (2, 3)], [round(math.exp(-n), 5) for n in (2, 3)])

# %% the simulation agrees once the time step is fine enough; coarse Euler steps bias moments low
for scheme, steps in (("euler", 100), ("geodesic", 400)):
    rep = brownian_moment_check(200, 1.0, 600, seed=3, scheme=scheme, steps=steps)
    for n, e in rep.moments.items():
        print(f"{scheme:>8} n={n}: {e.mean:.4f} +- {e.se:.4f}, exact at N=200 {e.exact:.4f}, limit {e.target:.4f}")
    print("verdict:", rep.to_dict()["verdict"])
