"""Fractional matching under general vertex arrivals.

We run the primal-dual algorithm on a small path, then on a random graph with
the best member of the function family, and compare the value against the
offline maximum matching.
"""

import numpy as np

from match_arena import ArrivalInstance, WWParams, beta_star, f_kappa, maximum_matching, run_fractional
from match_arena.fractional import KAPPA_OPT, degree_bound_violation

# %% water-filling on a three-vertex path
path = ArrivalInstance.from_edges(3, [(0, 1), (1, 2)])
run = run_fractional(path, WWParams.warmup())
print("x on the path:", run.x)
print("duals:", np.round(run.y, 4), "thetas:", np.round(run.thetas, 4))

# %% the family of functions: larger kappa bends f away from 1 - theta
theta = np.linspace(0, 1, 6)
for kappa in (1.0, 1.1, KAPPA_OPT):
    print(f"kappa={kappa:<7} f(theta)={np.round(f_kappa(theta, kappa), 3)}  beta*={beta_star(kappa):.4f}")

# %% random instance: value against OPT / beta
rng = np.random.default_rng(0)
n = 30
iu, ju = np.triu_indices(n, 1)
keep = rng.random(len(iu)) < 0.15
inst = ArrivalInstance.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))
params = WWParams.best_known()
run = run_fractional(inst, params)
opt = len(maximum_matching(n, inst.edges()))
print(f"sum x = {run.value:.4f}, OPT = {opt}, OPT/beta = {opt / params.beta:.4f}")
print("degree-bound violation:", degree_bound_violation(run))
