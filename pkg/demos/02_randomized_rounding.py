"""Rounding the fractional solution online.

The exact engine tracks the full distribution over matched sets, so we can
read off the exact probability that each edge is matched and compare it
with its fractional value.
"""

import numpy as np

from match_arena import ArrivalInstance, RoundingConfig
from match_arena.rounding import improved_plan, realize, run_warmup, warmup_plan

# %% warmup rounding is lossless: Pr[e matched] = x_e
inst = ArrivalInstance.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (1, 4)])
plan = warmup_plan(inst)
for e, xe in plan.fractional.x.items():
    print(f"edge {e}: x = {xe:.4f}  Pr = {plan.edge_probability[e]:.4f}")
print("one sampled run:", run_warmup(inst, seed=1).matching)

# %% improved rounding on an instance that needs normalization
dense = ArrivalInstance(10, ((), (0,), (0, 1), (0, 1, 2), (2,), (2, 4), (1, 3, 4, 5), (2, 4, 6),
                             (0, 2, 3, 5, 6, 7), (0, 1, 2, 3, 4, 5, 6, 7)))
cfg = RoundingConfig(epsilon=0.05)
plan = improved_plan(dense, cfg)
last = plan.arrivals[-1]
print(f"last arrival: sum z = {last.sum_z:.4f}, keep probabilities {np.round(last.keep, 3)}")
gap = max(plan.edge_probability[e] - xe for e, xe in plan.fractional.x.items())
print(f"largest Pr[e] - x_e: {gap:.2e}")

# %% sampled runs and their matching sizes
sizes = [len(realize(plan, np.random.default_rng(s)).matching) for s in range(2000)]
print(f"mean matching size {np.mean(sizes):.3f} vs sum x = {plan.fractional.value:.3f}")
