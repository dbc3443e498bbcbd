"""Primary paths and the blocking-mass tail.

Each arriving vertex picks a primary neighbor; the pruned selection graph keeps
only the earliest primary arc into each vertex. We look at how long the
primary paths get and how often their blocking mass is large.
"""

import numpy as np

from match_arena import RoundingConfig
from match_arena.diagnostics import GoodVertexParams, estimate_long_path_prob, tail_bound_report
from match_arena.harness import random_bipartite

rng = np.random.default_rng(3)
inst = random_bipartite(12, 0.5, rng)
cfg = RoundingConfig(epsilon=0.05)

# %% long primary paths
est = estimate_long_path_prob(inst, cfg, GoodVertexParams(length_threshold=2, prob_threshold=0.05, samples=20000))
for v in range(inst.n):
    tag = "good" if est.good[v] else "bad"
    print(f"v={v:<3} Pr[len >= 2] = {est.freq[v]:.4f}  [{est.ci_low[v]:.4f}, {est.ci_high[v]:.4f}] {tag}")

# %% certified-path blocking mass vs e^(-k/2)
rep = tail_bound_report(inst, cfg, (0.5, 1, 2, 4), samples=50000, rng=rng)
for i, k in enumerate(rep.k_grid):
    print(f"k={k:<4} worst root frequency {rep.freq[i].max():.4f}  bound {rep.bound[i]:.4f}")
