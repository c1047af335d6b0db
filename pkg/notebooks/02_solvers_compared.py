# %% [markdown]
# # Ordering codewords: heuristic versus baselines
#
# The index-assignment problem reduces to a shortest open Hamiltonian path
# over the loss matrix. Here the three-phase sampler is set against greedy
# nearest neighbour, 2-opt and 3-opt, and against the exact optimum where
# that is still tractable.

# %%
import time

import numpy as np

from ris_index.baselines import exact_optimum, greedy_order, random_order, three_opt, two_opt
from ris_index.heuristic import SolverParams, solve
from ris_index.loss import path_cost, synth_matrix

# %% [markdown]
# Small instance first, so the exact Held-Karp oracle can referee.

# %%
d = synth_matrix("uniform", 11, seed=4).d
_, opt = exact_optimum(d)
report = solve(d, SolverParams.defaults(11, seed=0))
print(f"optimum {opt:.4f}  heuristic {report.best_cost:.4f}")
print("cost after each round:", np.round(report.cost_trace, 4))

# %% [markdown]
# At K = 64 only the relative ranking is available.

# %%
for dist in ("uniform", "clustered", "exploded"):
    d = synth_matrix(dist, 64, seed=0).d
    init = random_order(64, 0)
    t0 = time.perf_counter()
    rep = solve(d, SolverParams.defaults(64, seed=0))
    t_solve = time.perf_counter() - t0
    print(f"{dist:9s} proposed {rep.best_cost:.3f} ({t_solve:.1f}s, {rep.dist_type.value})"
          f"  2-opt {path_cost(d, two_opt(d, init)):.3f}"
          f"  3-opt {path_cost(d, three_opt(d, init)):.3f}"
          f"  greedy {path_cost(d, greedy_order(d)):.3f}")
