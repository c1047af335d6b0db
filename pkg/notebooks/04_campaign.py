# %% [markdown]
# # A reproducible Monte Carlo campaign
#
# Campaigns draw a fresh deployment per run from a seed derived from the
# master seed and the grid point, so any row can be regenerated alone. This
# is a shortened version of the first experiment preset; the command
# `ris-index bench --experiment I` runs the full desk-scale grid.

# %%
from ris_index import bench

config = bench.preset("I", runs=3, K=[32], N=[32])
rows = bench.run_campaign(config)
for r in rows:
    print(f"{r.solver:8s} {r.bsc_snr_db:5.1f} dB  loss {r.mean_loss:.3e} +- {r.std_loss:.1e}"
          f"  path {r.mean_path_cost:.3f}  {r.mean_time_ms:7.1f} ms")

# %% [markdown]
# The same configuration reproduces the same numbers, apart from timings.

# %%
again = bench.run_campaign(config)
print("identical:", [(r.solver, r.mean_loss) for r in rows] == [(r.solver, r.mean_loss) for r in again])
