"""Gray-coded index assignment for RIS phase-shift codebooks."""
import os

import numba

# Try OpenMP first; numba's default order probes TBB and warns when it is too old.
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ and "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

__version__ = "0.1.0"
