import os

# the bundled TBB is too old for numba and warns on every import
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")
