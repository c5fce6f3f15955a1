"""uclab: entropy and set-family toolkit for union-closed systems.

Core surfaces: scalar and distribution entropy kernels (``entropy_core``),
distributions over subset bitmasks with union transform and per-bit chain
decomposition (``subset_dist``), set-family combinatorics (``families``),
inequality scans and instance verification (``lemma_engine``), divergence
gap tooling (``conjecture_lab``), and a JSON-reporting CLI (``cli``).
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
