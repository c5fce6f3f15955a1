"""Kernel backend selection.

The hot numeric loops (batch binary entropy, pairwise union-entropy
accumulation, subset-lattice union transform) exist twice: a compiled Cython
extension (``_core``) and a pure-numpy fallback (``_pykernels``).  The
extension is used when importable; ``UCLAB_KERNELS=python`` forces the
fallback and ``UCLAB_KERNELS=compiled`` makes a missing extension an error.
Both backends agree to floating-point noise; ``benchmarks/bench_kernels.py``
compares their speed.
"""

import os

_requested = os.environ.get("UCLAB_KERNELS", "auto").strip().lower()

if _requested in ("auto", "", "compiled", "c", "native"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested not in ("auto", ""):
            raise
        from . import _pykernels as _impl

        BACKEND = "python"
elif _requested in ("python", "py"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    raise ValueError(f"unrecognized UCLAB_KERNELS value: {_requested!r}")

binary_entropy_many = _impl.binary_entropy_many
entropy_sum = _impl.entropy_sum
instance_stats = _impl.instance_stats
subset_union_square = _impl.subset_union_square

__all__ = [
    "BACKEND",
    "binary_entropy_many",
    "entropy_sum",
    "instance_stats",
    "subset_union_square",
]
