"""Kernel backend selection and threaded dispatch for the butterfly apply.

Importing this module picks the compiled Cython kernel when available and
falls back to the vectorized numpy implementation otherwise; BACKEND names
the choice.  Both backends run the identical operation sequence, so outputs
match bit for bit, and the fork-join mode splits the array into independent
aligned slices, which leaves every per-element operation order unchanged.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _butterfly_py
from .sampling import thread_budget

try:
    from . import _butterfly_cy as _compiled
    BACKEND = "cython"
except ImportError:  # extension not built
    _compiled = None
    BACKEND = "python"

AVAILABLE_BACKENDS = ("python",) if _compiled is None else ("cython", "python")


def _impl(backend: str | None):
    name = backend or BACKEND
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel not available")
        return _compiled
    if name == "python":
        return _butterfly_py
    raise ValueError(f"unknown backend {name!r}")


def apply_stage_range(psi: np.ndarray, diags: np.ndarray, n: int,
                      l_start: int, l_end: int, backend: str | None = None) -> None:
    """Run stages l_start..l_end (with their trailing twiddles) in place."""
    _impl(backend).butterfly_range(psi, diags, n, l_start, l_end, 0, psi.shape[0])


def apply_stages_inplace(psi: np.ndarray, diags: np.ndarray, n: int,
                         mode: str = "serial", backend: str | None = None,
                         threads: int | None = None) -> None:
    """Run all n stages (with interleaved twiddles) on psi in place.

    mode 'serial' processes the whole array in one call; mode 'forkjoin'
    applies a shared prefix of stages, then hands the independent aligned
    blocks of the remaining stages to a thread pool.  Results are
    bit-identical across modes and thread counts.
    """
    size = psi.shape[0]
    if size != 1 << n:
        raise ValueError("state length does not match the plan order")
    if n == 0:
        return
    impl = _impl(backend)
    if mode == "serial":
        impl.butterfly_range(psi, diags, n, 1, n, 0, size)
        return
    if mode != "forkjoin":
        raise ValueError(f"unknown mode {mode!r}")
    workers = threads if threads is not None else thread_budget()
    depth = 0
    while (1 << (depth + 1)) <= workers and depth + 1 < n:
        depth += 1
    if depth == 0:
        impl.butterfly_range(psi, diags, n, 1, n, 0, size)
        return
    impl.butterfly_range(psi, diags, n, 1, depth, 0, size)
    chunk = size >> depth
    starts = range(0, size, chunk)
    with ThreadPoolExecutor(max_workers=1 << depth) as pool:
        list(pool.map(
            lambda lo: impl.butterfly_range(psi, diags, n, depth + 1, n, lo, lo + chunk),
            starts))
