"""Numpy fallback for the radix-2 butterfly kernel.

Performs the same elementary operations in the same per-element order as the
compiled kernel, so results agree bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def butterfly_range(psi: np.ndarray, diags: np.ndarray, n: int,
                    l_start: int, l_end: int, lo: int, hi: int) -> None:
    """Apply stages l_start..l_end (with their twiddles) to psi[lo:hi]."""
    for l in range(l_start, l_end + 1):
        half = 1 << (n - l)
        view = psi[lo:hi].reshape(-1, 2, half)
        top = view[:, 0, :].copy()
        bot = view[:, 1, :]
        view[:, 0, :] = (top + bot) * _INV_SQRT2
        view[:, 1, :] = (top - bot) * _INV_SQRT2
        if l < n:
            psi[lo:hi] *= diags[l - 1, lo:hi]
