# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled radix-2 butterfly kernel.

Same contract as _butterfly_py.butterfly_range; selected by qrecon.kernels
when the extension is importable.
"""

from libc.math cimport sqrt


def butterfly_range(double complex[::1] psi, const double complex[:, :] diags,
                    int n, int l_start, int l_end, Py_ssize_t lo, Py_ssize_t hi):
    """Apply stages l_start..l_end (each followed by its twiddle diagonal,
    except after the last stage n) to psi[lo:hi] in place.

    The slice must be aligned to the largest block touched, i.e. lo and hi
    multiples of 2**(n - l_start + 1).  The twiddle after stage l shares the
    stage's block layout and is the identity on each block's first half, so
    it is fused into the second-half cell update; the fused product rounds
    identically to a separate diagonal pass.
    """
    cdef double inv = 1.0 / sqrt(2.0)
    cdef Py_ssize_t l, half, block, b, k, i, j
    cdef double complex u, v
    cdef bint twiddled
    with nogil:
        for l in range(l_start, l_end + 1):
            half = (<Py_ssize_t> 1) << (n - l)
            block = half << 1
            twiddled = l < n
            b = lo
            while b < hi:
                if twiddled:
                    for k in range(half):
                        i = b + k
                        j = i + half
                        u = psi[i]
                        v = psi[j]
                        psi[i] = (u + v) * inv
                        psi[j] = (u - v) * inv * diags[l - 1, j]
                else:
                    for k in range(half):
                        i = b + k
                        j = i + half
                        u = psi[i]
                        v = psi[j]
                        psi[i] = (u + v) * inv
                        psi[j] = (u - v) * inv
                b += block
