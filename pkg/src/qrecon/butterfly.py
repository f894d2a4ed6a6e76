"""The butterfly reconstruction of the conjugate-variable transform.

A width-n system carries a ladder of n stage operators F_l (block Hadamard
cells pairing indices k and k + L/2 inside contiguous blocks of
L = 2**(n-l+1)) separated by diagonal twiddle phases t_l derived from the
cyclic-shift recursion.  Composing the ladder and undoing the bit-reversal
of the output reproduces the unitary discrete Fourier matrix exactly; the
in-place evaluation costs O(N log N) cell operations against O(N^2) for the
dense product.

Sign convention: `twiddle_phase` returns the phases of the q -> p ladder,
which adopts the minus sign in the shift recursion.  A plan built with
sign=+1 (the default) conjugates those diagonals, which composes the inverse
ladder and yields the +2*pi*i*j*k/N matrix, the positive-spatial-frequency
convention; sign=-1 keeps the raw phases and yields its conjugate.  Both are
unitary; `dft_matrix` defaults to the +1 convention.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import DomainError
from .probmodel import Distribution

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


# ----------------------------------------------------------------- indexing

def bit_reverse(x: int, n: int) -> int:
    """Reverse the n-bit representation of x."""
    r = 0
    for _ in range(n):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@functools.lru_cache(maxsize=None)
def bit_reversal_permutation(n: int) -> np.ndarray:
    """Index array br with br[y] = bit_reverse(y, n)."""
    br = np.zeros(1, dtype=np.intp)
    for _ in range(n):
        br = np.concatenate([2 * br, 2 * br + 1])
    br.setflags(write=False)
    return br


def node_position(n: int, l: int, x: int, y: int) -> int:
    """Horizontal index of a diagram node: the l lowest bits of the p-index y
    in reversed order, followed by the n-l lowest bits of the q-index x.

    l = 0 returns x itself; l = n returns the bit reversal of y.
    """
    if not 0 <= l <= n:
        raise DomainError(f"level {l} outside 0..{n}")
    if not (0 <= x < (1 << n) and 0 <= y < (1 << n)):
        raise DomainError("index outside the width-n domain")
    mu = 0
    for i in range(l):
        mu = (mu << 1) | ((y >> i) & 1)
    return (mu << (n - l)) | (x & ((1 << (n - l)) - 1))


# ------------------------------------------------------- phases and stages

def shift_phase_closed_form(l: int, k: int) -> float:
    """-2*pi*k / 2**l, the diagonal phase of the conjugated cyclic shift."""
    return -2.0 * math.pi * k / (1 << l)


@dataclass(frozen=True)
class ShiftPhases:
    """Diagonal phases s_l[k] of the one-step shift at ladder depth l."""

    level: int
    values: np.ndarray = field(repr=False)


def derive_shift_phases(l: int) -> ShiftPhases:
    """Solve the shift recursion upward from the two-point base (0, -pi).

    Depth m inherits its first half from half the depth m-1 phases and its
    second half by subtracting pi; the result equals the closed form
    -2*pi*k/2**l to rounding.
    """
    if l < 1:
        raise DomainError("depth must be at least 1")
    values = np.array([0.0, -math.pi])
    for m in range(2, l + 1):
        half = 1 << (m - 1)
        new = np.empty(1 << m)
        new[:half] = values / 2.0
        new[half:] = new[:half] - math.pi
        values = new
    out = values.copy()
    out.setflags(write=False)
    return ShiftPhases(l, out)


def twiddle_phase(n: int, level: int, k: int) -> float:
    """Phase of entry k of the q -> p twiddle diagonal t_level.

    Zero on the first half of each block of 2**(n-level+1) entries, then a
    ramp of -2*pi*(offset into the second half)/blocksize.
    """
    if not 1 <= level <= n - 1:
        raise DomainError(f"twiddle level {level} outside 1..{n - 1}")
    if not 0 <= k < (1 << n):
        raise DomainError("index outside the width-n domain")
    block = 1 << (n - level + 1)
    half = block >> 1
    r = k % block
    if r < half:
        return 0.0
    return -2.0 * math.pi * (r - half) / block


@dataclass(frozen=True)
class TwiddleStage:
    """Phase vector of one twiddle diagonal (q -> p sign convention)."""

    level: int
    phases: np.ndarray = field(repr=False)


def twiddle_stage(n: int, level: int) -> TwiddleStage:
    block = 1 << (n - level + 1)
    half = block >> 1
    r = np.arange(1 << n) % block
    phases = np.where(r < half, 0.0, -2.0 * math.pi * (r - half) / block)
    phases.setflags(write=False)
    return TwiddleStage(level, phases)


def stage_matrix(n: int, l: int) -> np.ndarray:
    """Dense operator of stage l: Hadamard cells pairing k and k + L/2 inside
    each contiguous block of L = 2**(n-l+1) components."""
    if not 1 <= l <= n:
        raise DomainError(f"stage {l} outside 1..{n}")
    size = 1 << n
    half = 1 << (n - l)
    mat = np.zeros((size, size))
    for b in range(0, size, 2 * half):
        for k in range(half):
            i, j = b + k, b + k + half
            mat[i, i] = mat[i, j] = mat[j, i] = _INV_SQRT2
            mat[j, j] = -_INV_SQRT2
    return mat


# ------------------------------------------------------------------- plans

@dataclass(frozen=True)
class ButterflyPlan:
    """Precomputed twiddle diagonals for the n-stage ladder.

    diagonals[l-1] holds the diagonal applied after stage l; sign=+1 stores
    the conjugated (inverse-ladder) values, sign=-1 the raw q -> p values.
    """

    n: int
    sign: int
    diagonals: np.ndarray = field(repr=False)

    def stage(self, l: int) -> np.ndarray:
        """Dense operator of stage l (the diagonals carry the twiddles)."""
        return stage_matrix(self.n, l)

    def twiddle_phases(self, level: int) -> np.ndarray:
        return np.angle(self.diagonals[level - 1])

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "sign": self.sign,
            "twiddle_phases": [list(np.angle(row)) for row in self.diagonals],
        })


def make_plan(n: int, sign: int = +1) -> ButterflyPlan:
    if n < 1:
        raise DomainError("plan needs at least one stage")
    if sign not in (+1, -1):
        raise DomainError("sign must be +1 or -1")
    size = 1 << n
    diags = np.empty((max(n - 1, 0), size), dtype=complex)
    for level in range(1, n):
        diags[level - 1] = np.exp(-1j * sign * twiddle_stage(n, level).phases)
    diags.setflags(write=False)
    return ButterflyPlan(n, sign, diags)


def apply_butterfly(plan: ButterflyPlan, psi: np.ndarray, order: str = "natural",
                    mode: str = "serial", backend: str | None = None,
                    threads: int | None = None) -> np.ndarray:
    """Evaluate the ladder on psi in O(N log N) cell operations.

    order 'bitReversed' returns the ladder output as produced (component mu
    holds the coefficient of the bit-reversed index); 'natural' undoes the
    permutation.  Matches the dense assemble_transform action to rounding.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (1 << plan.n,):
        raise DomainError("state length does not match the plan order")
    work = np.ascontiguousarray(psi.copy())
    kernels.apply_stages_inplace(work, plan.diagonals, plan.n,
                                 mode=mode, backend=backend, threads=threads)
    if order == "bitReversed":
        return work
    if order == "natural":
        return work[bit_reversal_permutation(plan.n)]
    raise DomainError(f"unknown order {order!r}")


def transform_columns(mat: np.ndarray, n: int, sign: int = +1,
                      order: str = "natural") -> np.ndarray:
    """Apply the composed ladder to every column of mat (kernel per column)."""
    size = 1 << n
    if mat.shape[0] != size:
        raise DomainError("column length does not match the ladder order")
    plan = make_plan(n, sign)
    work = np.ascontiguousarray(np.asarray(mat, dtype=complex).T)
    for row in work:
        kernels.apply_stage_range(row, plan.diagonals, n, 1, n)
    out = work.T
    if order == "natural":
        return out[bit_reversal_permutation(n)]
    if order == "bitReversed":
        return np.ascontiguousarray(out)
    raise DomainError(f"unknown order {order!r}")


def assemble_transform(n: int, order: str = "natural", sign: int = +1) -> np.ndarray:
    """Dense matrix of the composed ladder.

    With sign=+1 and natural order this equals dft_matrix(2**n, +1), the
    unitary positive-exponent Fourier matrix, to rounding.
    """
    return transform_columns(np.eye(1 << n, dtype=complex), n, sign, order)


def dft_matrix(size: int, sign: int = +1) -> np.ndarray:
    """Unitary Fourier matrix exp(sign * 2*pi*i*j*k/N) / sqrt(N)."""
    if size < 1 or size & (size - 1):
        raise DomainError("size must be a power of 2")
    if sign not in (+1, -1):
        raise DomainError("sign must be +1 or -1")
    j = np.arange(size)
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / size) / math.sqrt(size)


# ------------------------------------------------------------ verifications

def verify_danielson_lanczos(n: int) -> dict:
    """Check the ladder against the half-size decomposition of the Fourier
    matrix.

    Confirms that the final cell F_1 t_1 couples components (j, j + N/2)
    through [[1, W^j], [1, -W^j]]/sqrt(2) with W = exp(2*pi*i/N), and that
    recursing that decomposition rebuilds dft_matrix(N, +1) entrywise.
    """
    if n < 2:
        raise DomainError("need at least two levels")
    size = 1 << n
    half = size // 2
    plan = make_plan(n, +1)
    w = np.exp(2j * np.pi * np.arange(half) / size)
    if size <= 512:
        # explicit dense check that F_1 t_1 couples exactly the pairs
        # (j, j + N/2) through [[1, W^j], [1, -W^j]]/sqrt(2)
        coupled = stage_matrix(n, 1) @ np.diag(plan.diagonals[0])
        cell_dev = 0.0
        for j in range(half):
            cell = coupled[np.ix_([j, j + half], [j, j + half])]
            target = np.array([[1.0, w[j]], [1.0, -w[j]]]) * _INV_SQRT2
            cell_dev = max(cell_dev, float(np.abs(cell - target).max()))
            zeroed = coupled[j].copy()
            zeroed[[j, j + half]] = 0.0
            cell_dev = max(cell_dev, float(np.abs(zeroed).max()))
    else:
        # the stage couples (j, j + N/2) by construction; check the diagonal
        d = plan.diagonals[0]
        cell_dev = max(float(np.abs(d[:half] - 1.0).max()),
                       float(np.abs(d[half:] - w).max()))

    def recursive_dft(m: int) -> np.ndarray:
        if m == 1:
            return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _INV_SQRT2
        sub = recursive_dft(m - 1)
        sz = 1 << m
        hf = sz // 2
        out = np.empty((sz, sz), dtype=complex)
        w = np.exp(2j * np.pi * np.arange(sz) / sz)
        for j in range(sz):
            out[j, 0::2] = sub[j % hf] * _INV_SQRT2
            out[j, 1::2] = w[j] * sub[j % hf] * _INV_SQRT2
        return out

    recursion_dev = float(np.abs(recursive_dft(n) - dft_matrix(size, +1)).max())
    ladder_dev = float(np.abs(assemble_transform(n, "natural", +1)
                              - dft_matrix(size, +1)).max())
    j = np.arange(half)
    w = np.exp(2j * np.pi * j / size)
    w_shift = np.exp(2j * np.pi * (j + half) / size)
    half_period_dev = float(np.abs(w_shift + w).max())
    return {
        "n": n,
        "cell_deviation": cell_dev,
        "recursion_deviation": recursion_dev,
        "ladder_deviation": ladder_dev,
        "half_period_deviation": half_period_dev,
    }


def shift_operator_check(n: int) -> dict:
    """Conjugate the one-step cyclic shift of the transformed variable back
    through the ladder and compare with the diagonal exp(-2*pi*i*k/N).

    The diagonal phases are exactly the depth-n shift phases, tying the
    twiddle derivation to the translation symmetry it came from.
    """
    if n < 1:
        raise DomainError("need at least one level")
    size = 1 << n
    fwd = assemble_transform(n, "natural", +1)
    shifted = np.roll(fwd, 1, axis=0)  # (P F)[x, :] = F[x-1 mod N, :]
    # F^dagger X through the ladder: the assembled matrix is symmetric, so
    # F^dagger = conj(F) and F^dagger X = conj(F conj(X))
    conj_mat = np.conj(transform_columns(np.conj(shifted), n, +1, "natural"))
    target = np.exp(1j * derive_shift_phases(n).values)
    off = conj_mat - np.diag(np.diag(conj_mat))
    return {
        "n": n,
        "off_diagonal_max": float(np.abs(off).max()),
        "diagonal_deviation": float(np.abs(np.diag(conj_mat) - target).max()),
    }


def chain_propagate(psi: np.ndarray, plan: ButterflyPlan | None = None) -> list[Distribution]:
    """Per-level probability distributions along the ladder.

    Level 0 is |psi|^2 on the input indexing; level l the squared moduli of
    the partial ladder product through stage l (twiddles do not move mass);
    level n the output distribution in the diagram's node indexing, i.e. the
    transformed probabilities under bit reversal.  Stage cells are unitary
    on their two components, so each level-(l-1) pair mass equals the
    corresponding level-l pair mass.
    """
    psi = np.asarray(psi, dtype=complex)
    size = psi.size
    n = size.bit_length() - 1 if size else 0
    if size != 1 << n or n < 1:
        raise DomainError("state length must be a power of 2, at least 2")
    if plan is None:
        plan = make_plan(n, +1)
    if plan.n != n:
        raise DomainError("plan order does not match the state")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > 1e-9:
        raise DomainError("state is not normalized")
    work = np.ascontiguousarray(psi.copy())
    levels = [Distribution(np.abs(work) ** 2)]
    for l in range(1, n + 1):
        kernels.apply_stage_range(work, plan.diagonals, n, l, l)
        levels.append(Distribution(np.abs(work) ** 2))
    return levels
