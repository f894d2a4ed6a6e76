"""Information metrics on probability trees and on complex state vectors.

The central objects are the Fisher information of the theta parametrization,
its extension to amplitude-and-phase coordinates on normalized complex
vectors, and the Fubini-Study metric/distance.  The extended metric equals
four times the Fubini-Study metric on normalized states with norm-preserving
tangents; both a closed form and a bottom-up even/odd recursion are provided
and must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, SingularityError
from .probmodel import ConditionalTree, Distribution, ThetaAngle, reconstitute

NORM_TOL = 1e-12         # state-vector normalization tolerance
TANGENT_TOL = 1e-8       # accepted |Re<psi|dpsi>| for norm-preserving tangents
ZERO_MASS = 1e-14        # below this a component counts as zero-mass


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector of length 2**n."""

    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.amps, dtype=complex))
        if arr.ndim != 1 or arr.size & (arr.size - 1):
            raise DomainError("need a flat vector with power-of-2 length")
        norm2 = float(np.vdot(arr, arr).real)
        if abs(norm2 - 1.0) > 1e-9:
            raise DomainError(f"squared norm {norm2} is not 1")
        if abs(norm2 - 1.0) > NORM_TOL:
            arr = arr / math.sqrt(norm2)
        arr.setflags(write=False)
        object.__setattr__(self, "amps", arr)

    @property
    def nbits(self) -> int:
        return int(self.amps.size).bit_length() - 1

    def probabilities(self) -> Distribution:
        return Distribution(np.abs(self.amps) ** 2)

    def phases(self) -> np.ndarray:
        return np.angle(self.amps)


@dataclass(frozen=True)
class Tangent:
    """Complex perturbation dpsi attached to a state vector."""

    damps: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.damps, dtype=complex))
        arr.setflags(write=False)
        object.__setattr__(self, "damps", arr)

    def is_norm_preserving(self, psi: StateVector | np.ndarray, tol: float = 1e-10) -> bool:
        amps = psi.amps if isinstance(psi, StateVector) else np.asarray(psi)
        return abs(float(np.vdot(amps, self.damps).real)) <= tol

    @classmethod
    def projected(cls, psi: StateVector | np.ndarray, raw: np.ndarray) -> "Tangent":
        """Remove the norm-changing component Re<psi|raw> psi."""
        amps = psi.amps if isinstance(psi, StateVector) else np.asarray(psi)
        return cls(np.asarray(raw, dtype=complex)
                   - float(np.vdot(amps, raw).real) * amps)


def _as_amps(psi) -> np.ndarray:
    return psi.amps if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)


def _as_damps(d) -> np.ndarray:
    return d.damps if isinstance(d, Tangent) else np.asarray(d, dtype=complex)


def amplitude_phase_differentials(psi, d) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decompose a complex perturbation into (rho, drho, dphi).

    At zero-mass components the phase is undefined: dphi is set to 0 there,
    and any non-vanishing perturbation of such a component is rejected.
    """
    amps = _as_amps(psi)
    damps = _as_damps(d)
    rho = np.abs(amps) ** 2
    alive = rho > ZERO_MASS
    if np.any(~alive & (np.abs(damps) > 1e-12)):
        raise SingularityError("perturbation of a zero-amplitude component")
    drho = 2.0 * (amps.conj() * damps).real
    dphi = np.zeros_like(rho)
    dphi[alive] = (damps[alive] / amps[alive]).imag
    return rho, drho, dphi


def fisher_info_theta(theta: ThetaAngle | float) -> float:
    """Fisher information of the theta parametrization of a binary outcome.

    Analytically the expectation sum collapses to 1 for every theta; the
    endpoints are covered by continuity.
    """
    t = theta.value if isinstance(theta, ThetaAngle) else float(theta)
    if not 0.0 <= t <= math.pi:
        raise DomainError("theta outside [0, pi]")
    return 1.0


def fisher_info_theta_numeric(theta: float, step: float = 1e-4) -> float:
    """Expectation sum sum_i (d log rho_i / d theta)^2 rho_i evaluated with
    Richardson-extrapolated central differences (cross-check of
    fisher_info_theta)."""
    if not step < theta < math.pi - step:
        raise DomainError("theta too close to the boundary for differencing")
    total = 0.0
    for i in (0, 1):
        f = lambda t: (math.cos(t / 2.0) ** 2, math.sin(t / 2.0) ** 2)[i]

        def diff(h):
            return (math.log(f(theta + h)) - math.log(f(theta - h))) / (2 * h)

        score = (4.0 * diff(step / 2.0) - diff(step)) / 3.0
        total += score**2 * f(theta)
    return total


def _tree_thetas(tree: ConditionalTree) -> list[tuple[int, int, float]]:
    """(level, suffix, theta) for every node, root (level n) first."""
    out = []
    for level, suffix, p0 in tree.nodes():
        if not 0.0 < p0 < 1.0:
            raise SingularityError(
                f"boundary node p0={p0} at level {level}, suffix {suffix}")
        out.append((level, suffix, 2.0 * math.acos(math.sqrt(p0))))
    return out


def fisher_matrix_numeric(tree: ConditionalTree, step: float = 1e-6) -> np.ndarray:
    """Fisher information matrix over the tree's theta-node coordinates.

    Entry (a, b) is the expectation over outcomes of the product of the two
    log-likelihood scores, each evaluated by central finite differences of
    the tree-to-distribution map.  Coordinates are ordered root first, then
    by level downward with ascending suffix; the result is diagonal with the
    conditioning-suffix masses on the diagonal.
    """
    n = tree.depth
    nodes = _tree_thetas(tree)
    base = reconstitute(tree).probs
    scores = np.empty((len(nodes), base.size))
    for a, (level, suffix, _) in enumerate(nodes):
        p0 = tree.node(level, suffix)
        up = reconstitute(tree.with_node(level, suffix, _p0_of(_theta_of(p0) + step))).probs
        dn = reconstitute(tree.with_node(level, suffix, _p0_of(_theta_of(p0) - step))).probs
        with np.errstate(divide="ignore"):
            scores[a] = (np.log(up) - np.log(dn)) / (2.0 * step)
    return np.einsum("ax,bx,x->ab", scores, scores, base)


def _theta_of(p0: float) -> float:
    return 2.0 * math.acos(math.sqrt(min(max(p0, 0.0), 1.0)))


def _p0_of(theta: float) -> float:
    return math.cos(theta / 2.0) ** 2


def extended_fisher_metric(psi, d) -> float:
    """Closed form sum(drho^2/rho) + 4 sum(rho dphi^2) - 4 (sum rho dphi)^2.

    Requires a norm-preserving tangent (sum drho = 0); zero-mass components
    contribute nothing.
    """
    rho, drho, dphi = amplitude_phase_differentials(psi, d)
    if abs(drho.sum()) > TANGENT_TOL:
        raise DomainError("tangent does not preserve the norm to first order")
    alive = rho > ZERO_MASS
    quad = float(np.sum(drho[alive] ** 2 / rho[alive]))
    mean = float(np.sum(rho * dphi))
    return quad + 4.0 * float(np.sum(rho * dphi**2)) - 4.0 * mean**2


def extended_fisher_metric_recursive(psi, d) -> float:
    """Even/odd recursion for the extended metric, evaluated bottom-up.

    ds^2 = sum_k rho_k ds^2|_k + dtheta^2 + sin^2(theta) dalpha^2, where k
    splits the domain on the least significant bit, theta parametrizes the
    split mass, and dalpha is the difference of the conditional-mass-weighted
    phase means of the two branches.
    """
    rho, drho, dphi = amplitude_phase_differentials(psi, d)
    if abs(drho.sum()) > TANGENT_TOL:
        raise DomainError("tangent does not preserve the norm to first order")
    return _efm_recurse(rho, drho, dphi)


def _efm_recurse(rho: np.ndarray, drho: np.ndarray, dphi: np.ndarray) -> float:
    if rho.size == 1:
        return 0.0
    half = rho.size // 2
    # Index x = [j_1 .. j_m]; the split bit is the least significant one,
    # so branch k holds the entries with x congruent to k mod 2.
    total = 0.0
    branch_mass = np.empty(2)
    branch_phase_mean = np.empty(2)
    branch_dmass = np.empty(2)
    for k in (0, 1):
        sub_rho, sub_drho, sub_dphi = rho[k::2], drho[k::2], dphi[k::2]
        mass = float(sub_rho.sum())
        dmass = float(sub_drho.sum())
        branch_mass[k] = mass
        branch_dmass[k] = dmass
        if mass <= ZERO_MASS:
            branch_phase_mean[k] = 0.0
            continue
        cond_rho = sub_rho / mass
        cond_drho = (sub_drho - cond_rho * dmass) / mass
        branch_phase_mean[k] = float(np.sum(cond_rho * sub_dphi))
        total += mass * _efm_recurse(cond_rho, cond_drho, sub_dphi)
    p0 = branch_mass[0]
    if ZERO_MASS < p0 < 1.0 - ZERO_MASS:
        theta = 2.0 * math.acos(math.sqrt(p0))
        dtheta = -2.0 * branch_dmass[0] / math.sin(theta)
        dalpha = branch_phase_mean[1] - branch_phase_mean[0]
        total += dtheta**2 + math.sin(theta) ** 2 * dalpha**2
    elif abs(branch_dmass[0]) > ZERO_MASS:
        raise SingularityError("mass flow across an empty branch")
    return total


def fubini_study_metric(psi, d) -> float:
    """<dpsi|dpsi>/<psi|psi> - <dpsi|psi><psi|dpsi>/<psi|psi>^2."""
    amps = _as_amps(psi)
    damps = _as_damps(d)
    norm2 = float(np.vdot(amps, amps).real)
    if norm2 <= 0.0:
        raise DomainError("zero state vector")
    overlap = complex(np.vdot(amps, damps))
    return float(np.vdot(damps, damps).real) / norm2 - abs(overlap) ** 2 / norm2**2


def fubini_study_distance(psi1, psi2) -> float:
    """arccos sqrt(|<psi1|psi2>|^2) for normalized states, in [0, pi/2]."""
    a1, a2 = _as_amps(psi1), _as_amps(psi2)
    fid = abs(complex(np.vdot(a1, a2))) ** 2
    return math.acos(math.sqrt(min(max(fid, 0.0), 1.0)))


def random_state(nbits: int, rng: np.random.Generator,
                 min_mass: float | None = None) -> StateVector:
    """Random normalized state; min_mass floors every probability (keeps the
    drho^2/rho terms well conditioned in metric sweeps)."""
    size = 1 << nbits
    if min_mass is None:
        min_mass = 0.1 / size
    rho = rng.dirichlet(np.ones(size)) * (1.0 - size * min_mass) + min_mass
    phases = rng.uniform(-math.pi, math.pi, size)
    return StateVector(np.sqrt(rho) * np.exp(1j * phases))


def random_tangent(psi: StateVector, rng: np.random.Generator,
                   scale: float = 0.1) -> Tangent:
    """Random norm-preserving tangent built from (drho, dphi) increments."""
    rho = np.abs(psi.amps) ** 2
    drho = rng.normal(0.0, scale, rho.size)
    drho -= drho.mean()
    dphi = rng.normal(0.0, scale, rho.size)
    damps = (drho / (2.0 * np.sqrt(rho)) + 1j * np.sqrt(rho) * dphi) \
        * np.exp(1j * np.angle(psi.amps))
    return Tangent(damps)
