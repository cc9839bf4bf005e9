"""Physical/dual lattice construction and the critical (minimal-norm) shell.

A lattice-periodic field lives on L = {n1*l1 + n2*l2}.  Its Fourier modes are
indexed by the dual lattice L* = {n1*k1 + n2*k2} with k_i . l_j = 2*pi*delta_ij.
The first modes to destabilise are the integer index pairs whose dual vector
minimises |k|^2 (or |k|^2 + sigma/|k|^2 when a long-range -sigma*u term is
present).  This module finds that shell with a certified search and classifies
its resonance structure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CardinalityOutOfModel,
    DegenerateLattice,
    InvalidConcentration,
    NonpositiveGamma3,
    WrongMultiplicity,
)

# Resonance / case tags used across the package.
MULT2 = "mult2"
MULT4 = "mult4"
MULT6_NONRESONANT = "mult6_nonresonant"
MULT6_RESONANT = "mult6_resonant"

EPS_DET = 1e-12
TIE_RTOL = 1e-9  # indices within this relative norm tolerance join the shell

WaveIndex = tuple[int, int]


@dataclass(frozen=True)
class LatticeSpec:
    """Spanning vectors l1, l2 of the physical lattice."""

    l1: np.ndarray
    l2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "l1", np.asarray(self.l1, dtype=float))
        object.__setattr__(self, "l2", np.asarray(self.l2, dtype=float))
        scale = np.linalg.norm(self.l1) * np.linalg.norm(self.l2)
        if abs(self.cross()) <= EPS_DET * max(scale, EPS_DET):
            raise DegenerateLattice(
                f"l1={self.l1.tolist()} and l2={self.l2.tolist()} are linearly dependent"
            )

    def cross(self) -> float:
        return float(self.l1[0] * self.l2[1] - self.l1[1] * self.l2[0])

    @property
    def cell_area(self) -> float:
        return abs(self.cross())


@dataclass(frozen=True)
class DualLattice:
    """Spanning vectors k1, k2 of the dual lattice."""

    k1: np.ndarray
    k2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k1", np.asarray(self.k1, dtype=float))
        object.__setattr__(self, "k2", np.asarray(self.k2, dtype=float))
        cross = self.k1[0] * self.k2[1] - self.k1[1] * self.k2[0]
        scale = np.linalg.norm(self.k1) * np.linalg.norm(self.k2)
        if abs(cross) <= EPS_DET * max(scale, EPS_DET):
            raise DegenerateLattice("dual spanning vectors are linearly dependent")

    def cartesian(self, index: WaveIndex) -> np.ndarray:
        """Dual-lattice vector n1*k1 + n2*k2 for an integer index pair."""
        n1, n2 = index
        return n1 * self.k1 + n2 * self.k2

    def norm_sq(self, index: WaveIndex) -> float:
        k = self.cartesian(index)
        return float(k @ k)

    @property
    def cell_area(self) -> float:
        """Area of the physical fundamental cell, |l1 x l2| = (2 pi)^2 / |k1 x k2|."""
        cross = abs(self.k1[0] * self.k2[1] - self.k1[1] * self.k2[0])
        return (2.0 * np.pi) ** 2 / cross


@dataclass(frozen=True)
class CriticalSet:
    """The minimal shell S with one representative vector per +/- pair."""

    members: tuple[WaveIndex, ...]
    multiplicity: int
    critical_indices: tuple[WaveIndex, ...]  # representatives, k1c first
    critical_vectors: tuple[np.ndarray, ...] = field(repr=False)
    lambda0: float = 0.0
    resonance: str = MULT2
    sigma: float = 0.0

    @property
    def norm_sq(self) -> float:
        """Common squared magnitude of the shell vectors."""
        k = self.critical_vectors[0]
        return float(k @ k)

    @property
    def max_index(self) -> int:
        return max(max(abs(n1), abs(n2)) for n1, n2 in self.members)


def dual_lattice(spec: LatticeSpec) -> DualLattice:
    """Dual basis satisfying k_i . l_j = 2*pi*delta_ij."""
    cross = spec.cross()
    k1 = 2.0 * np.pi / cross * np.array([spec.l2[1], -spec.l2[0]])
    k2 = 2.0 * np.pi / cross * np.array([-spec.l1[1], spec.l1[0]])
    return DualLattice(k1, k2)


def _objective(norm_sq: float, sigma: float) -> float:
    if sigma == 0.0:
        return norm_sq
    return norm_sq + sigma / norm_sq


def _pair_representative(index: WaveIndex) -> WaveIndex:
    """Canonical member of the pair {n, -n}: positive half-plane."""
    n1, n2 = index
    if n1 > 0 or (n1 == 0 and n2 > 0):
        return (n1, n2)
    return (-n1, -n2)


def minimal_shell(dual: DualLattice, sigma: float = 0.0,
                  search_radius: int = 8) -> CriticalSet:
    """Find the index set minimising |k|^2 (sigma=0) or |k|^2 + sigma/|k|^2.

    The scan over |n1|, |n2| <= R is certified global: the radius doubles until
    every index outside the box provably exceeds the found minimum, using the
    smallest-singular-value bound |n1*k1 + n2*k2| >= s_min * |n|.
    """
    if search_radius < 1:
        raise ValueError("search_radius must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")

    basis = np.column_stack([dual.k1, dual.k2])
    s_min = float(np.linalg.svd(basis, compute_uv=False)[-1])

    radius = search_radius
    while True:
        best = np.inf
        norms: dict[WaveIndex, float] = {}
        for n1 in range(-radius, radius + 1):
            for n2 in range(-radius, radius + 1):
                if (n1, n2) == (0, 0):
                    continue
                q = dual.norm_sq((n1, n2))
                norms[(n1, n2)] = q
                best = min(best, _objective(q, sigma))

        # Lower bound on the objective outside the scanned box.
        b = (s_min * (radius + 1)) ** 2
        if sigma == 0.0:
            outside = b
        elif b >= np.sqrt(sigma):
            outside = b + sigma / b
        else:
            outside = 2.0 * np.sqrt(sigma)
        if outside > best * (1.0 + TIE_RTOL):
            break
        if radius > 4096:
            raise RuntimeError("shell search failed to certify; lattice too skew")
        radius *= 2

    members = tuple(sorted(
        idx for idx, q in norms.items()
        if _objective(q, sigma) <= best * (1.0 + TIE_RTOL)
    ))
    lambda0 = best

    reps = sorted({_pair_representative(m) for m in members})
    cs = CriticalSet(
        members=members,
        multiplicity=len(members),
        critical_indices=tuple(reps),
        critical_vectors=tuple(dual.cartesian(r) for r in reps),
        lambda0=lambda0,
        resonance="unclassified",
        sigma=sigma,
    )
    if len(members) not in (2, 4, 6):
        raise CardinalityOutOfModel(
            f"shell cardinality {len(members)} is outside the 2/4/6 model",
            critical_set=cs,
        )

    if len(members) == 2:
        tag = MULT2
    elif len(members) == 4:
        tag = MULT4
    else:
        tag = detect_resonance(cs)
        if tag == MULT6_RESONANT:
            cs = _normalize_resonant(cs, dual)
    return CriticalSet(
        members=cs.members,
        multiplicity=cs.multiplicity,
        critical_indices=cs.critical_indices,
        critical_vectors=cs.critical_vectors,
        lambda0=lambda0,
        resonance=tag,
        sigma=sigma,
    )


def detect_resonance(cs: CriticalSet) -> str:
    """Classify a multiplicity-6 shell: resonant iff, after relabeling the
    three +/- pairs, one representative equals the sum of the other two."""
    if cs.multiplicity != 6:
        raise WrongMultiplicity(
            f"resonance is defined for multiplicity 6, got {cs.multiplicity}"
        )
    if _resonant_assignment(cs.critical_indices) is not None:
        return MULT6_RESONANT
    return MULT6_NONRESONANT


def _resonant_assignment(reps):
    """First (deterministic) relabeling with k_l = k_i + k_j, or None."""
    arr = [np.array(r, dtype=int) for r in reps]
    for (i, j, l) in itertools.permutations(range(3)):
        for si, sj in itertools.product((1, -1), repeat=2):
            for sl in (1, -1):
                if np.array_equal(sl * arr[l], si * arr[i] + sj * arr[j]):
                    return (i, j, l, si, sj, sl)
    return None


def _normalize_resonant(cs: CriticalSet, dual: DualLattice) -> CriticalSet:
    """Reorder/flip representatives so that k3c = k1c + k2c exactly."""
    assignment = _resonant_assignment(cs.critical_indices)
    i, j, l, si, sj, sl = assignment
    reps = [np.array(r, dtype=int) for r in cs.critical_indices]
    new_idx = (tuple(si * reps[i]), tuple(sj * reps[j]), tuple(sl * reps[l]))
    new_idx = tuple((int(a), int(b)) for a, b in new_idx)
    return CriticalSet(
        members=cs.members,
        multiplicity=cs.multiplicity,
        critical_indices=new_idx,
        critical_vectors=tuple(dual.cartesian(r) for r in new_idx),
        lambda0=cs.lambda0,
        resonance=MULT6_RESONANT,
        sigma=cs.sigma,
    )


def integer_combination(cs: CriticalSet) -> tuple[int, int] | None:
    """Integer (a, b) with k3c = a*k1c + b*k2c, if the shell has three pairs
    and such a combination exists."""
    if cs.multiplicity != 6:
        return None
    m1 = np.array(cs.critical_indices[0], dtype=float)
    m2 = np.array(cs.critical_indices[1], dtype=float)
    m3 = np.array(cs.critical_indices[2], dtype=float)
    mat = np.column_stack([m1, m2])
    if abs(np.linalg.det(mat)) < 1e-12:
        return None
    ab = np.linalg.solve(mat, m3)
    ab_int = np.round(ab).astype(int)
    if np.max(np.abs(ab - ab_int)) > 1e-9:
        return None
    return int(ab_int[0]), int(ab_int[1])


def bragg_williams_coefficients(mu: float, D: float, RT: float, a: float,
                                u0: float) -> tuple[float, float, float]:
    """Taylor coefficients b1, b2, b3 of the Bragg-Williams free-energy density
    about the mean concentration u0."""
    if not 0.0 < u0 < 1.0:
        raise InvalidConcentration(f"u0={u0} must lie in (0, 1)")
    if mu <= 0 or D <= 0:
        raise ValueError("mu and D must be positive")
    b1 = (RT / (u0 * (1.0 - u0)) - 2.0 * a) * D / 2.0
    b2 = (2.0 * u0 - 1.0) / (6.0 * u0 ** 2 * (1.0 - u0) ** 2) * D * RT
    b3 = (1.0 - 3.0 * u0 + 3.0 * u0 ** 2) / (12.0 * u0 ** 3 * (1.0 - u0) ** 3) * D * RT
    return b1, b2, b3


def nondimensionalize(mu: float, D: float, RT: float, a: float, u0: float,
                      l: float) -> tuple[float, float, float]:
    """Map physical parameters to the non-dimensional (lambda, gamma2, gamma3)."""
    if l <= 0:
        raise ValueError("length scale l must be positive")
    b1, b2, b3 = bragg_williams_coefficients(mu, D, RT, a, u0)
    lam = -l ** 2 * b1 / (mu * D)
    gamma2 = l ** 2 * b2 * u0 / (mu * D)
    gamma3 = l ** 2 * b3 * u0 ** 2 / (mu * D)
    if gamma3 <= 0:
        raise NonpositiveGamma3(f"gamma3={gamma3} must be positive")
    return lam, gamma2, gamma3
