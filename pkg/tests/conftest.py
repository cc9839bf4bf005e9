"""Shared helpers: random geometries and the exhaustive shell oracle."""

import math

import numpy as np
import pytest

from chlattice import DualLattice, minimal_shell
from chlattice.lattice import (
    MULT6_NONRESONANT,
    CriticalSet,
    _objective,
    _pair_representative,
)


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_dual(rng, min_norm=0.5, max_norm=3.0,
                min_angle=math.radians(20.0)) -> DualLattice:
    """Well-conditioned random dual basis."""
    while True:
        r1 = rng.uniform(min_norm, max_norm)
        r2 = rng.uniform(min_norm, max_norm)
        t1 = rng.uniform(0.0, 2.0 * math.pi)
        gap = rng.uniform(min_angle, math.pi - min_angle)
        if rng.random() < 0.5:
            gap = -gap
        k1 = r1 * np.array([math.cos(t1), math.sin(t1)])
        k2 = r2 * np.array([math.cos(t1 + gap), math.sin(t1 + gap)])
        return DualLattice(k1, k2)


def exhaustive_shell(dual: DualLattice, sigma: float = 0.0, bound: int = 20,
                     tie_rtol: float = 1e-9):
    """Brute-force minimizers of the growth objective over |n_i| <= bound."""
    n = np.arange(-bound, bound + 1)
    N1, N2 = np.meshgrid(n, n, indexing="ij")
    KX = N1 * dual.k1[0] + N2 * dual.k2[0]
    KY = N1 * dual.k1[1] + N2 * dual.k2[1]
    Q = KX * KX + KY * KY
    Qsafe = np.where(Q > 0, Q, 1.0)
    V = np.where(Q > 0, Qsafe + sigma / Qsafe, math.inf)
    best = float(V.min())
    mask = V <= best * (1.0 + tie_rtol)
    members = {(int(a), int(b)) for a, b in zip(N1[mask], N2[mask])}
    return members, best


def shell_or_none(dual, sigma=0.0):
    try:
        return minimal_shell(dual, sigma=sigma)
    except Exception:
        return None


def random_mult2_dual(rng) -> tuple[DualLattice, CriticalSet]:
    """Random dual whose minimal shell has exactly one +/- pair."""
    while True:
        dual = random_dual(rng)
        cs = shell_or_none(dual)
        if cs is not None and cs.multiplicity == 2:
            return dual, cs


def random_mult4_dual(rng) -> tuple[DualLattice, CriticalSet]:
    """Rotated, scaled square basis: a four-member shell."""
    s = rng.uniform(0.5, 2.5)
    R = rotation(rng.uniform(0.0, 2.0 * math.pi))
    dual = DualLattice(s * R @ np.array([1.0, 0.0]),
                       s * R @ np.array([0.0, 1.0]))
    return dual, minimal_shell(dual)


def random_resonant_dual(rng) -> tuple[DualLattice, CriticalSet]:
    """Rotated, scaled hexagonal basis: a resonant six-member shell."""
    s = rng.uniform(0.5, 2.5)
    R = rotation(rng.uniform(0.0, 2.0 * math.pi))
    dual = DualLattice(s * R @ np.array([1.0, 0.0]),
                       s * R @ np.array([-0.5, -math.sqrt(3.0) / 2.0]))
    return dual, minimal_shell(dual)


def make_nonresonant_cs(rng) -> tuple[DualLattice, CriticalSet]:
    """Synthetic equal-norm six-member critical set with k3 = n*(k1 +/- k2).

    Equal norms force |a| == |b| in k3 = a k1 + b k2; the basis angle is
    pinned by cos(theta) = (1 - a^2 - b^2)/(2ab).  The set is used directly
    (it is not the minimal shell of its own lattice), which is exactly what
    the closed-form coefficient formulas and the quadrature oracle consume.
    """
    n = int(rng.integers(2, 5))
    b = n if rng.random() < 0.5 else -n
    a = n
    x = (1.0 - a * a - b * b) / (2.0 * a * b)
    assert abs(x) < 1.0
    s = rng.uniform(0.5, 2.0)
    R = rotation(rng.uniform(0.0, 2.0 * math.pi))
    k1 = s * R @ np.array([1.0, 0.0])
    k2 = s * R @ np.array([x, math.sqrt(1.0 - x * x)])
    dual = DualLattice(k1, k2)
    reps = ((1, 0), (0, 1), (a, b))
    reps = tuple(_pair_representative(r) for r in reps)
    members = tuple(list(reps) + [(-i, -j) for i, j in reps])
    vecs = tuple(dual.cartesian(r) for r in reps)
    q = float(vecs[0] @ vecs[0])
    return dual, CriticalSet(
        members=members, multiplicity=6, critical_indices=reps,
        critical_vectors=vecs, lambda0=q, resonance=MULT6_NONRESONANT,
        sigma=0.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
