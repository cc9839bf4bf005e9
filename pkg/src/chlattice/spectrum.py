"""Linearized spectrum of the lattice-periodic Cahn-Hilliard operator.

The linear part acts diagonally on dual-lattice Fourier modes with eigenvalue

    beta_k = -|k|^4 + lambda*|k|^2 - sigma,   k = n1*k1 + n2*k2,

so all linear-stability questions reduce to scalar evaluations over integer
index pairs.  This module provides those evaluations, the exchange-of-
stabilities check at the critical threshold, and a growth-rate ranking.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import PesViolation, ZeroMode
from .lattice import CriticalSet, DualLattice, WaveIndex


@dataclass(frozen=True)
class ModelParams:
    """Non-dimensional model parameters."""

    lam: float
    gamma2: float
    gamma3: float
    sigma: float = 0.0
    even_symmetry: bool = False

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.gamma3 <= 0:
            warnings.warn(
                f"gamma3={self.gamma3} <= 0: outside the physically motivated "
                "regime; analysis proceeds",
                stacklevel=2,
            )


def eigenvalue(k_index: WaveIndex, dual: DualLattice, params: ModelParams) -> float:
    """Growth rate beta_k = -|k|^2 (|k|^2 - lambda) - sigma of one Fourier mode."""
    if tuple(k_index) == (0, 0):
        raise ZeroMode("the (0,0) mode is removed by the mean-zero constraint")
    q = dual.norm_sq(k_index)
    return -q * (q - params.lam) - params.sigma


def eigenvalue_of_norm_sq(q: float, lam: float, sigma: float = 0.0) -> float:
    """Same growth rate expressed through the squared magnitude |k|^2 = q."""
    return -q * (q - lam) - sigma


@dataclass(frozen=True)
class PesReport:
    """Outcome of the exchange-of-stabilities check at lambda0."""

    passed: bool
    worst_on_shell: float       # max |beta| over the shell at lambda0
    worst_off_shell: float      # max beta over scanned off-shell indices
    worst_off_index: WaveIndex
    crossing_ok: bool           # shell beta flips sign across lambda0
    probe_radius: int
    details: dict = field(default_factory=dict)


def verify_pes(cs: CriticalSet, dual: DualLattice, params_at,
               probe_radius: int | None = None) -> PesReport:
    """Check the principle of exchange of stabilities at the threshold.

    ``params_at`` maps a control value lambda to ModelParams.  The check
    asserts (a) shell eigenvalues vanish at lambda0, (b) every scanned
    off-shell eigenvalue is negative there, and (c) shell eigenvalues change
    sign across lambda0 +/- delta.
    """
    if probe_radius is None:
        probe_radius = 3 * cs.max_index
    probe_radius = max(probe_radius, cs.max_index + 1)

    lam0 = cs.lambda0
    p0 = params_at(lam0)
    shell = set(cs.members)

    worst_on = 0.0
    for idx in shell:
        worst_on = max(worst_on, abs(eigenvalue(idx, dual, p0)))
    scale = max(1.0, lam0 * lam0)
    if worst_on > 1e-9 * scale:
        raise PesViolation(
            f"shell eigenvalue does not vanish at lambda0 (|beta|={worst_on:g})",
            margin=worst_on,
        )

    worst_off = -np.inf
    worst_idx = None
    for n1 in range(-probe_radius, probe_radius + 1):
        for n2 in range(-probe_radius, probe_radius + 1):
            idx = (n1, n2)
            if idx == (0, 0) or idx in shell:
                continue
            b = eigenvalue(idx, dual, p0)
            if b > worst_off:
                worst_off, worst_idx = b, idx
    if worst_off >= -1e-12 * scale:
        raise PesViolation(
            f"off-shell mode {worst_idx} is not strictly stable at lambda0 "
            f"(beta={worst_off:g})",
            index=worst_idx, margin=worst_off,
        )

    delta = 1e-3 * abs(lam0)
    rep = cs.members[0]
    b_below = eigenvalue(rep, dual, params_at(lam0 - delta))
    b_above = eigenvalue(rep, dual, params_at(lam0 + delta))
    crossing_ok = b_below < 0 < b_above
    if not crossing_ok:
        raise PesViolation(
            "shell eigenvalue does not cross zero transversally at lambda0",
            index=rep,
            margin=max(b_below, -b_above),
        )

    return PesReport(
        passed=True,
        worst_on_shell=worst_on,
        worst_off_shell=worst_off,
        worst_off_index=worst_idx,
        crossing_ok=crossing_ok,
        probe_radius=probe_radius,
        details={"beta_below": b_below, "beta_above": b_above},
    )


def growth_ordering(dual: DualLattice, params: ModelParams, count: int,
                    search_radius: int = 12) -> list[tuple[WaveIndex, float]]:
    """The ``count`` largest eigenvalues in decreasing order.

    Ties are broken lexicographically by index for deterministic output.  The
    scan radius expands until the omitted exterior provably cannot contribute
    (exterior beta is below the current cutoff).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    basis = np.column_stack([dual.k1, dual.k2])
    s_min = float(np.linalg.svd(basis, compute_uv=False)[-1])

    radius = search_radius
    while True:
        entries = []
        for n1 in range(-radius, radius + 1):
            for n2 in range(-radius, radius + 1):
                if (n1, n2) == (0, 0):
                    continue
                entries.append(((n1, n2), eigenvalue((n1, n2), dual, params)))
        entries.sort(key=lambda e: (-e[1], e[0]))
        cutoff = entries[min(count, len(entries)) - 1][1]
        # Any exterior index has |k|^2 >= b; beta(q) peaks at q = lam/2, so the
        # exterior maximum is attained at max(b, lam/2).
        b = (s_min * (radius + 1)) ** 2
        exterior = eigenvalue_of_norm_sq(
            max(b, params.lam / 2.0), params.lam, params.sigma)
        if exterior < cutoff or radius > 4096:
            return entries[:count]
        radius *= 2
