"""Center-manifold reduction of the lattice Cahn-Hilliard dynamics.

Near the threshold the slaved (stable) Fourier amplitudes are quadratic
functions of the critical amplitudes.  For a stable mode with dual vector k_t
the slaved coefficient of a quadratic product landing on k_t is

    phi = |k_t|^2 * gamma2 * c / beta_t,

where c is the coefficient of that product in (sum_i y_i e_i)^2 and beta_t is
the stable mode's growth rate.  Substituting these back into the critical-mode
equations yields the low-dimensional reduced systems whose cubic (and, in the
resonant case, quadratic) coefficients are assembled here, together with the
classification constant A.

A direct collocation quadrature of the slaving formula is provided as an
independent oracle for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    QuadratureUnderResolved,
    ResonantDenominator,
    UnsupportedCase,
    WrongMultiplicity,
)
from .lattice import (
    MULT2,
    MULT4,
    MULT6_NONRESONANT,
    MULT6_RESONANT,
    CriticalSet,
    DualLattice,
    WaveIndex,
    _pair_representative,
    integer_combination,
)
from .spectrum import ModelParams, eigenvalue_of_norm_sq

# Reduced-system case tags.
CASE_MULT2 = "mult2"
CASE_MULT4 = "mult4"
CASE_MULT6_NONRESONANT = "mult6_nonresonant"
CASE_MULT6_RESONANT_EVEN = "mult6_resonant_even"
CASE_MULT6_RESONANT_GENERAL = "mult6_resonant_general"  # integration only
CASE_LONG_RANGE_MULT2 = "long_range_mult2"

DENOM_RTOL = 1e-9  # geometric denominators below this (relative) are rejected


@dataclass(frozen=True)
class ManifoldCoefficient:
    """One slaved-mode monomial: target stable index, amplitude monomial,
    and its numeric coefficient."""

    target_index: WaveIndex
    monomial: tuple[int, ...]  # exponents over the amplitude variables
    value: float


@dataclass(frozen=True)
class ReducedCoefficients:
    """Coefficients of the reduced amplitude system for one case."""

    case: str
    beta: float
    xi: float = 0.0
    eta: float = 0.0
    chi: float = 0.0
    omega: float = 0.0
    tau: float = 0.0
    a_constant: float = 0.0
    norm_sq: float = 0.0
    lambda0: float = 0.0


def _amplitude_basis(cs: CriticalSet, even: bool):
    """Integer index vectors of the amplitude variables.

    Complex basis: variables pair up as (rep, -rep) per critical pair, in the
    order y1 = k1c, y2 = -k1c, y3 = k2c, ...  Even (cosine) basis: one real
    variable per pair.
    """
    reps = [np.array(r, dtype=int) for r in cs.critical_indices]
    if even:
        return reps
    out = []
    for r in reps:
        out.append(r)
        out.append(-r)
    return out


def _beta_target(dual: DualLattice, index, params: ModelParams) -> float:
    q = dual.norm_sq(tuple(int(v) for v in index))
    return eigenvalue_of_norm_sq(q, params.lam, params.sigma)


def manifold_coefficients(cs: CriticalSet, dual: DualLattice,
                          params: ModelParams) -> list[ManifoldCoefficient]:
    """Complete closed-form list of slaved quadratic coefficients.

    Every pairwise product of critical modes whose index falls outside the
    shell (and off the zero mode) contributes one monomial to the slaved mode
    it lands on.  The coefficient is |k_t|^2*gamma2*c/beta_t with c the
    combinatorial weight of the product.
    """
    if cs.multiplicity not in (2, 4, 6):
        raise WrongMultiplicity(f"multiplicity {cs.multiplicity} not reducible")
    even = params.even_symmetry
    basis = _amplitude_basis(cs, even)
    shell = {tuple(m) for m in cs.members}
    q_shell = cs.norm_sq

    coeffs: list[ManifoldCoefficient] = []
    nvars = len(basis)
    for i in range(nvars):
        for j in range(i, nvars):
            if even:
                # cos(a)cos(b) = [cos(a+b) + cos(a-b)] / 2
                targets = [(basis[i] + basis[j], 0.5 if i == j else 1.0),
                           (basis[i] - basis[j], 0.5 if i == j else 1.0)]
            else:
                targets = [(basis[i] + basis[j], 1.0 if i == j else 2.0)]
            for tgt, weight in targets:
                t = (int(tgt[0]), int(tgt[1]))
                if t == (0, 0) or t in shell:
                    continue
                if even:
                    # cos(t.x) = cos(-t.x): canonicalize the representative
                    t = _pair_representative(t)
                beta_t = _beta_target(dual, t, params)
                if abs(beta_t) < DENOM_RTOL * q_shell * q_shell:
                    raise ResonantDenominator(
                        f"stable-mode eigenvalue at {t} is numerically zero; "
                        "geometry is (near-)resonant for this formula"
                    )
                mono = [0] * nvars
                mono[i] += 1
                mono[j] += 1
                qt = dual.norm_sq(t)
                value = qt * params.gamma2 * weight / beta_t
                coeffs.append(ManifoldCoefficient(t, tuple(mono), value))
    return coeffs


def manifold_quadrature_oracle(cs: CriticalSet, dual: DualLattice,
                               params: ModelParams, target_index: WaveIndex,
                               y, grid: int | None = None) -> complex:
    """Collocation evaluation of the slaved coefficient at amplitudes ``y``.

    Evaluates -(1/(beta_t |e_t|^2)) * Int_U G(y.e) conj(e_t) dx with
    G(u) = Laplacian(gamma2 u^2 + gamma3 u^3) on an M x M grid over the
    fundamental cell, doubling M until converged.  Intended for tests.
    """
    target_index = (int(target_index[0]), int(target_index[1]))
    if target_index in {tuple(m) for m in cs.members} or target_index == (0, 0):
        raise ValueError("target index must be a stable (slaved) mode")
    even = params.even_symmetry
    basis = _amplitude_basis(cs, even)
    y = np.asarray(y, dtype=complex)
    if len(y) != len(basis):
        raise ValueError(f"expected {len(basis)} amplitudes, got {len(y)}")

    if grid is None:
        grid = max(4 * (cs.max_index + max(abs(v) for v in target_index)), 16)

    def evaluate(M: int) -> complex:
        s1 = np.arange(M) / M
        s2 = np.arange(M) / M
        S1, S2 = np.meshgrid(s1, s2, indexing="ij")
        u = np.zeros((M, M), dtype=complex)
        for amp, m in zip(y, basis):
            phase = 2.0 * np.pi * (m[0] * S1 + m[1] * S2)
            if even:
                u += amp * np.cos(phase)
            else:
                u += amp * np.exp(1j * phase)
        w = params.gamma2 * u * u + params.gamma3 * u * u * u
        # Fourier coefficient of w at the target integer index.
        t1, t2 = target_index
        proj = np.exp(-2j * np.pi * (t1 * S1 + t2 * S2))
        w_hat = np.sum(w * proj) / (M * M)
        qt = dual.norm_sq(target_index)
        beta_t = _beta_target(dual, target_index, params)
        # G contributes -|k_t|^2 w_hat; slaving divides by -beta_t.
        phi = qt * w_hat / beta_t
        if even:
            phi = 2.0 * phi  # cosine-basis coefficient
        return complex(phi)

    a = evaluate(grid)
    b = evaluate(2 * grid)
    scale = max(abs(b), 1e-300)
    if abs(a - b) / scale > 1e-8 and abs(a - b) > 1e-12:
        raise QuadratureUnderResolved(
            f"quadrature did not converge at M={grid}->{2*grid} "
            f"(rel change {abs(a-b)/scale:g})"
        )
    return b


def _geometry_denominators(cs: CriticalSet, dual: DualLattice):
    """Squared-norm differences |ki +/- kj|^2 - |k1|^2 entering the closed forms."""
    q = cs.norm_sq
    vecs = [np.asarray(v, dtype=float) for v in cs.critical_vectors]
    out = {}
    pairs = [(0, 1), (0, 2), (1, 2)]
    labels = ["12", "13", "23"]
    for (i, j), lab in zip(pairs, labels):
        if max(i, j) >= len(vecs):
            continue
        dm = float(np.sum((vecs[i] - vecs[j]) ** 2)) - q
        dp = float(np.sum((vecs[i] + vecs[j]) ** 2)) - q
        out[lab] = (dm, dp)
    return out


def _check_denominator(value: float, q: float, what: str):
    if abs(value) < DENOM_RTOL * q:
        raise ResonantDenominator(
            f"geometric denominator {what} vanishes; case routing is wrong "
            "(resonant geometry fed to a non-resonant formula)"
        )


def reduced_coefficients(cs: CriticalSet, dual: DualLattice,
                         params: ModelParams,
                         force_long_range: bool = False) -> ReducedCoefficients:
    """Assemble the reduced-system coefficients for the active case.

    The cubic/quadratic coefficients are evaluated at the threshold lambda0
    (where the classification lives); beta uses the supplied control value.
    ``force_long_range`` routes a two-member shell through the long-range
    formulas even at sigma = 0 (their sigma -> 0 limit is the short-range
    case).
    """
    q = cs.norm_sq
    lam0 = cs.lambda0
    g2, g3 = params.gamma2, params.gamma3
    beta = eigenvalue_of_norm_sq(q, params.lam, params.sigma)

    if params.sigma > 0 or force_long_range:
        if cs.multiplicity != 2:
            raise UnsupportedCase(
                "long-range reduction is derived for a two-member shell only"
            )
        denom = 4.0 * q * q - params.sigma
        _check_denominator(denom, q * q, "4|k|^4 - sigma")
        eta = -8.0 * q * q * g2 * g2 / (3.0 * (-4.0 * q * q + params.sigma)) \
            - 3.0 * q * g3
        a_const = 8.0 * q / (9.0 * denom)
        return ReducedCoefficients(
            case=CASE_LONG_RANGE_MULT2, beta=beta, eta=eta,
            a_constant=a_const, norm_sq=q, lambda0=lam0,
        )

    if cs.multiplicity == 2:
        eta = (2.0 / 3.0) * g2 * g2 - 3.0 * q * g3
        return ReducedCoefficients(
            case=CASE_MULT2, beta=beta, eta=eta,
            a_constant=2.0 / (9.0 * q), norm_sq=q, lambda0=lam0,
        )

    if cs.multiplicity == 4:
        dm, dp = _geometry_denominators(cs, dual)["12"]
        _check_denominator(dm, q, "|k1-k2|^2 - |k1|^2")
        _check_denominator(dp, q, "|k1+k2|^2 - |k1|^2")
        xi = (2.0 / 3.0) * g2 * g2 - 3.0 * q * g3
        eta = 2.0 * q * (2.0 * g2 * g2 / dm + 2.0 * g2 * g2 / dp - 3.0 * g3)
        a_const = (2.0 / 9.0) * max(
            1.0 / (3.0 * q) + 2.0 / dm + 2.0 / dp,
            1.0 / q,
        )
        return ReducedCoefficients(
            case=CASE_MULT4, beta=beta, xi=xi, eta=eta,
            a_constant=a_const, norm_sq=q, lambda0=lam0,
        )

    # multiplicity 6
    if cs.resonance == MULT6_RESONANT:
        dens = _geometry_denominators(cs, dual)
        dm12 = dens["12"][0]
        _check_denominator(dm12, q, "|k1-k2|^2 - |k1|^2")
        if params.even_symmetry:
            xi = -0.75 * q * g3 + g2 * g2 / 6.0
            eta = -1.5 * q * g3 + q * g2 * g2 / dm12
            tau = -q * g2
            return ReducedCoefficients(
                case=CASE_MULT6_RESONANT_EVEN, beta=beta,
                xi=xi, eta=eta, chi=eta, omega=eta, tau=tau,
                a_constant=2.0 / (9.0 * q), norm_sq=q, lambda0=lam0,
            )
        # General resonant system: supported for integration only.
        v1, v2 = (np.asarray(v, float) for v in cs.critical_vectors[:2])
        d_2k1k2 = float(np.sum((2 * v1 + v2) ** 2)) - q
        d_k12k2 = float(np.sum((v1 + 2 * v2) ** 2)) - q
        _check_denominator(d_2k1k2, q, "|2k1+k2|^2 - |k1|^2")
        _check_denominator(d_k12k2, q, "|k1+2k2|^2 - |k1|^2")
        xi = 2.0 * q * (2.0 * g2 * g2 / dm12 - 3.0 * g3)
        eta = -3.0 * q * g3 + (2.0 / 3.0) * g2 * g2
        chi = 2.0 * q * (2.0 * g2 * g2 / d_2k1k2 - 3.0 * g3)
        omega = 2.0 * q * (2.0 * g2 * g2 / d_k12k2 - 3.0 * g3)
        tau = 2.0 * q * g2
        return ReducedCoefficients(
            case=CASE_MULT6_RESONANT_GENERAL, beta=beta,
            xi=xi, eta=eta, chi=chi, omega=omega, tau=tau,
            a_constant=float("nan"), norm_sq=q, lambda0=lam0,
        )

    # multiplicity 6, non-resonant
    ab = integer_combination(cs)
    if ab is None or ab in ((1, 1), (-1, 1), (-1, -1), (1, -1)) or 0 in ab:
        raise UnsupportedCase(
            "non-resonant six-member shell requires k3 = a*k1 + b*k2 with "
            "nonzero integers (a,b) not of unit magnitude"
        )
    dens = _geometry_denominators(cs, dual)
    D = {}
    for lab in ("12", "13", "23"):
        dm, dp = dens[lab]
        _check_denominator(dm, q, f"|k{lab[0]}-k{lab[1]}|^2 - |k1|^2")
        _check_denominator(dp, q, f"|k{lab[0]}+k{lab[1]}|^2 - |k1|^2")
        D[lab] = (1.0 / dm, 1.0 / dp)
    xi = -3.0 * q * g3 + (2.0 / 3.0) * g2 * g2
    eta = -6.0 * q * g3 + q * 4.0 * (D["12"][0] + D["12"][1]) * g2 * g2
    chi = -6.0 * q * g3 + q * 4.0 * (D["13"][0] + D["13"][1]) * g2 * g2
    omega = -6.0 * q * g3 + q * 4.0 * (D["23"][0] + D["23"][1]) * g2 * g2
    s12 = D["12"][0] + D["12"][1]
    s13 = D["13"][0] + D["13"][1]
    s23 = D["23"][0] + D["23"][1]
    a_const = max(
        2.0 / (9.0 * q),
        2.0 / (27.0 * q) + (4.0 / 9.0) * s23,
        2.0 / (27.0 * q) + (4.0 / 9.0) * s13,
        2.0 / (27.0 * q) + (4.0 / 9.0) * s12,
        2.0 / (45.0 * q) + (4.0 / 15.0) * (s12 + s13),
        2.0 / (45.0 * q) + (4.0 / 15.0) * (s12 + s23),
        2.0 / (45.0 * q) + (4.0 / 15.0) * (s13 + s23),
    )
    return ReducedCoefficients(
        case=CASE_MULT6_NONRESONANT, beta=beta,
        xi=xi, eta=eta, chi=chi, omega=omega,
        a_constant=a_const, norm_sq=q, lambda0=lam0,
    )


def reduced_field(rc: ReducedCoefficients, y) -> np.ndarray:
    """Right-hand side of the reduced amplitude system at state ``y``.

    State dimensions: mult2/long-range -> 2 (a1, a2); mult4 -> 2 (r1, r2);
    mult6 non-resonant -> 3 (r1, r2, r3); resonant even -> 3 (y1, y2, y3);
    resonant general -> 6 (a1..a6).
    """
    y = np.asarray(y, dtype=float)
    b = rc.beta
    if rc.case in (CASE_MULT2, CASE_LONG_RANGE_MULT2):
        a1, a2 = y
        rad = a1 * a1 + a2 * a2
        return np.array([b * a1 + rc.eta * a1 * rad,
                         b * a2 + rc.eta * a2 * rad])
    if rc.case == CASE_MULT4:
        r1, r2 = y
        return np.array([
            b * r1 + r1 * (rc.xi * r1 * r1 + rc.eta * r2 * r2),
            b * r2 + r2 * (rc.eta * r1 * r1 + rc.xi * r2 * r2),
        ])
    if rc.case == CASE_MULT6_NONRESONANT:
        r1, r2, r3 = y
        s1, s2, s3 = r1 * r1, r2 * r2, r3 * r3
        return np.array([
            b * r1 + r1 * (rc.xi * s1 + rc.eta * s2 + rc.chi * s3),
            b * r2 + r2 * (rc.eta * s1 + rc.xi * s2 + rc.omega * s3),
            b * r3 + r3 * (rc.chi * s1 + rc.omega * s2 + rc.xi * s3),
        ])
    if rc.case == CASE_MULT6_RESONANT_EVEN:
        y1, y2, y3 = y
        s1, s2, s3 = y1 * y1, y2 * y2, y3 * y3
        return np.array([
            b * y1 + rc.xi * y1 * s1 + rc.eta * y1 * (s2 + s3) + rc.tau * y2 * y3,
            b * y2 + rc.xi * y2 * s2 + rc.eta * y2 * (s1 + s3) + rc.tau * y1 * y3,
            b * y3 + rc.xi * y3 * s3 + rc.eta * y3 * (s1 + s2) + rc.tau * y1 * y2,
        ])
    if rc.case == CASE_MULT6_RESONANT_GENERAL:
        a1, a2, a3, a4, a5, a6 = y
        p1 = a1 * a1 + a2 * a2
        p2 = a3 * a3 + a4 * a4
        p3 = a5 * a5 + a6 * a6
        xi, eta, chi, om, tau = rc.xi, rc.eta, rc.chi, rc.omega, rc.tau
        return np.array([
            b * a1 + a1 * (eta * p1 + xi * p2 + chi * p3) - tau * (a3 * a5 + a4 * a6),
            b * a2 + a2 * (eta * p1 + xi * p2 + chi * p3) - tau * (a3 * a6 - a4 * a5),
            b * a3 + a3 * (xi * p1 + eta * p2 + om * p3) - tau * (a1 * a5 + a2 * a6),
            b * a4 + a4 * (xi * p1 + eta * p2 + om * p3) - tau * (a1 * a6 - a2 * a5),
            b * a5 + a5 * (chi * p1 + om * p2 + eta * p3) - tau * (a1 * a3 - a2 * a4),
            b * a6 + a6 * (chi * p1 + om * p2 + eta * p3) - tau * (a2 * a3 + a1 * a4),
        ])
    raise UnsupportedCase(f"no reduced field for case {rc.case}")


def state_dimension(case: str) -> int:
    """Dimension of the reduced state vector for each case."""
    return {
        CASE_MULT2: 2,
        CASE_LONG_RANGE_MULT2: 2,
        CASE_MULT4: 2,
        CASE_MULT6_NONRESONANT: 3,
        CASE_MULT6_RESONANT_EVEN: 3,
        CASE_MULT6_RESONANT_GENERAL: 6,
    }[case]
