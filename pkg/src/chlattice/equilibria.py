"""Fixed points of the reduced amplitude systems and their stability.

Coordinates are the collapsed variables of each case: a single radius r for a
two-member shell, (r1, r2) for four members, (r1, r2, r3) for six, and the
real cosine amplitudes (y1, y2, y3) in the resonant even case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateCoefficients, PreTransition, UnsupportedCase
from .reduction import (
    CASE_LONG_RANGE_MULT2,
    CASE_MULT2,
    CASE_MULT4,
    CASE_MULT6_NONRESONANT,
    CASE_MULT6_RESONANT_EVEN,
    ReducedCoefficients,
)
from .spectrum import ModelParams

# Pattern tags.
TRIVIAL = "trivial"
ROLL = "roll"
SQUARE_TORUS = "square_torus"
MIXED_TORUS = "mixed_torus"
TRIPLE_TORUS = "triple_torus"
HEXAGON = "hexagon"
RECTANGLE = "rectangle"

STABLE = "stable"
UNSTABLE = "unstable"

_EIG_TOL = 1e-10
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Equilibrium:
    coordinates: tuple[float, ...]
    pattern: str
    family: str
    jacobian_eigenvalues: tuple[float, ...] = ()
    stability: str = ""
    unstable_directions: tuple[tuple[float, ...], ...] = ()
    far_field: bool = False
    near_origin: bool = True
    residual: float = 0.0
    notes: tuple[str, ...] = field(default_factory=tuple)


def collapsed_field(rc: ReducedCoefficients, y) -> np.ndarray:
    """Reduced vector field in the collapsed coordinates used for equilibria."""
    y = np.asarray(y, dtype=float)
    b = rc.beta
    if rc.case in (CASE_MULT2, CASE_LONG_RANGE_MULT2):
        r = y[0]
        return np.array([b * r + rc.eta * r ** 3])
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
    raise UnsupportedCase(f"no collapsed field for case {rc.case}")


def jacobian_matrix(rc: ReducedCoefficients, y) -> np.ndarray:
    """Exact Jacobian of the collapsed field (symmetric in every case)."""
    y = np.asarray(y, dtype=float)
    b = rc.beta
    if rc.case in (CASE_MULT2, CASE_LONG_RANGE_MULT2):
        r = y[0]
        return np.array([[b + 3.0 * rc.eta * r * r]])
    if rc.case == CASE_MULT4:
        r1, r2 = y
        xi, eta = rc.xi, rc.eta
        return np.array([
            [b + 3 * xi * r1 * r1 + eta * r2 * r2, 2 * eta * r1 * r2],
            [2 * eta * r1 * r2, b + eta * r1 * r1 + 3 * xi * r2 * r2],
        ])
    if rc.case == CASE_MULT6_NONRESONANT:
        r1, r2, r3 = y
        xi, eta, chi, om = rc.xi, rc.eta, rc.chi, rc.omega
        return np.array([
            [b + 3 * xi * r1 ** 2 + eta * r2 ** 2 + chi * r3 ** 2,
             2 * eta * r1 * r2, 2 * chi * r1 * r3],
            [2 * eta * r1 * r2,
             b + eta * r1 ** 2 + 3 * xi * r2 ** 2 + om * r3 ** 2,
             2 * om * r2 * r3],
            [2 * chi * r1 * r3, 2 * om * r2 * r3,
             b + chi * r1 ** 2 + om * r2 ** 2 + 3 * xi * r3 ** 2],
        ])
    if rc.case == CASE_MULT6_RESONANT_EVEN:
        y1, y2, y3 = y
        xi, eta, tau = rc.xi, rc.eta, rc.tau
        return np.array([
            [b + 3 * xi * y1 ** 2 + eta * (y2 ** 2 + y3 ** 2),
             2 * eta * y1 * y2 + tau * y3, 2 * eta * y1 * y3 + tau * y2],
            [2 * eta * y1 * y2 + tau * y3,
             b + eta * y1 ** 2 + 3 * xi * y2 ** 2 + eta * y3 ** 2,
             2 * eta * y2 * y3 + tau * y1],
            [2 * eta * y1 * y3 + tau * y2, 2 * eta * y2 * y3 + tau * y1,
             b + eta * (y1 ** 2 + y2 ** 2) + 3 * xi * y3 ** 2],
        ])
    raise UnsupportedCase(f"no Jacobian for case {rc.case}")


def closed_form_eigenvalues(matrix) -> list[float] | None:
    """Eigenvalues of a structured symmetric matrix, or None.

    Handles diagonal matrices, 1x1/2x2, circulant-symmetric 3x3 (equal
    diagonal, equal off-diagonal), and 3x3 matrices that decouple into a
    1 + 2 block structure.
    """
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    off = m - np.diag(np.diag(m))
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(off)) <= 1e-14 * scale:
        return sorted(float(v) for v in np.diag(m))
    if n == 1:
        return [float(m[0, 0])]
    if n == 2:
        a, bb, c = m[0, 0], m[0, 1], m[1, 1]
        mean = 0.5 * (a + c)
        disc = math.hypot(0.5 * (a - c), bb)
        return sorted([mean - disc, mean + disc])
    if n == 3:
        d = np.diag(m)
        o = np.array([m[0, 1], m[0, 2], m[1, 2]])
        if np.ptp(d) <= 1e-12 * scale and np.ptp(o) <= 1e-12 * scale:
            a, bb = float(d[0]), float(o[0])
            return sorted([a - bb, a - bb, a + 2 * bb])
        for i in range(3):
            others = [j for j in range(3) if j != i]
            if all(abs(m[i, j]) <= 1e-14 * scale for j in others):
                sub = m[np.ix_(others, others)]
                return sorted([float(m[i, i])] + closed_form_eigenvalues(sub))
    return None


def jacobian_spectrum(rc: ReducedCoefficients, eq,
                      matrix=None) -> tuple[tuple[float, ...], tuple]:
    """Eigenvalues (ascending) and eigenvectors of the Jacobian at ``eq``.

    ``eq`` may be an Equilibrium or a raw coordinate sequence; a pre-built
    symmetric ``matrix`` may be supplied directly.  Structured closed forms
    are used when available; a symmetric eigensolver otherwise.
    """
    coords = eq.coordinates if isinstance(eq, Equilibrium) else tuple(eq)
    if matrix is None:
        matrix = jacobian_matrix(rc, coords)
    matrix = np.asarray(matrix, dtype=float)
    closed = closed_form_eigenvalues(matrix)
    num_vals, num_vecs = np.linalg.eigh(matrix)
    if closed is not None:
        vals = tuple(closed)
    else:
        vals = tuple(float(v) for v in num_vals)
    vecs = tuple(tuple(float(x) for x in num_vecs[:, i])
                 for i in range(num_vecs.shape[1]))
    return vals, vecs


def symmetric_spectrum(matrix) -> tuple[float, ...]:
    """Eigenvalues (ascending) of an explicitly given symmetric matrix."""
    closed = closed_form_eigenvalues(matrix)
    if closed is not None:
        return tuple(closed)
    return tuple(float(v) for v in np.linalg.eigvalsh(np.asarray(matrix, float)))


def validity_radius(rc: ReducedCoefficients) -> float:
    """Heuristic radius of validity of the local reduction: ten times the
    natural amplitude sqrt(|beta| / min nonzero cubic coefficient)."""
    cubics = [abs(c) for c in (rc.xi, rc.eta, rc.chi, rc.omega) if c != 0.0]
    if not cubics or rc.beta == 0.0:
        return math.inf
    return 10.0 * math.sqrt(abs(rc.beta) / min(cubics))


def _sqrt_if_positive(value: float) -> float | None:
    if value > 0.0:
        return math.sqrt(value)
    return None


def _mk(rc, coords, pattern, family, r_valid, notes=()):
    coords = tuple(float(c) for c in coords)
    res = float(np.max(np.abs(collapsed_field(rc, coords))))
    ny = float(np.linalg.norm(coords))
    cmax = max(abs(rc.xi), abs(rc.eta), abs(rc.chi), abs(rc.omega), 1.0)
    scale = max(1.0, abs(rc.beta) * ny + cmax * ny ** 3 + abs(rc.tau) * ny * ny)
    return Equilibrium(
        coordinates=coords,
        pattern=pattern,
        family=family,
        far_field=ny > r_valid,
        near_origin=ny <= r_valid,
        residual=res / scale,
        notes=tuple(notes),
    )


def fixed_points(rc: ReducedCoefficients) -> list[Equilibrium]:
    """Nontrivial equilibria of the collapsed reduced system.

    Families whose closed form divides by a vanishing coefficient are omitted
    (with the divisor named in a DegenerateCoefficients error only when every
    family degenerates); radicands are checked for positivity, matching the
    domains of the formulas.
    """
    b = rc.beta
    r_valid = validity_radius(rc)
    out: list[Equilibrium] = []

    if rc.case in (CASE_MULT2, CASE_LONG_RANGE_MULT2):
        if abs(rc.eta) < _DEGENERATE_TOL:
            raise DegenerateCoefficients("cubic coefficient eta vanishes")
        r = _sqrt_if_positive(-b / rc.eta)
        if r is not None:
            out.append(_mk(rc, (r,), ROLL, "p1", r_valid))
        return out

    if rc.case == CASE_MULT4:
        xi, eta = rc.xi, rc.eta
        if abs(xi) >= _DEGENERATE_TOL:
            s = _sqrt_if_positive(-b / xi)
            if s is not None:
                out.append(_mk(rc, (0.0, s), ROLL, "p1", r_valid))
                out.append(_mk(rc, (s, 0.0), ROLL, "p2", r_valid))
        if abs(xi + eta) >= _DEGENERATE_TOL and abs(xi * xi - eta * eta) >= _DEGENERATE_TOL:
            t = _sqrt_if_positive(-b / (xi + eta))
            if t is not None:
                out.append(_mk(rc, (t, t), SQUARE_TORUS, "p3", r_valid))
        return out

    if rc.case == CASE_MULT6_NONRESONANT:
        xi, eta, chi, om = rc.xi, rc.eta, rc.chi, rc.omega
        if abs(xi) >= _DEGENERATE_TOL:
            s = _sqrt_if_positive(-b / xi)
            if s is not None:
                out.append(_mk(rc, (s, 0, 0), ROLL, "p1", r_valid))
                out.append(_mk(rc, (0, s, 0), ROLL, "p2", r_valid))
                out.append(_mk(rc, (0, 0, s), ROLL, "p3", r_valid))
        for family, denom, coords_of in (
            ("p4", om + xi, lambda t: (0.0, t, t)),
            ("p5", chi + xi, lambda t: (t, 0.0, t)),
            ("p6", eta + xi, lambda t: (t, t, 0.0)),
        ):
            if abs(denom) < _DEGENERATE_TOL:
                continue
            t = _sqrt_if_positive(-b / denom)
            if t is not None:
                out.append(_mk(rc, coords_of(t), MIXED_TORUS, family, r_valid))
        denom7 = eta * eta * xi - 2 * eta * chi * om + xi * (
            -xi * xi + chi * chi + om * om)
        if abs(denom7) >= _DEGENERATE_TOL:
            radicands = (
                b * (xi - om) * (-eta + xi - chi + om) / denom7,
                b * (xi - chi) * (-eta + xi + chi - om) / denom7,
                b * (xi - eta) * (eta + xi - chi - om) / denom7,
            )
            if all(r > 0 for r in radicands):
                coords = tuple(math.sqrt(r) for r in radicands)
                out.append(_mk(rc, coords, TRIPLE_TORUS, "p7", r_valid))
        return out

    if rc.case == CASE_MULT6_RESONANT_EVEN:
        xi, eta, tau = rc.xi, rc.eta, rc.tau
        if abs(xi) >= _DEGENERATE_TOL:
            s = _sqrt_if_positive(-b / xi)
            if s is not None:
                for family, axis in (("p1", 0), ("p2", 1), ("p3", 2)):
                    for sign in (1.0, -1.0):
                        coords = [0.0, 0.0, 0.0]
                        coords[axis] = sign * s
                        out.append(_mk(rc, coords, ROLL,
                                       f"{'+' if sign > 0 else '-'}{family}",
                                       r_valid))
        # Hexagons: equal-coordinate roots of the quadratic.
        hex_denom = 2.0 * xi + 4.0 * eta
        disc = tau * tau - 4.0 * b * xi - 8.0 * b * eta
        if abs(hex_denom) >= _DEGENERATE_TOL and disc >= 0.0:
            root = math.sqrt(disc)
            for sign, family, near in ((1.0, "p4", True), (-1.0, "p4-", False)):
                yv = (-tau + sign * root) / hex_denom
                eqm = _mk(rc, (yv, yv, yv), HEXAGON, family, r_valid,
                          notes=() if near else ("outer quadratic branch",))
                out.append(eqm)
        # Rectangles: one coordinate fixed by tau/(xi - eta).
        if abs(xi - eta) >= _DEGENERATE_TOL and abs(xi + eta) >= _DEGENERATE_TOL:
            c = tau / (xi - eta)
            rad = -(b + tau * tau * xi / (xi - eta) ** 2) / (xi + eta)
            d = _sqrt_if_positive(rad)
            if d is not None:
                candidates = []
                for s1 in (1.0, -1.0):
                    for s2 in (1.0, -1.0):
                        candidates.extend([
                            (c, s1 * d, s2 * d),
                            (s1 * d, c, s2 * d),
                            (s1 * d, s2 * d, c),
                        ])
                seen = set()
                idx = 0
                for coords in candidates:
                    key = tuple(round(v, 12) for v in coords)
                    if key in seen:
                        continue
                    seen.add(key)
                    eqm = _mk(rc, coords, RECTANGLE, f"rect{idx}", r_valid)
                    if eqm.residual < 1e-10:
                        out.append(eqm)
                        idx += 1
        return out

    raise UnsupportedCase(f"no fixed-point enumeration for case {rc.case}")


@dataclass(frozen=True)
class StabilityReport:
    equilibria: tuple[Equilibrium, ...]
    roll_regime: str | None = None       # resonant even case only
    regime_bounds: tuple[float, float] | None = None


def _stability_tag(eigs, scale) -> str:
    tol = _EIG_TOL * scale
    unstable = sum(1 for v in eigs if v > tol)
    if unstable == 0:
        return STABLE
    if unstable == len(eigs):
        return UNSTABLE
    return f"saddle_{unstable}"


def _roll_directions(family: str) -> tuple[tuple[float, ...], ...]:
    """Unstable directions of resonant rolls in the two-stable regime."""
    axis = family.lstrip("+-")
    return {
        "p1": ((0.0, 1.0, 1.0), (0.0, -1.0, 1.0)),
        "p2": ((1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)),
        "p3": ((1.0, 1.0, 0.0), (-1.0, 1.0, 0.0)),
    }[axis]


def stability_report(rc: ReducedCoefficients,
                     params: ModelParams) -> StabilityReport:
    """Fully populated equilibrium list for the post-transition regime."""
    if params.lam <= rc.lambda0:
        raise PreTransition(
            f"lambda={params.lam} <= lambda0={rc.lambda0}: only the trivial "
            "state exists and it is stable"
        )
    scale = max(1.0, abs(rc.beta))
    equilibria = []
    for eqm in fixed_points(rc):
        vals, vecs = jacobian_spectrum(rc, eqm)
        tag = _stability_tag(vals, scale)
        tol = _EIG_TOL * scale
        directions = tuple(v for lam_v, v in zip(vals, vecs) if lam_v > tol)
        if (rc.case == CASE_MULT6_RESONANT_EVEN and eqm.pattern == ROLL
                and tag == "saddle_1"):
            directions = _roll_directions(eqm.family)
        equilibria.append(replace(
            eqm,
            jacobian_eigenvalues=tuple(vals),
            stability=tag,
            unstable_directions=directions,
        ))

    roll_regime = None
    bounds = None
    if rc.case == CASE_MULT6_RESONANT_EVEN and rc.beta > 0 and rc.xi < 0:
        swing = rc.tau * math.sqrt(-rc.xi / rc.beta)
        lo, hi = sorted((rc.xi - swing, rc.xi + swing))
        bounds = (lo, hi)
        if rc.eta < lo:
            roll_regime = "three_stable"
        elif rc.eta > hi:
            roll_regime = "one_stable"
        else:
            roll_regime = "two_stable_one_unstable"
    return StabilityReport(tuple(equilibria), roll_regime, bounds)
