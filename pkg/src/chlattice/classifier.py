"""Continuous-vs-jump classification of the transition at the threshold.

For the cubic cases the verdict is the sign of gamma3 - A*gamma2^2, where A
collects the worst (largest) cubic coefficient over the invariant straight
lines of the threshold system.  The resonant even case instead splits on the
sign of gamma2 because its diagonal line is governed by the quadratic term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnsupportedCase
from .reduction import (
    CASE_LONG_RANGE_MULT2,
    CASE_MULT2,
    CASE_MULT4,
    CASE_MULT6_NONRESONANT,
    CASE_MULT6_RESONANT_EVEN,
    ReducedCoefficients,
)
from .spectrum import ModelParams

TYPE_I = "TypeI"
TYPE_II = "TypeII"
BOUNDARY = "Boundary"

_CUBIC_CASES = (CASE_MULT2, CASE_MULT4, CASE_MULT6_NONRESONANT,
                CASE_LONG_RANGE_MULT2)


@dataclass(frozen=True)
class TransitionVerdict:
    transition_type: str     # TypeI | TypeII | Boundary
    threshold: float         # critical gamma3 value A*gamma2^2
    margin: float            # gamma3 - threshold, signed
    case: str
    notes: tuple[str, ...] = field(default_factory=tuple)


def _margin_tolerance(gamma3: float) -> float:
    return 1e-12 * max(1.0, abs(gamma3))


def classify(rc: ReducedCoefficients, params: ModelParams) -> TransitionVerdict:
    """Type I / Type II verdict for the supported reduced cases."""
    g2, g3 = params.gamma2, params.gamma3
    tol = _margin_tolerance(g3)

    if rc.case in _CUBIC_CASES:
        threshold = rc.a_constant * g2 * g2
        margin = g3 - threshold
        notes = []
        if margin > tol:
            verdict = TYPE_I
        elif margin < -tol:
            verdict = TYPE_II
            if rc.case == CASE_MULT4:
                departing = _mult4_departing_lines(rc)
                if departing:
                    notes.append("departing lines: " + ", ".join(departing))
        else:
            verdict = BOUNDARY
            notes.append("gamma3 sits on the classification boundary")
        return TransitionVerdict(verdict, threshold, margin, rc.case,
                                 tuple(notes))

    if rc.case == CASE_MULT6_RESONANT_EVEN:
        q = rc.norm_sq
        if abs(g2) <= tol:
            threshold = 0.0
            margin = g3
            if margin > tol:
                verdict = TYPE_I
            elif margin < -tol:
                verdict = TYPE_II
            else:
                verdict = BOUNDARY
            return TransitionVerdict(
                verdict, threshold, margin, rc.case,
                ("gamma2 = 0: purely cubic threshold system",))
        if g2 > 0:
            threshold = 2.0 * g2 * g2 / (9.0 * q)
            margin = g3 - threshold
            if margin > tol:
                verdict = TYPE_I
                notes = ("axis lines are cubically attracting (xi < 0); the "
                         "diagonal line is quadratically attracting (tau < 0)",)
            elif margin < -tol:
                verdict = TYPE_II
                notes = ("axis lines depart (xi > 0)",)
            else:
                verdict = BOUNDARY
                notes = ("gamma3 sits on the classification boundary",)
            return TransitionVerdict(verdict, threshold, margin, rc.case, notes)
        # gamma2 < 0: the quadratic diagonal line always escapes.
        return TransitionVerdict(
            TYPE_II, math.inf, -math.inf, rc.case,
            ("gamma2 < 0: diagonal line departs quadratically (tau > 0) for "
             "every gamma3",))

    raise UnsupportedCase(
        f"no closed-form classification for case {rc.case}"
    )


def _mult4_departing_lines(rc: ReducedCoefficients) -> list[str]:
    out = []
    if rc.xi > 0:
        out.extend(["r1=0", "r2=0"])
    if rc.xi + rc.eta > 0:
        out.append("r1=r2")
    return out


@dataclass(frozen=True)
class StraightLine:
    line_id: str
    coefficients: tuple[float, ...]  # near-origin scalar coefficient(s)
    order: int                       # 3 = cubic, 2 = quadratic
    approaches_origin: bool


def straight_line_report(rc: ReducedCoefficients) -> list[StraightLine]:
    """Invariant straight lines of the threshold reduced system with the
    scalar coefficient that governs the near-origin flow on each."""
    xi, eta, chi, om, tau = rc.xi, rc.eta, rc.chi, rc.omega, rc.tau

    def cubic(line_id, *coeffs):
        return StraightLine(line_id, tuple(coeffs), 3,
                            all(c < 0 for c in coeffs))

    if rc.case in (CASE_MULT2, CASE_LONG_RANGE_MULT2):
        return [cubic("radial", rc.eta)]
    if rc.case == CASE_MULT4:
        return [
            cubic("r1=0", xi),
            cubic("r2=0", xi),
            cubic("r1=r2", xi + eta),
        ]
    if rc.case == CASE_MULT6_NONRESONANT:
        return [
            cubic("l1: r1=r2=0", xi),
            cubic("l2: r1=r3=0", xi),
            cubic("l3: r2=r3=0", xi),
            cubic("l4: r1=0, r2=r3", xi + om),
            cubic("l5: r2=0, r1=r3", xi + chi),
            cubic("l6: r3=0, r1=r2", xi + eta),
            cubic("l7: r1=r2=r3", xi + eta + chi, xi + eta + om, xi + chi + om),
        ]
    if rc.case == CASE_MULT6_RESONANT_EVEN:
        lines = [
            cubic("y2=y3=0", xi),
            cubic("y1=y3=0", xi),
            cubic("y1=y2=0", xi),
        ]
        if tau != 0.0:
            lines.append(StraightLine("y1=y2=y3", (tau,), 2, tau < 0))
        else:
            lines.append(cubic("y1=y2=y3", xi + 2.0 * eta))
        return lines
    raise UnsupportedCase(f"no straight-line analysis for case {rc.case}")
