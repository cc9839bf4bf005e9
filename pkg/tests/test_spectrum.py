import math

import numpy as np
import pytest

from chlattice import (
    DualLattice,
    ModelParams,
    ZeroMode,
    eigenvalue,
    eigenvalue_of_norm_sq,
    growth_ordering,
    minimal_shell,
    verify_pes,
)
from chlattice.errors import PesViolation


@pytest.fixture
def square():
    dual = DualLattice(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    return dual, minimal_shell(dual)


def test_eigenvalue_formula(square):
    dual, _ = square
    p = ModelParams(lam=3.0, gamma2=0.0, gamma3=1.0)
    # beta = -q(q - lambda): q=1 -> 2; q=2 -> -(2)(-1)=2; q=4 -> -4
    assert eigenvalue((1, 0), dual, p) == pytest.approx(2.0)
    assert eigenvalue((1, 1), dual, p) == pytest.approx(2.0)
    assert eigenvalue((2, 0), dual, p) == pytest.approx(-4.0)


def test_eigenvalue_zero_mode_raises(square):
    dual, _ = square
    with pytest.raises(ZeroMode):
        eigenvalue((0, 0), dual, ModelParams(lam=1.0, gamma2=0.0, gamma3=1.0))


def test_long_range_eigenvalue():
    # beta = -q(q - lambda) - sigma
    assert eigenvalue_of_norm_sq(2.0, 3.0, sigma=1.5) == pytest.approx(0.5)


def test_pes_holds_on_square(square):
    dual, cs = square
    report = verify_pes(
        cs, dual,
        lambda lam: ModelParams(lam=lam, gamma2=0.0, gamma3=1.0))
    assert report.passed


def test_pes_violation_detected(square):
    dual, cs = square
    # A wrong critical value breaks the on-shell zero crossing.
    bad_cs = type(cs)(
        members=cs.members, multiplicity=cs.multiplicity,
        critical_indices=cs.critical_indices,
        critical_vectors=cs.critical_vectors,
        lambda0=cs.lambda0 * 1.5, resonance=cs.resonance, sigma=cs.sigma)
    with pytest.raises(PesViolation):
        verify_pes(bad_cs, dual,
                   lambda lam: ModelParams(lam=lam, gamma2=0.0, gamma3=1.0))


def test_growth_ordering_descending(square):
    dual, _ = square
    p = ModelParams(lam=1.5, gamma2=0.0, gamma3=1.0)
    ordered = growth_ordering(dual, p, count=6)
    betas = [b for _, b in ordered]
    assert betas == sorted(betas, reverse=True)
    # The four shell modes lead with the common maximal rate.
    top = {idx for idx, b in ordered if abs(b - betas[0]) < 1e-12}
    assert {(1, 0), (-1, 0), (0, 1), (0, -1)} <= top


def test_growth_ordering_interior_peak():
    # lambda large: the fastest-growing mode is interior (q near lambda/2),
    # exercising the exterior-bound logic.
    dual = DualLattice(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    p = ModelParams(lam=20.0, gamma2=0.0, gamma3=1.0)
    ordered = growth_ordering(dual, p, count=4)
    q_top = dual.norm_sq(ordered[0][0])
    # beta(q) = -q(q-lambda) peaks at q = 10; q=10 = (1,3) exists exactly.
    assert q_top == pytest.approx(10.0)
