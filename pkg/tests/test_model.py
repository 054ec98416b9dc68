import math
from fractions import Fraction

import numpy as np
import pytest

from hyperphase.errors import InvalidInputError
from hyperphase.model import (ModelParams, bdl_constants, chernoff_lower, chernoff_upper,
                              critical_window_p, giant_fraction, giant_residual,
                              threshold_p, threshold_ratio)


def fixed_point_oracle(c, k):
    """Iterate rho -> 1 - exp(c((1-rho)^(k-1) - 1)) from rho = 1.

    Starting from 1 the iterates decrease monotonically to the largest root,
    which is the positive root when one exists.
    """
    r = 1.0
    for _ in range(10**6):
        nxt = 1.0 - math.exp(c * ((1.0 - r) ** (k - 1) - 1.0))
        if abs(nxt - r) < 1e-15:
            return nxt
        r = nxt
    return r


# frozen from the fixed-point oracle above
RHO_2_2 = 0.7968121300200213
RHO_1_3 = 0.5492363479826943


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_threshold_j1_k3_is_inverse_square(n):
    assert threshold_p(n, 3, 1) == pytest.approx(1 / n**2, rel=1e-14)


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_threshold_k4_j3(n):
    assert threshold_p(n, 4, 3) == pytest.approx(1 / (3 * n), rel=1e-14)


def test_threshold_graph_case():
    assert threshold_p(100, 2, 1) == pytest.approx(0.01)
    assert threshold_ratio(3, 2) == (1, 2)
    assert threshold_ratio(4, 2) == (2, 5)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_threshold_j1_scaling(k):
    n = 50
    assert threshold_p(n, k, 1) * n ** (k - 1) == pytest.approx(math.factorial(k - 2))


def test_threshold_rejects_bad_params():
    for args in [(10, 3, 3), (10, 3, 0), (2, 3, 1)]:
        with pytest.raises(InvalidInputError):
            threshold_p(*args)


def test_model_params_derivation():
    a = ModelParams(100, 3, 2, eps=0.2)
    assert a.p == pytest.approx(1.2 * threshold_p(100, 3, 2))
    b = ModelParams(100, 3, 2, p=a.p)
    assert b.eps == pytest.approx(0.2)
    c = ModelParams(100, 3, 2, eps=-0.3)
    assert c.p == pytest.approx(0.7 * threshold_p(100, 3, 2))
    with pytest.raises(InvalidInputError):
        ModelParams(100, 3, 2)
    with pytest.raises(InvalidInputError):
        ModelParams(100, 3, 2, eps=0.1, p=0.1)


def test_critical_window():
    assert critical_window_p(100, 0) == (pytest.approx(0.01), False)
    p, clamped = critical_window_p(10**6, 1)
    assert p == pytest.approx(1e-6 + 1e-8, rel=1e-12) and not clamped
    assert critical_window_p(100, -1e6) == (0.0, True)


def test_giant_subcritical_is_zero():
    assert giant_fraction(0.4, 3) == 0.0
    assert giant_fraction(0.5, 3) == 0.0
    assert giant_fraction(1.0, 2) == 0.0


def test_giant_against_fixed_point_oracle():
    assert fixed_point_oracle(2, 2) == pytest.approx(RHO_2_2, abs=1e-12)
    assert giant_fraction(2, 2) == pytest.approx(RHO_2_2, abs=1e-10)
    assert giant_fraction(1, 3) == pytest.approx(RHO_1_3, abs=1e-10)
    assert giant_fraction(2, 2) == pytest.approx(0.79681, abs=1e-5)
    assert giant_fraction(1, 3) == pytest.approx(0.549, abs=1e-3)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_giant_residual_and_monotonicity(k):
    crit = 1 / (k - 1)
    cs = np.linspace(crit * 1.001, 5, 60)
    rhos = [giant_fraction(c, k) for c in cs]
    assert all(b >= a - 1e-12 for a, b in zip(rhos, rhos[1:]))
    for c, r in zip(cs, rhos):
        assert abs(giant_residual(r, c, k)) < 1e-10
        assert r == pytest.approx(fixed_point_oracle(c, k), abs=1e-6)
    # continuity at the critical point
    assert giant_fraction(crit * (1 + 1e-6), k) < 1e-4


def test_chernoff_values():
    assert chernoff_upper(100, 0.5, 0) == 1.0
    assert chernoff_lower(100, 0.5, 0) == 1.0
    assert chernoff_upper(100, 0.5, 10) == pytest.approx(math.exp(-100 / (2 * (50 + 10 / 3))))
    assert chernoff_upper(100, 0.5, 10) == pytest.approx(0.3916, abs=1e-4)
    assert chernoff_lower(100, 0.5, 10) == pytest.approx(math.exp(-1))
    assert chernoff_lower(100, 0.0, 3) == 0.0


def test_chernoff_monotone_in_a():
    a = np.linspace(0.1, 40, 50)
    up = [chernoff_upper(200, 0.3, x) for x in a]
    lo = [chernoff_lower(200, 0.3, x) for x in a]
    for seq in (up, lo):
        assert all(0 < v <= 1 for v in seq)
        assert all(y <= x for x, y in zip(seq, seq[1:]))


def test_bdl_k4_j2():
    c = bdl_constants(4, 2, 0.3)
    assert c.c_ell[0] == Fraction(7, 10)
    assert float(c.c_dagger) == pytest.approx(256 / 0.3**4)
    assert float(c.c_dagger) == pytest.approx(31604.94, abs=0.01)


def test_bdl_k3_j2():
    c = bdl_constants(3, 2, 0.3)
    assert c.c_ell[0] == Fraction(3, 4)
    assert c.c_dagger == 65536
    assert c.c_main[0] == 12
    # second level by hand: C_hat_1 = max(4 * 1 * 12 / 2, 8) = 24
    assert c.c_hat[1] == 24
    assert c.c_star[1] == 2 * 6 * 24 * 65536
    assert c.c_main[1] == 24 + 2 * 6 * 24 * 65536 + 16
    assert c.c_final == c.c_main[1]
    assert c.alpha_max == pytest.approx(0.3 / (32 * 6 * 4 * float(c.c_final)))


@pytest.mark.parametrize("k,j", [(k, j) for k in range(2, 7) for j in range(1, k)])
def test_bdl_invariants(k, j):
    c = bdl_constants(k, j, 0.25)
    assert len(c.c_ell) == j - 1 and len(c.c_main) == j
    for x in c.c_ell:
        assert Fraction(1, 2) < x < 1
    if c.c_ell:
        assert c.c_ell[0] == max(c.c_ell)
        assert c.c_dagger >= 256
    else:
        assert c.c_dagger is None
    assert all(b >= a for a, b in zip(c.c_main, c.c_main[1:]))
    assert c.c_final == max(c.c_main)
    assert c.alpha_max > 0
