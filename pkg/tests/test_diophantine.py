import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from pointscatter import diophantine as dio

# Erdos-Turan constant calibrated once on the Kronecker matrix below
# (largest observed exact_D / bound(C=1) was 0.291) and frozen here.
ET_C_FROZEN = 0.3


def test_dist_examples():
    assert dio.dist_to_nearest_int(0.5) == 0.5
    assert dio.dist_to_nearest_int(-0.3) == pytest.approx(0.3)
    assert dio.dist_to_nearest_int(math.sqrt(2)) == pytest.approx(math.sqrt(2) - 1)


@given(st.floats(-1e6, 1e6))
def test_dist_matches_frac_definition(t):
    f = t - math.floor(t)
    assert dio.dist_to_nearest_int(t) == pytest.approx(min(f, 1 - f), abs=1e-9)


def test_frac_multiples_high_precision():
    k = np.array([1, 7, 12345, 99991, 2**34 - 3])
    got = dio.frac_multiples("sqrt2", k)
    with mpmath.workdps(50):
        ref = [float(mpmath.frac(int(q) * mpmath.sqrt(2))) for q in k]
    assert np.allclose(got, ref, rtol=0, atol=1e-15)


def test_sum_inv_dist_examples():
    assert dio.sum_inv_dist("sqrt2", 1) == pytest.approx(math.sqrt(2) + 1)
    assert dio.sum_inv_hdist("sqrt2", 1) == pytest.approx(math.sqrt(2) + 1)
    s = [dio.sum_inv_dist("golden", m) for m in (10, 100, 1000)]
    assert s[0] < s[1] < s[2]
    for m in (5, 50, 500):
        assert dio.sum_inv_hdist("sqrt3", m) <= dio.sum_inv_dist("sqrt3", m)
    with pytest.raises(dio.RationalAlpha):
        dio.sum_inv_dist("0.25", 10)


def test_sum_inv_dist_growth():
    ms = [10**2, 10**3, 10**4, 10**5]
    slope, _ = dio.fit_power(ms, [dio.sum_inv_dist("sqrt2", m) for m in ms])
    assert slope <= 1.15
    slope_g, c = dio.fit_power(ms, [dio.sum_inv_dist("golden", m) for m in ms])
    assert slope_g <= 1.15
    # fitted constant bounds the sum at m = 10^4 up to the spread of the fit
    assert dio.sum_inv_dist("golden", 10**4) / (10**4) ** 1.1 < 2 * math.exp(c) * (10**4) ** (slope_g - 1.1) + 10


def test_sum_inv_hdist_growth():
    # the sum grows like log^2 m, so the local exponent only settles below 0.15 for large m
    ms = [10**5, 10**6, 10**7]
    slope, _ = dio.fit_power(ms, [dio.sum_inv_hdist("sqrt2", m) for m in ms])
    assert slope <= 0.15


def test_kronecker_sequence():
    assert np.allclose(dio.kronecker_sequence("sqrt2", 0.0, 3), [0.41421, 0.82843, 0.24264], atol=1e-5)
    assert np.all(dio.kronecker_sequence(0.0, 0.5, 10) == 0.5)
    a = dio.kronecker_sequence("sqrt3", 0.0, 100)
    b = dio.kronecker_sequence("sqrt3", 0.3, 100)
    assert np.allclose(b, (a + 0.3) % 1.0, atol=1e-14)


def grid_discrepancy(points, step=1e-4):
    """max - min of #{x < t}/N - t over a grid of t (including 0 and 1)."""
    x = np.sort(points)
    t = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    g = np.searchsorted(x, t, side="left") / len(x) - t
    return g.max() - g.min()


def test_discrepancy_examples():
    assert dio.exact_discrepancy([0.37]).discrepancy == 1.0
    assert dio.exact_discrepancy([0.25, 0.75]).discrepancy == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dio.exact_discrepancy([])


@given(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=1, max_size=50))
def test_discrepancy_matches_grid_oracle(pts):
    # grid sup/inf of #{x < t}/N - t are each within one step of the true ones
    d = dio.exact_discrepancy(pts).discrepancy
    g = grid_discrepancy(np.array(pts))
    assert d - 2e-4 - 1e-12 <= g <= d + 1e-12


@given(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=1, max_size=40))
def test_discrepancy_properties(pts):
    rep = dio.exact_discrepancy(pts)
    assert rep.star <= rep.discrepancy + 1e-12
    assert rep.discrepancy <= 2 * rep.star + 1e-12
    assert rep.discrepancy * rep.N >= 1 - 1e-9
    assert 0 < rep.discrepancy <= 1
    assert rep.discrepancy == pytest.approx(dio.exact_discrepancy_quadratic(pts), abs=1e-12)


def test_erdos_turan():
    grid = (np.arange(50) + 0.5) / 50
    assert dio.erdos_turan_bound(grid, 20, 1.0) == pytest.approx(1 / 20, abs=1e-12)
    pts = dio.kronecker_sequence("golden", 0.1, 500)
    assert dio.erdos_turan_bound(pts, 7, 2.0) >= 2.0 / 7
    assert dio.erdos_turan_bound(pts, 500) == pytest.approx(dio.kronecker_erdos_turan_bound("golden", 500, 500))


@pytest.mark.parametrize("alpha", ["sqrt2", "sqrt3", "golden"])
@pytest.mark.parametrize("N", [100, 1000, 10000, 100000])
def test_erdos_turan_chain(alpha, N):
    D = dio.exact_discrepancy(dio.kronecker_sequence(alpha, 0.0, N)).discrepancy
    assert D <= dio.kronecker_erdos_turan_bound(alpha, N, N, ET_C_FROZEN)


@pytest.mark.parametrize("h", [1, 2, 5, 29, 169, 985])
def test_geometric_sum_bound(h):
    N = 3000
    n = np.arange(1, N + 1)
    S = abs(np.exp(2j * np.pi * h * dio.frac_multiples("sqrt2", n)).sum())
    d = dio.dist_to_nearest_int(dio.frac_multiples("sqrt2", [h])[0])
    assert S <= 1 / abs(math.sin(math.pi * d)) + 1e-9 <= 1 / (2 * d) + 1e-9


def test_finite_type():
    for a in ("sqrt2", "golden"):
        t = dio.finite_type_estimate(a, 1e6).tau_hat
        assert 1.0 <= t <= 1.1
    assert dio.finite_type_estimate("golden", 1e3).denominators[:6] == (2, 3, 5, 8, 13, 21)
    with pytest.raises(dio.RationalAlpha):
        dio.finite_type_estimate("0.125", 1e4)
    with pytest.raises(ValueError):
        dio.finite_type_estimate("sqrt2", 5)


@given(st.integers(2, 500).filter(lambda d: math.isqrt(d) ** 2 != d))
def test_finite_type_at_least_one(d):
    assert dio.finite_type_estimate(f"sqrt:{d}", 1e5).tau_hat >= 1.0


def test_decay_and_offset_independence():
    Ns = [100, 1000, 10000, 100000]
    chk = dio.discrepancy_decay_check("sqrt2", 0.0, Ns)
    assert chk.passed and chk.slope <= -0.85
    other = dio.discrepancy_decay_check("sqrt2", 0.37, Ns)
    assert abs(other.slope - chk.slope) <= 0.05
    # nearly rational slope over a short range: no decay
    flat = dio.discrepancy_decay_check("0.0001000001", 0.0, [10, 20, 40, 80])
    assert not flat.passed
