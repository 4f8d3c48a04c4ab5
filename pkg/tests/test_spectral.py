import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pointscatter import lattice as lat
from pointscatter import spectral as sp


def test_regularization_partial_sums(standard):
    assert sp.regularization_constant(standard, 0.5).partial == pytest.approx(1.0)
    assert sp.regularization_constant(standard, 1).partial == pytest.approx(4.0)
    # 1 + 6/2 + 12/5
    assert sp.regularization_constant(standard, 2).partial == pytest.approx(6.4)


@pytest.mark.parametrize("name", ["standard", "irrational"])
def test_c0_stable_under_cutoff(name, request):
    spec = request.getfixturevalue(name)
    a = sp.regularization_constant(spec, 1000)
    b = sp.regularization_constant(spec, 8000)
    assert abs(a.value - b.value) <= a.error + b.error
    assert a.value > 0


def test_inv_sq_tail_main_term(standard):
    T = 1000.0
    est = sp.tail_integral("inv_sq", T, standard, 0.0)
    assert est.value == pytest.approx(4 * math.pi * standard.abc / math.sqrt(T), rel=1e-12)


@pytest.mark.parametrize("kind,lam", [("inv_sq", 0.0), ("inv_sq", 300.0), ("inv_sq", -40.0),
                                      ("secular", 0.0), ("secular", 250.0), ("inv_quartic_plus", 0.0)])
def test_tail_closed_form_matches_quadrature(irrational, kind, lam):
    a = sp.tail_integral(kind, 700.0, irrational, lam)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = sp.tail_integral(kind, 700.0, irrational, lam, quad=True)
    assert a.value == pytest.approx(b.value, rel=1e-7, abs=1e-12)


def test_tail_monotone_in_start(standard):
    vals = [sp.tail_integral("inv_sq", s, standard, 10.0).value for s in (20, 50, 100, 500, 2000)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", ["standard", "irrational"])
def test_tail_difference_matches_direct_sum(name, request):
    spec = request.getfixturevalue(name)
    T = 500.0
    tab = lat.build_norm_table(spec, 4 * T)
    sl = tab.window(T, 4 * T, strict=False)
    lo = int(np.searchsorted(tab.values, T, side="right"))
    direct = math.fsum(tab.mult[lo:sl.stop] / tab.values[lo:sl.stop] ** 2)
    c = sp.REMAINDER_SAFETY * lat.weyl_remainder_constant(tab, sp.THETA)
    n_T = int(tab.mult[:lo].sum())
    n_4T = int(tab.mult[: sl.stop].sum())
    a = sp.tail_integral("inv_sq", T, spec, 0.0, c_rem=c, count_at_start=n_T)
    b = sp.tail_integral("inv_sq", 4 * T, spec, 0.0, c_rem=c, count_at_start=n_4T)
    assert abs(direct - (a.value - b.value)) <= a.error + b.error


def test_secular_monotone_and_poles(std_ctx):
    for a, b in [(0, 1), (1, 2), (10, 11), (99, 100)]:
        xs = np.linspace(a, b, 41)[1:-1]
        F = [sp.secular_F(std_ctx, x).value for x in xs]
        assert np.all(np.diff(F) > 0)
    vals = [sp.secular_F(std_ctx, x).value for x in (-1e2, -1e4, -1e6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < -100
    assert sp.secular_F(std_ctx, 2 - 1e-7).value > 1e5
    assert sp.secular_F(std_ctx, 2 + 1e-7).value < -1e5
    with pytest.raises(sp.PoleProximity):
        sp.secular_F(std_ctx, 3.0)


def test_invalid_phase(standard):
    with pytest.raises(sp.InvalidPhase):
        sp.make_context(standard, math.pi, 10)


@pytest.mark.parametrize("phi", [-2.0, 0.0, 2.0])
def test_solver_interlacing(standard, phi):
    ctx = sp.make_context(standard, phi, 120)
    eigs = sp.solve_eigenvalues(ctx, 120)
    assert eigs[0].lam < 0
    for e in eigs:
        assert e.bracket_lo < e.lam < e.bracket_hi
        assert e.residual <= sp.RESIDUAL_TOL
    lam = sp.eigenvalue_array(eigs)
    assert np.all(np.diff(lam) > 0)


def test_solver_monotone_in_phase(standard):
    runs = [sp.eigenvalue_array(sp.solve_eigenvalues(sp.make_context(standard, p, 20), 20))[:11]
            for p in (-3.0, 0.0, 2.0, 3.0, 3.1)]
    assert np.all(np.diff(np.array(runs), axis=0) > 0)
    assert runs[0][0] < 0


def test_eigenvalues_stable_under_cutoff(standard):
    a = sp.eigenvalue_array(sp.solve_eigenvalues(sp.make_context(standard, 0.5, 100, cutoff=1000), 100))
    b = sp.eigenvalue_array(sp.solve_eigenvalues(sp.make_context(standard, 0.5, 100, cutoff=6000), 100))
    assert np.max(np.abs(a - b)) < 1e-5


def test_greens_norm(std_ctx):
    lam = 1.5
    full = sp.greens_norm_sq(std_ctx, lam)
    assert full.value >= 6 / 0.25 + 12 / 0.25
    w = sp.greens_norm_sq(std_ctx, lam, 2.0)
    assert 0 < w.value <= full.value
    assert sp.greens_norm_sq(std_ctx, 7.5, 0.6).degenerate is False
    assert sp.greens_norm_sq(std_ctx, 7.3, 0.2).degenerate
    with pytest.raises(sp.DegenerateWindow):
        sp.truncation_gap(std_ctx, 7.3, 0.2)


@given(lam=st.floats(1.05, 240.0), L=st.floats(0.3, 30.0))
def test_truncation_gap_range(std_ctx, lam, L):
    if abs(lam - round(lam)) < 1e-6:
        return
    try:
        g = sp.truncation_gap(std_ctx, lam, L)
    except sp.DegenerateWindow:
        return
    assert 0 <= g.gap <= math.sqrt(2)
    assert g.gap <= g.bound + 1e-12


def test_wide_window_gap_small(std_ctx):
    g = sp.truncation_gap(std_ctx, 100.3, 400.0)
    assert g.gap < 0.05


def direct_matrix_element(ctx, lam, zeta, R):
    """Numerator summed over |xi|^2 <= R with the remaining tail taken from
    the denominator's tail (the two agree to relative order |zeta|/sqrt(R))."""
    spec = ctx.spec
    num = den = 0.0
    zc = spec.coefficients * np.array(zeta, float)
    zn = spec.norm(zeta)
    for x, y, z, v in lat.iter_points(spec, R):
        A = v - lam
        B = A - (2 * (zc[0] * x + zc[1] * y + zc[2] * z) - zn)
        num += math.fsum(1.0 / (A * B))
        den += math.fsum(1.0 / (A * A))
    full_den = sp.greens_norm_sq(ctx, lam).value
    return (num + (full_den - den)) / full_den


@pytest.mark.parametrize("ctxname,zeta", [("std_ctx", (1, 0, 0)), ("std_ctx", (2, 1, 0)),
                                          ("irr_ctx", (0, 0, 1)), ("irr_ctx", (1, -1, 2))])
def test_full_matrix_element_against_direct_sum(request, ctxname, zeta):
    ctx = request.getfixturevalue(ctxname)
    lam = sp.solve_eigenvalues(ctx, 60)[-3].lam
    me = sp.matrix_element(ctx, lam, zeta)
    ref = direct_matrix_element(ctx, lam, zeta, 4000.0)
    assert me.value == pytest.approx(ref, abs=1e-6)
    assert sp.matrix_element(ctx, lam, tuple(-t for t in zeta)).value == pytest.approx(me.value, abs=1e-12)


def test_matrix_element_modes(std_ctx):
    lam = sp.solve_eigenvalues(std_ctx, 50)[-1].lam
    for mode, w in (("full", None), ("truncated", 3.0), ("single_window", 3.0)):
        assert sp.matrix_element(std_ctx, lam, (0, 0, 0), mode, w).value == 1.0
    t = sp.matrix_element(std_ctx, lam, (1, 0, 0), "truncated", 3.0)
    assert abs(t.value) <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        sp.matrix_element(std_ctx, lam, (1, 0, 0), "bogus", 3.0)


def test_matrix_element_stable_under_cutoff(standard):
    a = sp.make_context(standard, 0.0, 150, cutoff=1000)
    b = sp.make_context(standard, 0.0, 150, cutoff=1600)
    for e in sp.solve_eigenvalues(a, 150)[-20:]:
        ma = sp.matrix_element(a, e.lam, (1, 1, 0))
        mb = sp.matrix_element(b, e.lam, (1, 1, 0))
        assert abs(ma.value - mb.value) <= ma.tail_bound + mb.tail_bound + 1e-9
