"""Perturbed spectrum of the cubic torus and the decay of matrix elements.

Run: python3 demos/spectrum_walkthrough.py
"""
import numpy as np

from pointscatter import equidistribution as eq
from pointscatter import spectral as sp
from pointscatter.presets import get_preset

spec = get_preset("standard")
ctx = sp.make_context(spec, phi=0.0, lam_max=2000)
print(f"c0 = {ctx.c0:.6f}, cutoff T = {ctx.cutoff:g}, remainder constant {ctx.c_rem:.3f}")

# %% one new eigenvalue in every gap between consecutive norms
eigs = sp.solve_eigenvalues(ctx, 2000)
for e in eigs[:8]:
    print(f"k={e.k:2d}  {e.bracket_lo:10.4g} < {e.lam:12.8f} < {e.bracket_hi:g}   residual {e.residual:.1e}")
print(f"{len(eigs)} eigenvalues up to 2000")

# %% the Green's function concentrates near lambda as lambda grows
lam = sp.eigenvalue_array(eigs)
lam = lam[lam > 100]
gap = np.array([sp.truncation_gap(ctx, l, l**0.2).gap_sq for l in lam])
print("||g - g_L||^2 with L = lambda^0.2:  log-log slope %.3f" % eq.fit_loglog(lam, gap)[0])

# %% matrix elements <e_zeta g, g> along the spectrum
spectrum = eq.Spectrum(ctx, sp.eigenvalue_array(eigs), eigs[-1].bracket_hi)
for zeta in [(1, 0, 0), (1, 1, 0), (2, 1, 0)]:
    scan = eq.decay_scan(ctx, zeta, 100, 2000, spectrum=spectrum)
    v = np.abs(scan.values())
    blocks = [(lo, hi, v[(scan.lams() >= lo) & (scan.lams() < hi)].max()) for lo, hi in
              [(100, 250), (250, 500), (500, 1000), (1000, 2000)]]
    print(zeta, "slope %.3f" % scan.fitted_slope, " ".join(f"[{lo},{hi}):{m:.3f}" for lo, hi, m in blocks))
