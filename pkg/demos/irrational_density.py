"""Density of the nested sets Lambda_1, Lambda_2, Lambda_zeta on an irrational torus.

The two conditions pull in opposite directions at moderate lambda.  The gap
condition asks for spacings below lambda^(-1/2+eps), so a dense spectrum,
while the shell condition caps the number of eigenvalues within 3 lambda^-delta
of lambda at lambda^(1/2+2 eps - delta), so a sparse one.  Rescaling the torus
moves both fractions in opposite directions; they only become compatible at
much larger lambda.

Run: python3 demos/irrational_density.py   (about two minutes)
"""
import warnings

import numpy as np

from pointscatter import equidistribution as eq
from pointscatter import lattice as lat
from pointscatter import spectral as sp
from pointscatter.presets import get_preset

warnings.simplefilter("ignore", eq.AdmissibilityViolation)
spec = get_preset("irrational")
print("admissible delta ceiling at eps=0.05:", eq.admissible_delta(0.05))

ctx = sp.make_context(spec, 0.0, 1030)
spectrum = eq.Spectrum.compute(ctx, 1010)
zeta = eq.smallest_frequency(spec)
for X in (250, 500, 1000):
    reps = [eq.density_report(spectrum, name, X, 0.05, 0.1, zeta) for name in eq.SET_NAMES]
    print(X, "  ".join(f"{r.set_name}={r.fraction:.3f}" for r in reps))

# %% spacing statistics behind the Lambda_1 fraction
lam = spectrum.in_range(1000)
lam = lam[lam > 500]
gaps = np.diff(lam)
print("mean gap on [500,1000]: %.4f, threshold lambda^-0.45 at 750: %.4f" % (gaps.mean(), 750**-0.45))

# %% scaling the torus: unperturbed norms as a proxy for the spectrum
for s in (0.25, 0.5, 1.0, 2.0, 4.0):
    scaled = lat.TorusSpec(spec.inv_a2 / s, spec.inv_b2 / s, spec.inv_c2 / s)
    v = lat.build_norm_table(scaled, 1100).values
    fake = eq.Spectrum(ctx, v, 1100.0)
    with np.errstate(all="ignore"):
        r1 = eq.density_report(fake, "Lambda1", 1000, 0.05, 0.1)
        r2 = eq.density_report(fake, "Lambda2", 1000, 0.05, 0.1)
    print(f"scale {s:5.2f}  abc={scaled.abc:6.3f}  Lambda1 {r1.fraction:.3f}  Lambda2 {r2.fraction:.3f}")
